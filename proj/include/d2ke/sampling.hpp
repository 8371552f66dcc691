#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "d2ke/objects.hpp"
#include "d2ke/rng.hpp"

namespace d2ke {

struct RandomTimeSeriesSpec {
  std::size_t length_min = 2;
  std::size_t length_max = 10;
  std::size_t vars = 1;
  double element_std = 1.0;
};

struct RandomStringSpec {
  std::size_t length_min = 2;
  std::size_t length_max = 10;
  std::uint32_t alphabet_size = 4;
};

struct RandomVectorSetSpec {
  std::size_t size_min = 3;
  std::size_t size_max = 15;
  std::size_t dim = 2;
};

/// Omegas drawn from a dataset (the representative-set source).
struct DataHoldoutSpec {
  std::shared_ptr<const Dataset> source;
  bool without_replacement = true;
};

/// The distribution p(omega) random objects are drawn from.
class OmegaDistribution {
 public:
  using Spec = std::variant<RandomTimeSeriesSpec, RandomStringSpec, RandomVectorSetSpec,
                            DataHoldoutSpec>;

  OmegaDistribution(Spec spec);

  const Spec& spec() const { return spec_; }
  ObjectKind kind() const;
  bool is_holdout() const { return std::holds_alternative<DataHoldoutSpec>(spec_); }
  // "random-time-series", "random-string", "random-vector-set", "data-holdout".
  std::string name() const;
  // Space-separated key=value record of every parameter.
  std::string describe() const;

  // Throws std::invalid_argument on bad ranges or an empty holdout source.
  void validate() const;

  /// Default synthetic distribution for the kind of `train`: series length
  /// [2,10] with V matching; strings of length [2, median training length]
  /// over the training alphabet; sets of size [3,15] on the unit sphere.
  static OmegaDistribution synthetic_default(const Dataset& train);

 private:
  Spec spec_;
};

struct OmegaSample {
  std::vector<StructuredObject> objects;
  std::uint64_t seed = 0;
  OmegaDistribution distribution;
  // Source positions for holdout draws; empty for synthetic distributions.
  std::vector<std::size_t> source_indices;

  std::size_t size() const { return objects.size(); }
};

/// Draw R omegas. Object j depends only on (distribution, seed, j), so a
/// sample of size R1 is a prefix of any larger sample with the same seed.
/// Holdout draws without replacement take a prefix of one seeded permutation.
OmegaSample sample_omegas(const OmegaDistribution& dist, std::size_t R, std::uint64_t seed);

/// Source indices a holdout draw of size R picks.
std::vector<std::size_t> holdout_indices(std::size_t source_size, std::size_t R,
                                         bool without_replacement, std::uint64_t seed);

/// Uniform point on the unit sphere in R^p (normalized Gaussian).
std::vector<double> unit_sphere_vector(std::size_t p, Rng& rng);

// Omega files reuse the dataset formats with a leading
// `#omega seed=<s> R=<R> kind=<kind> <distribution record>` comment.
// `alphabet` names the string symbols; empty means the default alphabet.
std::string format_omega_sample(const OmegaSample& sample, const std::string& alphabet = {});
OmegaSample parse_omega_sample(std::string_view text, const std::string& source_name = "<memory>");
void write_omega_sample(const OmegaSample& sample, const std::string& path,
                        const std::string& alphabet = {});
OmegaSample read_omega_sample(const std::string& path);

}  // namespace d2ke
