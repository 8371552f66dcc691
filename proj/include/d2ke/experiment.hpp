#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "d2ke/datasets.hpp"
#include "d2ke/distances.hpp"
#include "d2ke/embedding.hpp"
#include "d2ke/learners.hpp"
#include "d2ke/sampling.hpp"

namespace d2ke {

inline constexpr std::string_view kVersion = "0.1.0";

// Methods the harness can run.
inline const std::vector<std::string> kAllMethods = {"d2ke", "knn", "dsk-rbf", "dsk-nd",
                                                     "gdk-led", "rsm"};

/// Experiment description read from a flat `key = value` file.
///
/// Keys: dataset, format, test_dataset, n, train_fraction, measure, methods,
/// gamma_grid, mu_grid, lambda_grid, R_grid, k_grid, rank_grid, loss, folds,
/// seed, output, output_format, transductive_led, led_eigen, standardize,
/// tol, max_iter, omega_ts_length, omega_element_std, omega_str_length,
/// omega_vset_size. Lists are comma separated; ranges are `min,max`.
struct ExperimentConfig {
  std::string dataset;  // file path or synthetic:<task>
  std::string format;   // empty: infer from the file name
  std::string test_dataset;
  std::size_t synthetic_n = 300;
  double train_fraction = 0.7;
  std::string measure;  // empty: default for the object kind
  std::vector<std::string> methods;
  std::vector<double> gamma_grid;
  std::vector<double> mu_grid;
  std::vector<double> lambda_grid;
  std::vector<std::size_t> R_grid;
  std::vector<std::size_t> k_grid;
  std::vector<std::size_t> rank_grid;
  Loss loss = Loss::kLogistic;
  std::size_t folds = 10;
  std::vector<std::uint64_t> seeds;
  std::string output;
  std::string output_format = "tsv";
  bool transductive_led = false;
  EigenTreatment led_treatment = EigenTreatment::kClip;
  bool standardize = true;
  double tol = 1e-6;
  std::size_t max_iter = 500;
  std::optional<std::pair<std::size_t, std::size_t>> omega_ts_length;
  std::optional<double> omega_element_std;
  std::optional<std::pair<std::size_t, std::size_t>> omega_str_length;
  std::optional<std::pair<std::size_t, std::size_t>> omega_vset_size;

  /// Paper-range defaults for every grid.
  static ExperimentConfig with_defaults();
  // Throws ConfigError when an invariant fails.
  void validate() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

struct ResultRow {
  std::string method;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | failed
  std::string message;
  double accuracy = 0.0;  // percent
  double seconds = 0.0;
  std::size_t R = 0;
  double cv_score = 0.0;  // mean fold accuracy, percent
  std::map<std::string, std::string> hyperparameters;
  std::map<std::string, std::string> provenance;

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::map<std::string, std::string> environment;

  bool operator==(const ResultTable&) const = default;
};

/// Records the dataset ids touched while selecting hyper-parameters.
class LeakageAudit {
 public:
  void touch(std::size_t id) { touched_.insert(id); }
  template <typename Range>
  void touch_all(const Range& ids) {
    for (auto id : ids) touched_.insert(id);
  }
  // Ids both touched and in `forbidden`.
  std::vector<std::size_t> violations(const std::vector<std::size_t>& forbidden) const;
  std::size_t touched_count() const { return touched_.size(); }

 private:
  std::set<std::size_t> touched_;
};

/// Optional record of intermediate artifacts from one method run.
struct MethodTrace {
  RowMatrix train_features;
  RowMatrix test_features;
  std::vector<int> test_predictions;
  std::optional<OmegaSample> omegas;
  CvResult cv;
  LeakageAudit audit;
};

/// CV on `train`, refit with the best parameters, one evaluation on `test`.
/// Failures are reported in the row rather than thrown.
ResultRow run_method(const std::string& method, const Dataset& train, const Dataset& test,
                     const DistanceMeasure& measure, const ExperimentConfig& config,
                     std::uint64_t seed, MethodTrace* trace = nullptr);

/// Train/test datasets for one seed: loaded or generated, split, and
/// standardized when they hold time series.
std::pair<Dataset, Dataset> prepare_data(const ExperimentConfig& config, std::uint64_t seed);

OmegaDistribution d2ke_distribution(const ExperimentConfig& config, const Dataset& train);

ResultTable run_experiment(const ExperimentConfig& config);

enum class ResultFormat { kTsv, kJson };
ResultFormat parse_result_format(std::string_view name);

std::string format_results(const ResultTable& table, ResultFormat format);
ResultTable parse_results(std::string_view text, ResultFormat format);
void emit_results(const ResultTable& table, const std::string& path, ResultFormat format);

struct ScalingPoint {
  std::size_t n = 0;
  std::size_t R = 0;
  double seconds = 0.0;
};

struct ScalingReport {
  std::vector<ScalingPoint> n_sweep;  // R fixed at max(R_list)
  std::vector<ScalingPoint> R_sweep;  // n fixed at max(n_list)
  double n_slope = 0.0;
  double R_slope = 0.0;
  bool degenerate = false;  // a sweep had no spread in its x values
  int threads = 1;
};

/// Least-squares slope of log(y) against log(x). Returns 0 if every x is equal.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Wall-clock of embed_dataset over the sweeps (minimum of `repeats` runs).
ScalingReport timing_scaling_report(const DistanceMeasure& measure, const OmegaDistribution& dist,
                                    std::span<const StructuredObject> pool,
                                    std::span<const std::size_t> n_list,
                                    std::span<const std::size_t> R_list, std::uint64_t seed,
                                    std::size_t repeats = 3);
/// Data objects drawn from `dist` itself.
ScalingReport timing_scaling_report(const DistanceMeasure& measure, const OmegaDistribution& dist,
                                    std::span<const std::size_t> n_list,
                                    std::span<const std::size_t> R_list, std::uint64_t seed);

}  // namespace d2ke
