#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "d2ke/distances.hpp"
#include "d2ke/parallel.hpp"
#include "d2ke/sampling.hpp"

namespace d2ke {

/// Frozen random-feature map: R omegas, a bandwidth gamma and a measure.
/// Coordinate j of an embedding is exp(-gamma * d(x, omega_j)) / sqrt(R).
class EmbeddingModel {
 public:
  EmbeddingModel(OmegaSample omegas, double gamma, DistanceMeasure measure);

  std::size_t R() const { return omegas_.size(); }
  double gamma() const { return gamma_; }
  const OmegaSample& omegas() const { return omegas_; }
  const DistanceMeasure& measure() const { return measure_; }

 private:
  OmegaSample omegas_;
  double gamma_;
  DistanceMeasure measure_;
};

std::vector<double> embed(const EmbeddingModel& model, const StructuredObject& x);

/// n x R feature matrix, rows in input order. OpenMP over the n x R grid.
RowMatrix embed_dataset(const EmbeddingModel& model, std::span<const StructuredObject> objects);
RowMatrix embed_dataset(const EmbeddingModel& model, const Dataset& data);
/// Row-by-row reference built on embed().
RowMatrix embed_dataset_serial(const EmbeddingModel& model,
                               std::span<const StructuredObject> objects);

/// exp(-gamma * D) / sqrt(cols(D)); the transform embed_dataset applies.
RowMatrix features_from_distances(const RowMatrix& distances, double gamma);

/// Representative-set (similarity-as-features) embedding read off a
/// precomputed object-by-source distance matrix: column j of the result is
/// exp(-gamma * D(:, reps[j])) / sqrt(|reps|).
RowMatrix representative_set_features(const RowMatrix& distances_to_source,
                                      std::span<const std::size_t> reps, double gamma);

/// (1/R) sum_j phi_j(x) phi_j(y) = <embed(x), embed(y)>.
double rf_kernel(const EmbeddingModel& model, const StructuredObject& x, const StructuredObject& y);

/// -(1/gamma) log( mean_j exp(-gamma * values_j) ), via log-sum-exp.
double softmin(std::span<const double> values, double gamma);

/// Softmin over the sample of d(x, omega_j) + d(omega_j, y).
double softmin_distance(const OmegaSample& omegas, double gamma, const StructuredObject& x,
                        const StructuredObject& y, const DistanceMeasure& measure);

enum class GramConstruction { kD2keRf, kDskRbf, kDskNd, kExactMc };

std::string_view construction_name(GramConstruction c);

struct GramMatrix {
  RowMatrix values;
  GramConstruction construction = GramConstruction::kD2keRf;
  bool psd_certified = false;
};

/// F * F^T of an explicit feature matrix; PSD by construction.
GramMatrix gram_from_features(const RowMatrix& features);

double min_eigenvalue(const RowMatrix& symmetric);

enum class DskKind { kRbf, kNegativeDistance };

/// Distance-substitution kernels: exp(-gamma D^2) or -D^2. D must be
/// symmetric, non-negative, with zero diagonal.
GramMatrix dsk_kernel(DskKind kind, double gamma, const RowMatrix& distances);
/// Same substitution applied to a rectangular (test x train) distance block.
RowMatrix dsk_cross_kernel(DskKind kind, double gamma, const RowMatrix& distances);

enum class EigenTreatment { kClip, kFlip, kKeepSigned };

/// Coordinates from the signed eigendecomposition of B = -1/2 J D^(2) J,
/// columns ordered by descending |eigenvalue|.
struct PseudoEuclideanEmbedding {
  RowMatrix coordinates;             // n x r
  std::vector<double> eigenvalues;   // after treatment (clip: max(l,0), flip: |l|)
  std::vector<double> raw_eigenvalues;
  RowMatrix eigenvectors;            // n x r, unit columns
  EigenTreatment treatment = EigenTreatment::kClip;
  // Centering state for out-of-sample projection.
  std::vector<double> column_mean_sq;
  double grand_mean_sq = 0.0;
};

PseudoEuclideanEmbedding pseudo_euclidean_embed(const RowMatrix& distances, std::size_t r,
                                                EigenTreatment treatment);

/// Project new points given their distances to the embedded points
/// (rows: new points, cols: embedded points). Reproduces the embedded
/// coordinates when fed the original matrix.
RowMatrix project_pseudo_euclidean(const PseudoEuclideanEmbedding& pe,
                                   const RowMatrix& distances_to_embedded);

struct ConvergenceReport {
  std::vector<std::size_t> R_list;
  std::size_t R_ref = 0;
  std::size_t trials = 0;
  // errors[level][trial]: max over pairs of |k_R - k_ref|.
  std::vector<std::vector<double>> errors;
  std::vector<double> mean_error;
  // mean_error[k] / mean_error[k + 1].
  std::vector<double> ratios;
};

using ObjectPair = std::pair<StructuredObject, StructuredObject>;

/// Monte-Carlo kernel error at increasing R against a reference estimate at
/// R_ref = 64 * max(R_list) drawn from a disjoint seed. Trial t draws one
/// sample of max(R_list) omegas and evaluates its prefixes.
ConvergenceReport kernel_convergence_sweep(const OmegaDistribution& dist, double gamma,
                                           const DistanceMeasure& measure,
                                           std::span<const ObjectPair> pairs,
                                           std::span<const std::size_t> R_list,
                                           std::uint64_t seed, std::size_t trials);

}  // namespace d2ke
