#include "d2ke/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "d2ke/errors.hpp"

namespace d2ke {

namespace {

inline double feature_value(double distance, double gamma, double scale) {
  return std::exp(-gamma * distance) * scale;
}

inline double feature_scale(std::size_t R) { return 1.0 / std::sqrt(static_cast<double>(R)); }

}  // namespace

EmbeddingModel::EmbeddingModel(OmegaSample omegas, double gamma, DistanceMeasure measure)
    : omegas_(std::move(omegas)), gamma_(gamma), measure_(measure) {
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
    throw std::invalid_argument("gamma must be a positive finite number");
  }
  if (omegas_.objects.empty()) throw std::invalid_argument("embedding needs at least one omega");
  require_kind(omegas_.objects, measure_.kind(), "omega");
}

std::vector<double> embed(const EmbeddingModel& model, const StructuredObject& x) {
  if (x.kind() != model.measure().kind()) {
    throw KindMismatch("embed: object is " + std::string(kind_name(x.kind())) + ", model expects " +
                       std::string(kind_name(model.measure().kind())));
  }
  const double scale = feature_scale(model.R());
  std::vector<double> out(model.R());
  DistanceWorkspace ws;
  for (std::size_t j = 0; j < model.R(); ++j) {
    out[j] = feature_value(model.measure()(x, model.omegas().objects[j], ws), model.gamma(), scale);
  }
  return out;
}

RowMatrix features_from_distances(const RowMatrix& distances, double gamma) {
  const double scale = feature_scale(static_cast<std::size_t>(distances.cols()));
  RowMatrix out(distances.rows(), distances.cols());
  for (Eigen::Index i = 0; i < distances.rows(); ++i) {
    for (Eigen::Index j = 0; j < distances.cols(); ++j) {
      out(i, j) = feature_value(distances(i, j), gamma, scale);
    }
  }
  return out;
}

RowMatrix embed_dataset(const EmbeddingModel& model, std::span<const StructuredObject> objects) {
  if (objects.empty()) return RowMatrix(0, static_cast<Eigen::Index>(model.R()));
  auto distances = distance_matrix(objects, model.omegas().objects, model.measure());
  return features_from_distances(distances, model.gamma());
}

RowMatrix embed_dataset(const EmbeddingModel& model, const Dataset& data) {
  return embed_dataset(model, std::span<const StructuredObject>(data.objects));
}

RowMatrix embed_dataset_serial(const EmbeddingModel& model,
                               std::span<const StructuredObject> objects) {
  RowMatrix out(objects.size(), model.R());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    std::vector<double> row;
    try {
      row = embed(model, objects[i]);
    } catch (const KindMismatch& e) {
      throw KindMismatch("sample " + std::to_string(i) + ": " + e.what());
    }
    for (std::size_t j = 0; j < row.size(); ++j) out(i, j) = row[j];
  }
  return out;
}

RowMatrix representative_set_features(const RowMatrix& distances_to_source,
                                      std::span<const std::size_t> reps, double gamma) {
  if (reps.empty()) throw std::invalid_argument("representative set is empty");
  const double scale = feature_scale(reps.size());
  RowMatrix out(distances_to_source.rows(), static_cast<Eigen::Index>(reps.size()));
  for (std::size_t j = 0; j < reps.size(); ++j) {
    if (reps[j] >= static_cast<std::size_t>(distances_to_source.cols())) {
      throw std::out_of_range("representative index outside the source");
    }
    for (Eigen::Index i = 0; i < distances_to_source.rows(); ++i) {
      out(i, static_cast<Eigen::Index>(j)) =
          feature_value(distances_to_source(i, static_cast<Eigen::Index>(reps[j])), gamma, scale);
    }
  }
  return out;
}

double rf_kernel(const EmbeddingModel& model, const StructuredObject& x, const StructuredObject& y) {
  auto ex = embed(model, x);
  auto ey = embed(model, y);
  return std::inner_product(ex.begin(), ex.end(), ey.begin(), 0.0);
}

double softmin(std::span<const double> values, double gamma) {
  if (values.empty()) throw std::invalid_argument("softmin of no values");
  if (!(gamma > 0.0)) throw std::invalid_argument("softmin needs gamma > 0");
  const double lo = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(-gamma * (v - lo));
  return lo - std::log(sum / static_cast<double>(values.size())) / gamma;
}

double softmin_distance(const OmegaSample& omegas, double gamma, const StructuredObject& x,
                        const StructuredObject& y, const DistanceMeasure& measure) {
  if (x.kind() != measure.kind() || y.kind() != measure.kind()) {
    throw KindMismatch("softmin_distance: object kinds do not match the measure");
  }
  std::vector<double> through(omegas.size());
  DistanceWorkspace ws;
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    through[j] = measure(x, omegas.objects[j], ws) + measure(omegas.objects[j], y, ws);
  }
  return softmin(through, gamma);
}

std::string_view construction_name(GramConstruction c) {
  switch (c) {
    case GramConstruction::kD2keRf:
      return "d2ke-rf";
    case GramConstruction::kDskRbf:
      return "dsk-rbf";
    case GramConstruction::kDskNd:
      return "dsk-nd";
    case GramConstruction::kExactMc:
      return "exact-mc";
  }
  return "unknown";
}

GramMatrix gram_from_features(const RowMatrix& features) {
  RowMatrix g = features * features.transpose();
  // Products can differ in the last bit between (i,j) and (j,i).
  RowMatrix sym = 0.5 * (g + g.transpose());
  return {std::move(sym), GramConstruction::kD2keRf, true};
}

double min_eigenvalue(const RowMatrix& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  Eigen::MatrixXd m = symmetric;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("eigenvalue computation did not converge");
  return solver.eigenvalues().minCoeff();
}

namespace {

void check_distance_matrix(const RowMatrix& d, bool require_zero_diagonal) {
  if (d.rows() != d.cols()) throw DimensionMismatch("distance matrix is not square");
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (require_zero_diagonal && std::abs(d(i, i)) > 1e-12) {
      throw std::invalid_argument("distance matrix diagonal entry " + std::to_string(i) +
                                  " is not zero");
    }
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (!(d(i, j) >= 0.0)) throw std::invalid_argument("distance matrix has a negative entry");
      double tol = 1e-12 * std::max(1.0, std::abs(d(i, j)));
      if (std::abs(d(i, j) - d(j, i)) > tol) {
        throw std::invalid_argument("distance matrix is not symmetric at (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace

RowMatrix dsk_cross_kernel(DskKind kind, double gamma, const RowMatrix& distances) {
  if (kind == DskKind::kRbf && !(gamma > 0.0)) throw std::invalid_argument("dsk-rbf needs gamma > 0");
  RowMatrix sq = distances.array().square().matrix();
  if (kind == DskKind::kRbf) return (-gamma * sq.array()).exp().matrix();
  return -sq;
}

GramMatrix dsk_kernel(DskKind kind, double gamma, const RowMatrix& distances) {
  check_distance_matrix(distances, true);
  GramMatrix g;
  g.values = dsk_cross_kernel(kind, gamma, distances);
  g.construction = kind == DskKind::kRbf ? GramConstruction::kDskRbf : GramConstruction::kDskNd;
  g.psd_certified = false;
  return g;
}

PseudoEuclideanEmbedding pseudo_euclidean_embed(const RowMatrix& distances, std::size_t r,
                                                EigenTreatment treatment) {
  check_distance_matrix(distances, true);
  const auto n = static_cast<std::size_t>(distances.rows());
  if (r < 1 || r > n) {
    throw std::invalid_argument("target dimension " + std::to_string(r) + " outside [1, " +
                                std::to_string(n) + "]");
  }
  Eigen::MatrixXd sq = distances.array().square().matrix();
  PseudoEuclideanEmbedding pe;
  pe.treatment = treatment;
  Eigen::VectorXd col_mean = sq.colwise().mean().transpose();
  pe.grand_mean_sq = col_mean.mean();
  pe.column_mean_sq.assign(col_mean.data(), col_mean.data() + n);

  // B = -1/2 J D2 J, written out elementwise (D2 symmetric).
  Eigen::MatrixXd b(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (sq(i, j) - col_mean(i) - col_mean(j) + pe.grand_mean_sq);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) {
    std::ostringstream ss;
    ss << "eigendecomposition failed: n=" << n << " ||B||_F=" << b.norm()
       << " max|B-B^T|=" << (b - b.transpose()).cwiseAbs().maxCoeff();
    throw Error(ss.str());
  }
  const auto& values = solver.eigenvalues();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return std::abs(values(static_cast<Eigen::Index>(a))) >
           std::abs(values(static_cast<Eigen::Index>(c)));
  });

  pe.coordinates = RowMatrix::Zero(n, r);
  pe.eigenvectors = RowMatrix::Zero(n, r);
  for (std::size_t k = 0; k < r; ++k) {
    const auto idx = static_cast<Eigen::Index>(order[k]);
    const double lambda = values(idx);
    pe.raw_eigenvalues.push_back(lambda);
    double kept = lambda;
    if (treatment == EigenTreatment::kClip) kept = std::max(0.0, lambda);
    if (treatment == EigenTreatment::kFlip) kept = std::abs(lambda);
    pe.eigenvalues.push_back(kept);
    pe.eigenvectors.col(static_cast<Eigen::Index>(k)) = solver.eigenvectors().col(idx);
    const double magnitude = treatment == EigenTreatment::kClip ? kept : std::abs(lambda);
    pe.coordinates.col(static_cast<Eigen::Index>(k)) =
        solver.eigenvectors().col(idx) * std::sqrt(magnitude);
  }
  return pe;
}

RowMatrix project_pseudo_euclidean(const PseudoEuclideanEmbedding& pe,
                                   const RowMatrix& distances_to_embedded) {
  const auto n = static_cast<Eigen::Index>(pe.column_mean_sq.size());
  if (distances_to_embedded.cols() != n) {
    throw DimensionMismatch("projection needs distances to all " + std::to_string(n) +
                            " embedded points");
  }
  const auto r = static_cast<Eigen::Index>(pe.eigenvalues.size());
  Eigen::Map<const Eigen::VectorXd> col_mean(pe.column_mean_sq.data(), n);
  RowMatrix out = RowMatrix::Zero(distances_to_embedded.rows(), r);
  const double largest = pe.raw_eigenvalues.empty() ? 0.0 : std::abs(pe.raw_eigenvalues.front());
  for (Eigen::Index p = 0; p < distances_to_embedded.rows(); ++p) {
    Eigen::VectorXd sq = distances_to_embedded.row(p).transpose().array().square();
    const double row_mean = sq.mean();
    Eigen::VectorXd b = -0.5 * (sq.array() - row_mean - col_mean.array() + pe.grand_mean_sq);
    for (Eigen::Index k = 0; k < r; ++k) {
      const double lambda = pe.raw_eigenvalues[static_cast<std::size_t>(k)];
      if (std::abs(lambda) <= 1e-12 * largest) continue;
      if (pe.treatment == EigenTreatment::kClip && lambda < 0.0) continue;
      const double sign = lambda < 0.0 ? -1.0 : 1.0;
      out(p, k) = sign * pe.eigenvectors.col(k).dot(b) / std::sqrt(std::abs(lambda));
    }
  }
  return out;
}

ConvergenceReport kernel_convergence_sweep(const OmegaDistribution& dist, double gamma,
                                           const DistanceMeasure& measure,
                                           std::span<const ObjectPair> pairs,
                                           std::span<const std::size_t> R_list,
                                           std::uint64_t seed, std::size_t trials) {
  if (R_list.empty() || !std::is_sorted(R_list.begin(), R_list.end()) || R_list.front() == 0) {
    throw std::invalid_argument("R_list must be non-empty, positive and ascending");
  }
  if (trials < 3) throw std::invalid_argument("convergence sweep needs at least 3 trials");
  if (pairs.empty()) throw std::invalid_argument("convergence sweep needs at least one pair");

  std::vector<StructuredObject> objects;
  objects.reserve(2 * pairs.size());
  for (const auto& [x, y] : pairs) {
    objects.push_back(x);
    objects.push_back(y);
  }
  // Kernel estimates for every pair from the first `R` columns of a
  // distance block (prefix of the sample).
  auto kernels = [&](const RowMatrix& d, std::size_t R) {
    std::vector<double> k(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      double sum = 0.0;
      for (std::size_t j = 0; j < R; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        sum += std::exp(-gamma * d(static_cast<Eigen::Index>(2 * p), col)) *
               std::exp(-gamma * d(static_cast<Eigen::Index>(2 * p + 1), col));
      }
      k[p] = sum / static_cast<double>(R);
    }
    return k;
  };

  ConvergenceReport report;
  report.R_list.assign(R_list.begin(), R_list.end());
  report.R_ref = 64 * R_list.back();
  report.trials = trials;

  auto reference_sample = sample_omegas(dist, report.R_ref, derive_seed(seed, "reference"));
  auto reference = kernels(distance_matrix(objects, reference_sample.objects, measure), report.R_ref);

  report.errors.assign(R_list.size(), std::vector<double>(trials, 0.0));
  for (std::size_t t = 0; t < trials; ++t) {
    auto sample = sample_omegas(dist, R_list.back(), derive_seed(seed, t));
    auto d = distance_matrix(objects, sample.objects, measure);
    for (std::size_t level = 0; level < R_list.size(); ++level) {
      auto k = kernels(d, R_list[level]);
      double worst = 0.0;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        worst = std::max(worst, std::abs(k[p] - reference[p]));
      }
      report.errors[level][t] = worst;
    }
  }
  for (const auto& level : report.errors) {
    report.mean_error.push_back(std::accumulate(level.begin(), level.end(), 0.0) /
                                static_cast<double>(trials));
  }
  for (std::size_t k = 0; k + 1 < report.mean_error.size(); ++k) {
    report.ratios.push_back(report.mean_error[k + 1] > 0.0
                                ? report.mean_error[k] / report.mean_error[k + 1]
                                : std::numeric_limits<double>::quiet_NaN());
  }
  return report;
}

}  // namespace d2ke
