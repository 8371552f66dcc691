#include "d2ke/learners.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "d2ke/errors.hpp"
#include "d2ke/rng.hpp"

namespace d2ke {

std::string_view loss_name(Loss loss) {
  return loss == Loss::kLogistic ? "logistic" : "hinge-squared";
}

Loss parse_loss(std::string_view name) {
  if (name == "logistic") return Loss::kLogistic;
  if (name == "hinge-squared" || name == "squared-hinge") return Loss::kSquaredHinge;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

BinaryObjective::BinaryObjective(const RowMatrix& features, std::vector<double> targets, double mu,
                                 Loss loss)
    : features_(features), mu_(mu), loss_(loss) {
  if (static_cast<Eigen::Index>(targets.size()) != features.rows()) {
    throw DimensionMismatch("objective: targets and feature rows differ");
  }
  targets_ = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
}

namespace {

// Loss value and derivative with respect to the margin z = t * w.x.
inline void margin_loss(Loss loss, double z, double& value, double& slope) {
  if (loss == Loss::kLogistic) {
    if (z > 0) {
      double e = std::exp(-z);
      value = std::log1p(e);
      slope = -e / (1.0 + e);
    } else {
      double e = std::exp(z);
      value = -z + std::log1p(e);
      slope = -1.0 / (1.0 + e);
    }
  } else {
    double gap = std::max(0.0, 1.0 - z);
    value = gap * gap;
    slope = -2.0 * gap;
  }
}

}  // namespace

double BinaryObjective::value(const Eigen::VectorXd& w) const {
  Eigen::VectorXd margins = (features_ * w).cwiseProduct(targets_);
  double total = 0.0, value = 0.0, slope = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    margin_loss(loss_, margins(i), value, slope);
    total += value;
  }
  return total / static_cast<double>(margins.size()) + 0.5 * mu_ * w.squaredNorm();
}

double BinaryObjective::value_and_gradient(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const {
  const auto n = static_cast<double>(features_.rows());
  Eigen::VectorXd margins = (features_ * w).cwiseProduct(targets_);
  Eigen::VectorXd coeff(margins.size());
  double total = 0.0, value = 0.0, slope = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    margin_loss(loss_, margins(i), value, slope);
    total += value;
    coeff(i) = slope * targets_(i) / n;
  }
  grad = features_.transpose() * coeff + mu_ * w;
  return total / n + 0.5 * mu_ * w.squaredNorm();
}

Eigen::VectorXd minimize_lbfgs(const BinaryObjective& objective, double tol, std::size_t max_iter,
                               TrainingLog& log) {
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(objective.dim());
  Eigen::VectorXd g, g_next, w_next;
  double f = objective.value_and_gradient(w, g);
  log = TrainingLog{};
  log.objective_trace.push_back(f);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    if (g.norm() <= tol) {
      log.converged = true;
      break;
    }
    // Two-loop recursion for d = -H g.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      double beta = rho_hist[k] * y_hist[k].dot(q);
      q += s_hist[k] * (alpha[k] - beta);
    }
    Eigen::VectorXd d = -q;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    double step = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    double f_next = f;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      w_next = w + step * d;
      f_next = objective.value_and_gradient(w_next, g_next);
      if (f_next <= f + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable decrease left

    Eigen::VectorXd s = w_next - w;
    Eigen::VectorXd y = g_next - g;
    double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      if (s_hist.size() == kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    w = w_next;
    g = g_next;
    f = f_next;
    log.objective_trace.push_back(f);
  }
  if (!log.converged && g.norm() <= tol) log.converged = true;
  log.iterations = it;
  log.final_objective = f;
  log.final_gradient_norm = g.norm();
  return w;
}

namespace {

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t num_classes) {
  if (labels.size() != rows) throw DimensionMismatch("labels and feature rows differ in count");
  std::vector<bool> seen(num_classes, false);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw std::invalid_argument("label outside [0, num_classes)");
    }
    seen[y] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw std::invalid_argument("training data must contain at least two classes");
  }
}

std::vector<double> one_vs_rest(std::span<const int> labels, int positive) {
  std::vector<double> t(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) t[i] = labels[i] == positive ? 1.0 : -1.0;
  return t;
}

int argmax_row(const RowMatrix& scores, Eigen::Index i) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < scores.cols(); ++c) {
    if (scores(i, c) > scores(i, best)) best = c;
  }
  return static_cast<int>(best);
}

}  // namespace

LinearModel train_linear(const RowMatrix& features, std::span<const int> labels,
                         std::size_t num_classes, const TrainOptions& options) {
  if (features.rows() < 2) throw std::invalid_argument("train_linear needs n >= 2");
  if (!(options.mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!features.allFinite()) throw std::invalid_argument("features contain non-finite values");
  check_labels(labels, static_cast<std::size_t>(features.rows()), num_classes);

  LinearModel model;
  model.num_classes = num_classes;
  model.mu = options.mu;
  model.loss = options.loss;
  const std::size_t problems = num_classes == 2 ? 1 : num_classes;
  for (std::size_t c = 0; c < problems; ++c) {
    const int positive = num_classes == 2 ? 1 : static_cast<int>(c);
    BinaryObjective objective(features, one_vs_rest(labels, positive), options.mu, options.loss);
    TrainingLog log;
    model.weights.push_back(minimize_lbfgs(objective, options.tol, options.max_iter, log));
    model.logs.push_back(std::move(log));
  }
  return model;
}

RowMatrix decision_scores(const LinearModel& model, const RowMatrix& features) {
  if (model.weights.empty()) throw std::invalid_argument("linear model has no weights");
  if (features.cols() != model.weights.front().size()) {
    throw DimensionMismatch("feature width " + std::to_string(features.cols()) +
                            " does not match model width " +
                            std::to_string(model.weights.front().size()));
  }
  RowMatrix scores(features.rows(), static_cast<Eigen::Index>(model.num_classes));
  if (model.num_classes == 2) {
    Eigen::VectorXd s = features * model.weights.front();
    scores.col(0) = -s;
    scores.col(1) = s;
  } else {
    for (std::size_t c = 0; c < model.weights.size(); ++c) {
      scores.col(static_cast<Eigen::Index>(c)) = features * model.weights[c];
    }
  }
  return scores;
}

std::vector<int> predict_linear(const LinearModel& model, const RowMatrix& features) {
  auto scores = decision_scores(model, features);
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) out[i] = argmax_row(scores, i);
  return out;
}

KernelModel train_kernel(const GramMatrix& gram, std::span<const int> labels,
                         std::size_t num_classes, double lambda) {
  const auto n = gram.values.rows();
  if (gram.values.cols() != n) throw DimensionMismatch("Gram matrix is not square");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  check_labels(labels, static_cast<std::size_t>(n), num_classes);

  Eigen::MatrixXd system = gram.values;
  system.diagonal().array() += lambda;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    std::ostringstream ss;
    ss << "K + lambda I is numerically singular (rcond=" << rcond << ", lambda=" << lambda
       << "); try a larger lambda";
    throw SingularSystem(ss.str());
  }
  Eigen::MatrixXd targets(n, static_cast<Eigen::Index>(num_classes));
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto t = one_vs_rest(labels, static_cast<int>(c));
    targets.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  }
  KernelModel model;
  model.alpha = lu.solve(targets);
  model.lambda = lambda;
  model.construction = gram.construction;
  model.num_classes = num_classes;
  if (!model.alpha.allFinite()) throw SingularSystem("kernel solve produced non-finite coefficients");
  return model;
}

std::vector<int> predict_kernel(const KernelModel& model, const RowMatrix& cross_kernel) {
  if (cross_kernel.cols() != model.alpha.rows()) {
    throw DimensionMismatch("cross kernel width does not match the training set");
  }
  RowMatrix scores = cross_kernel * model.alpha;
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) out[i] = argmax_row(scores, i);
  return out;
}

int knn_vote(std::span<const double> distances, std::span<const int> labels, std::size_t k,
             std::size_t num_classes) {
  if (distances.size() != labels.size()) throw DimensionMismatch("knn: distances and labels differ");
  if (k == 0 || k > distances.size()) {
    throw std::invalid_argument("knn: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(distances.size()) + "]");
  }
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return distances[a] < distances[b] || (distances[a] == distances[b] && a < b);
                    });
  std::vector<std::size_t> votes(num_classes, 0);
  for (std::size_t i = 0; i < k; ++i) ++votes.at(static_cast<std::size_t>(labels[order[i]]));
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

int knn_predict(const KnnModel& model, const StructuredObject& x) {
  if (!model.train || model.train->empty()) throw EmptyDataset("knn model has no training data");
  if (x.kind() != model.measure.kind()) {
    throw KindMismatch("knn query is " + std::string(kind_name(x.kind())));
  }
  std::vector<double> distances(model.train->size());
  DistanceWorkspace ws;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    distances[i] = model.measure(x, model.train->objects[i], ws);
  }
  return knn_vote(distances, model.train->labels, model.k, model.train->num_classes);
}

std::string ParamPoint::describe() const {
  std::ostringstream ss;
  ss.precision(17);
  bool first = true;
  auto put = [&](const char* key, auto value, bool present) {
    if (!present) return;
    ss << (first ? "" : " ") << key << '=' << value;
    first = false;
  };
  put("gamma", gamma, gamma != 0.0);
  put("mu", mu, mu != 0.0);
  put("lambda", lambda, lambda != 0.0);
  put("R", R, R != 0);
  put("k", k, k != 0);
  put("rank", rank, rank != 0);
  return ss.str();
}

bool stronger_regularization(const ParamPoint& a, const ParamPoint& b) {
  if (a.mu != b.mu) return a.mu > b.mu;
  if (a.lambda != b.lambda) return a.lambda > b.lambda;
  if (a.gamma != b.gamma) return a.gamma < b.gamma;
  if (a.k != b.k) return a.k > b.k;
  if (a.R != b.R) return a.R < b.R;
  return a.rank < b.rank;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels,
                                                       std::size_t num_classes, std::size_t folds,
                                                       std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class.at(labels[i]).push_back(i);
  std::vector<std::vector<std::size_t>> out(folds);
  Rng rng(seed);
  std::size_t next = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < folds) {
      throw std::invalid_argument("class " + std::to_string(c) + " has " +
                                  std::to_string(members.size()) + " samples, fewer than " +
                                  std::to_string(folds) + " folds");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) out[next++ % folds].push_back(i);
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw DimensionMismatch("accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

CvResult cross_validate(CvLearner& learner, const Dataset& data, std::size_t folds,
                        const std::vector<ParamPoint>& grid, std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("cross-validation grid is empty");
  CvResult result;
  result.validation_folds = stratified_folds(data.labels, data.num_classes, folds, seed);
  result.fold_scores.assign(grid.size(), std::vector<double>(folds, 0.0));

  for (std::size_t f = 0; f < folds; ++f) {
    const auto& validation = result.validation_folds[f];
    std::vector<std::size_t> train;
    std::vector<bool> held(data.size(), false);
    for (auto i : validation) held[i] = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!held[i]) train.push_back(i);
    }
    learner.begin_fold(train, validation);
    std::vector<int> truth;
    for (auto i : validation) truth.push_back(data.labels[i]);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      try {
        auto predicted = learner.predict(grid[g], train, validation);
        result.fold_scores[g][f] = accuracy(predicted, truth);
      } catch (const std::exception& e) {
        result.fold_scores[g][f] = -1.0;
        result.failures.push_back("fold " + std::to_string(f) + " [" + grid[g].describe() +
                                  "]: " + e.what());
      }
    }
  }

  bool any = false;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& scores = result.fold_scores[g];
    const bool failed = std::any_of(scores.begin(), scores.end(), [](double s) { return s < 0; });
    double mean = failed ? -1.0
                         : std::accumulate(scores.begin(), scores.end(), 0.0) /
                               static_cast<double>(folds);
    result.mean_scores.push_back(mean);
    if (failed) continue;
    if (!any) {
      result.best_index = g;
      any = true;
      continue;
    }
    const double incumbent = result.mean_scores[result.best_index];
    if (mean > incumbent + 1e-12 ||
        (std::abs(mean - incumbent) <= 1e-12 &&
         stronger_regularization(grid[g], grid[result.best_index]))) {
      result.best_index = g;
    }
  }
  if (!any) {
    throw Error("every grid point failed during cross-validation" +
                (result.failures.empty() ? std::string() : ": " + result.failures.front()));
  }
  result.best = grid[result.best_index];
  return result;
}

}  // namespace d2ke
