#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "d2ke/distances.hpp"
#include "d2ke/embedding.hpp"
#include "d2ke/objects.hpp"
#include "d2ke/parallel.hpp"

namespace d2ke {

enum class Loss { kSquaredHinge, kLogistic };

std::string_view loss_name(Loss loss);
Loss parse_loss(std::string_view name);

/// (1/n) sum_i loss(t_i * w.x_i) + (mu/2) ||w||^2 with targets t_i in {-1, +1}.
class BinaryObjective {
 public:
  BinaryObjective(const RowMatrix& features, std::vector<double> targets, double mu, Loss loss);

  double value(const Eigen::VectorXd& w) const;
  // Returns the value and writes the gradient.
  double value_and_gradient(const Eigen::VectorXd& w, Eigen::VectorXd& grad) const;
  Eigen::Index dim() const { return features_.cols(); }

 private:
  const RowMatrix& features_;
  Eigen::VectorXd targets_;
  double mu_;
  Loss loss_;
};

struct TrainOptions {
  double mu = 1e-2;
  Loss loss = Loss::kLogistic;
  double tol = 1e-6;        // on the gradient 2-norm
  std::size_t max_iter = 500;
};

struct TrainingLog {
  std::size_t iterations = 0;
  double final_objective = 0.0;
  double final_gradient_norm = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // starts at w = 0
};

/// Deterministic full-batch L-BFGS with Armijo backtracking, so the logged
/// objective never increases.
Eigen::VectorXd minimize_lbfgs(const BinaryObjective& objective, double tol, std::size_t max_iter,
                               TrainingLog& log);

/// One-vs-rest linear model. Binary problems keep a single weight vector
/// scoring class 1 against class 0.
struct LinearModel {
  std::vector<Eigen::VectorXd> weights;
  std::size_t num_classes = 0;
  double mu = 0.0;
  Loss loss = Loss::kLogistic;
  std::vector<TrainingLog> logs;
};

LinearModel train_linear(const RowMatrix& features, std::span<const int> labels,
                         std::size_t num_classes, const TrainOptions& options);

/// n x num_classes score matrix.
RowMatrix decision_scores(const LinearModel& model, const RowMatrix& features);
/// Argmax of the class scores; ties go to the lowest class index.
std::vector<int> predict_linear(const LinearModel& model, const RowMatrix& features);

/// Kernel ridge classification on a precomputed Gram: (K + lambda I) alpha = Y
/// with one-vs-rest +/-1 targets, one column per class.
struct KernelModel {
  RowMatrix alpha;  // n_train x num_classes
  double lambda = 0.0;
  GramConstruction construction = GramConstruction::kD2keRf;
  std::size_t num_classes = 0;
};

KernelModel train_kernel(const GramMatrix& gram, std::span<const int> labels,
                         std::size_t num_classes, double lambda);
/// `cross_kernel` is (n_query x n_train).
std::vector<int> predict_kernel(const KernelModel& model, const RowMatrix& cross_kernel);

struct KnnModel {
  std::shared_ptr<const Dataset> train;
  std::size_t k = 1;
  DistanceMeasure measure{MeasureTag::kEdit};
};

/// Majority vote among the k smallest distances; distance ties go to the
/// lower training index, vote ties to the lower class index.
int knn_vote(std::span<const double> distances, std::span<const int> labels, std::size_t k,
             std::size_t num_classes);
int knn_predict(const KnnModel& model, const StructuredObject& x);

/// One hyper-parameter combination. Unused fields stay zero.
struct ParamPoint {
  double gamma = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  std::size_t R = 0;
  std::size_t k = 0;
  std::size_t rank = 0;

  std::string describe() const;
  bool operator==(const ParamPoint&) const = default;
};

/// True if `a` regularizes more strongly than `b`: larger mu, then larger
/// lambda, smaller gamma, larger k, smaller R, smaller rank.
bool stronger_regularization(const ParamPoint& a, const ParamPoint& b);

/// Learner as seen by cross-validation. Indices refer to the dataset passed
/// to cross_validate.
class CvLearner {
 public:
  virtual ~CvLearner() = default;
  virtual void begin_fold(std::span<const std::size_t> /*train*/,
                          std::span<const std::size_t> /*validation*/) {}
  virtual std::vector<int> predict(const ParamPoint& params, std::span<const std::size_t> train,
                                   std::span<const std::size_t> validation) = 0;
};

struct CvResult {
  ParamPoint best;
  std::size_t best_index = 0;
  std::vector<std::vector<double>> fold_scores;  // [grid point][fold], accuracy in [0,1]; -1 on failure
  std::vector<double> mean_scores;
  std::vector<std::vector<std::size_t>> validation_folds;
  std::vector<std::string> failures;
};

/// Each class is shuffled and dealt round-robin over the folds. Throws when a
/// class has fewer samples than folds.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels,
                                                       std::size_t num_classes, std::size_t folds,
                                                       std::uint64_t seed);

/// Exhaustive grid search. Best is the highest mean fold accuracy, ties broken
/// by stronger_regularization and then grid order.
CvResult cross_validate(CvLearner& learner, const Dataset& data, std::size_t folds,
                        const std::vector<ParamPoint>& grid, std::uint64_t seed);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace d2ke
