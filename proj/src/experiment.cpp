#include "d2ke/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "d2ke/errors.hpp"
#include "d2ke/io.hpp"
#include "d2ke/parallel.hpp"
#include "d2ke/rng.hpp"

namespace d2ke {

// ---------------------------------------------------------------- config

namespace {

std::string trim_copy(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    auto item = trim_copy(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(item);
    pos = comma + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
}

std::size_t to_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a non-negative integer");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::vector<std::size_t> sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(v)) out.push_back(to_size(key, item));
  return out;
}

std::pair<std::size_t, std::size_t> range(const std::string& key, const std::string& v) {
  auto items = sizes(key, v);
  if (items.size() != 2) throw ConfigError("key '" + key + "' expects 'min,max'");
  return {items[0], items[1]};
}

std::vector<double> log_grid(int lo_exp, int hi_exp) {
  std::vector<double> out;
  for (int e = lo_exp; e <= hi_exp; ++e) out.push_back(std::pow(10.0, e));
  return out;
}

std::vector<std::size_t> doubling(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out;
  for (std::size_t v = lo; v <= hi; v *= 2) out.push_back(v);
  return out;
}

EigenTreatment parse_treatment(const std::string& v) {
  if (v == "clip") return EigenTreatment::kClip;
  if (v == "flip") return EigenTreatment::kFlip;
  if (v == "keep-signed") return EigenTreatment::kKeepSigned;
  throw ConfigError("led_eigen must be clip, flip or keep-signed");
}

const char* treatment_name(EigenTreatment t) {
  switch (t) {
    case EigenTreatment::kClip:
      return "clip";
    case EigenTreatment::kFlip:
      return "flip";
    case EigenTreatment::kKeepSigned:
      return "keep-signed";
  }
  return "clip";
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream ss;
  ss.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) ss << (i ? "," : "") << values[i];
  return ss.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::with_defaults() {
  ExperimentConfig c;
  c.gamma_grid = log_grid(-5, 3);
  c.mu_grid = log_grid(-8, 2);
  c.lambda_grid = log_grid(-4, 2);
  c.R_grid = doubling(4, 4096);
  c.k_grid = {1, 3, 5, 7, 9};
  c.rank_grid = doubling(4, 512);
  return c;
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw ConfigError("config needs 'dataset'");
  if (methods.empty()) throw ConfigError("config needs a non-empty 'methods' list");
  for (const auto& m : methods) {
    if (std::find(kAllMethods.begin(), kAllMethods.end(), m) == kAllMethods.end()) {
      throw ConfigError("unknown method '" + m + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("config needs 'seed' (no implicit entropy)");
  auto nonempty = [](const auto& grid, const char* name) {
    if (grid.empty()) throw ConfigError(std::string("grid '") + name + "' is empty");
  };
  nonempty(gamma_grid, "gamma_grid");
  nonempty(mu_grid, "mu_grid");
  nonempty(lambda_grid, "lambda_grid");
  nonempty(R_grid, "R_grid");
  nonempty(k_grid, "k_grid");
  nonempty(rank_grid, "rank_grid");
  for (double g : gamma_grid) {
    if (!(g > 0.0)) throw ConfigError("gamma_grid values must be positive");
  }
  for (double m : mu_grid) {
    if (!(m > 0.0)) throw ConfigError("mu_grid values must be positive");
  }
  for (double l : lambda_grid) {
    if (!(l > 0.0)) throw ConfigError("lambda_grid values must be positive");
  }
  for (auto r : R_grid) {
    if (r == 0) throw ConfigError("R_grid values must be positive");
  }
  for (auto k : k_grid) {
    if (k == 0) throw ConfigError("k_grid values must be positive");
  }
  for (auto r : rank_grid) {
    if (r == 0) throw ConfigError("rank_grid values must be positive");
  }
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  if (output_format != "tsv" && output_format != "json") {
    throw ConfigError("output_format must be tsv or json");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c = ExperimentConfig::with_defaults();
  std::size_t line_no = 0, pos = 0;
  std::set<std::string> seen;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = trim_copy(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto key = trim_copy(std::string_view(line).substr(0, eq));
    auto value = trim_copy(std::string_view(line).substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    if (key == "dataset") c.dataset = value;
    else if (key == "format") c.format = value;
    else if (key == "test_dataset") c.test_dataset = value;
    else if (key == "n") c.synthetic_n = to_size(key, value);
    else if (key == "train_fraction") c.train_fraction = to_double(key, value);
    else if (key == "measure") c.measure = value;
    else if (key == "methods") c.methods = split_list(value);
    else if (key == "gamma_grid") c.gamma_grid = doubles(key, value);
    else if (key == "mu_grid") c.mu_grid = doubles(key, value);
    else if (key == "lambda_grid") c.lambda_grid = doubles(key, value);
    else if (key == "R_grid") c.R_grid = sizes(key, value);
    else if (key == "k_grid") c.k_grid = sizes(key, value);
    else if (key == "rank_grid") c.rank_grid = sizes(key, value);
    else if (key == "loss") c.loss = parse_loss(value);
    else if (key == "folds") c.folds = to_size(key, value);
    else if (key == "seed") {
      c.seeds.clear();
      for (auto s : sizes(key, value)) c.seeds.push_back(s);
    }
    else if (key == "output") c.output = value;
    else if (key == "output_format") c.output_format = value;
    else if (key == "transductive_led") c.transductive_led = to_bool(key, value);
    else if (key == "led_eigen") c.led_treatment = parse_treatment(value);
    else if (key == "standardize") c.standardize = to_bool(key, value);
    else if (key == "tol") c.tol = to_double(key, value);
    else if (key == "max_iter") c.max_iter = to_size(key, value);
    else if (key == "omega_ts_length") c.omega_ts_length = range(key, value);
    else if (key == "omega_element_std") c.omega_element_std = to_double(key, value);
    else if (key == "omega_str_length") c.omega_str_length = range(key, value);
    else if (key == "omega_vset_size") c.omega_vset_size = range(key, value);
    else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::vector<std::size_t> LeakageAudit::violations(const std::vector<std::size_t>& forbidden) const {
  std::vector<std::size_t> out;
  for (auto id : forbidden) {
    if (touched_.count(id)) out.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------- data

OmegaDistribution d2ke_distribution(const ExperimentConfig& config, const Dataset& train) {
  auto dist = OmegaDistribution::synthetic_default(train);
  auto spec = dist.spec();
  if (auto* t = std::get_if<RandomTimeSeriesSpec>(&spec)) {
    if (config.omega_ts_length) std::tie(t->length_min, t->length_max) = *config.omega_ts_length;
    if (config.omega_element_std) t->element_std = *config.omega_element_std;
  } else if (auto* s = std::get_if<RandomStringSpec>(&spec)) {
    if (config.omega_str_length) std::tie(s->length_min, s->length_max) = *config.omega_str_length;
  } else if (auto* v = std::get_if<RandomVectorSetSpec>(&spec)) {
    if (config.omega_vset_size) std::tie(v->size_min, v->size_max) = *config.omega_vset_size;
  }
  OmegaDistribution out(spec);
  out.validate();
  return out;
}

namespace {

// Re-express `test` labels in `train`'s class indices.
void align_labels(const Dataset& train, Dataset& test) {
  std::vector<int> remapped;
  for (int y : test.labels) {
    auto original = test.meta.label_values.at(static_cast<std::size_t>(y));
    auto it = std::find(train.meta.label_values.begin(), train.meta.label_values.end(), original);
    if (it == train.meta.label_values.end()) {
      throw Error("test label " + std::to_string(original) + " does not occur in training data");
    }
    remapped.push_back(static_cast<int>(it - train.meta.label_values.begin()));
  }
  test.labels = std::move(remapped);
  test.num_classes = train.num_classes;
  test.meta.label_values = train.meta.label_values;
  // Keep ids disjoint from the training ids.
  for (auto& id : test.ids) id += train.size();
}

Dataset load_for_config(const ExperimentConfig& config, const std::string& path) {
  if (!config.format.empty()) {
    auto format = parse_format(config.format);
    return load_dataset(path, kind_for_format(format), format);
  }
  return load_dataset(path);
}

}  // namespace

std::pair<Dataset, Dataset> prepare_data(const ExperimentConfig& config, std::uint64_t seed) {
  Dataset train, test;
  constexpr std::string_view kSynthetic = "synthetic:";
  if (config.dataset.rfind(kSynthetic, 0) == 0) {
    auto data = gen_synthetic(config.dataset.substr(kSynthetic.size()), config.synthetic_n, seed);
    std::tie(train, test) = split_dataset(data, config.train_fraction, derive_seed(seed, "split"));
  } else if (!config.test_dataset.empty()) {
    train = load_for_config(config, config.dataset);
    test = load_for_config(config, config.test_dataset);
    if (test.kind != train.kind) throw KindMismatch("train and test files hold different kinds");
    align_labels(train, test);
    train.split = SplitTag::kTrain;
    test.split = SplitTag::kTest;
  } else {
    auto data = load_for_config(config, config.dataset);
    std::tie(train, test) = split_dataset(data, config.train_fraction, derive_seed(seed, "split"));
  }
  if (train.kind == ObjectKind::kTimeSeries && config.standardize) {
    auto scaler = SeriesScaler::fit(train);
    train = scaler.apply(train);
    test = scaler.apply(test);
  }
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------- methods

namespace {

RowMatrix select(const RowMatrix& m, std::span<const std::size_t> rows,
                 std::span<const std::size_t> cols) {
  RowMatrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

std::vector<int> labels_at(const Dataset& data, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(data.labels[i]);
  return out;
}

TrainOptions train_options(const ExperimentConfig& config, double mu) {
  TrainOptions o;
  o.mu = mu;
  o.loss = config.loss;
  o.tol = config.tol;
  o.max_iter = config.max_iter;
  return o;
}

// Random-feature pipeline shared by d2ke and rsm. Synthetic omegas are
// drawn once; holdout omegas are drawn per fold from the fold's training
// part so no validation object ever serves as an omega.
class RandomFeatureLearner : public CvLearner {
 public:
  RandomFeatureLearner(const Dataset& train, const RowMatrix& distances, bool holdout,
                       std::size_t R_max, std::uint64_t omega_seed, const ExperimentConfig& config,
                       LeakageAudit& audit)
      : train_(train), distances_(distances), holdout_(holdout), R_max_(R_max),
        omega_seed_(omega_seed), config_(config), audit_(audit) {}

  void begin_fold(std::span<const std::size_t> train, std::span<const std::size_t> validation) override {
    for (auto i : train) audit_.touch(train_.ids[i]);
    for (auto i : validation) audit_.touch(train_.ids[i]);
    columns_.clear();
    if (holdout_) {
      auto picks = holdout_indices(train.size(), std::min(R_max_, train.size()), true, omega_seed_);
      for (auto p : picks) columns_.push_back(train[p]);
    } else {
      columns_ = iota_n(R_max_);
    }
  }

  std::vector<int> predict(const ParamPoint& p, std::span<const std::size_t> train,
                           std::span<const std::size_t> validation) override {
    const std::size_t R = std::min(p.R, columns_.size());
    std::span<const std::size_t> cols(columns_.data(), R);
    auto f_train = features_from_distances(select(distances_, train, cols), p.gamma);
    auto f_val = features_from_distances(select(distances_, validation, cols), p.gamma);
    auto model = train_linear(f_train, labels_at(train_, train), train_.num_classes,
                              train_options(config_, p.mu));
    return predict_linear(model, f_val);
  }

 private:
  const Dataset& train_;
  const RowMatrix& distances_;
  bool holdout_;
  std::size_t R_max_;
  std::uint64_t omega_seed_;
  const ExperimentConfig& config_;
  LeakageAudit& audit_;
  std::vector<std::size_t> columns_;
};

class KnnLearner : public CvLearner {
 public:
  KnnLearner(const Dataset& train, const RowMatrix& pairwise, LeakageAudit& audit)
      : train_(train), pairwise_(pairwise), audit_(audit) {}

  std::vector<int> predict(const ParamPoint& p, std::span<const std::size_t> train,
                           std::span<const std::size_t> validation) override {
    auto labels = labels_at(train_, train);
    std::vector<int> out;
    std::vector<double> row(train.size());
    for (auto v : validation) {
      audit_.touch(train_.ids[v]);
      for (std::size_t j = 0; j < train.size(); ++j) {
        row[j] = pairwise_(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(train[j]));
      }
      out.push_back(knn_vote(row, labels, p.k, train_.num_classes));
    }
    return out;
  }

 private:
  const Dataset& train_;
  const RowMatrix& pairwise_;
  LeakageAudit& audit_;
};

class DskLearner : public CvLearner {
 public:
  DskLearner(const Dataset& train, const RowMatrix& pairwise, DskKind kind, LeakageAudit& audit)
      : train_(train), pairwise_(pairwise), kind_(kind), audit_(audit) {}

  std::vector<int> predict(const ParamPoint& p, std::span<const std::size_t> train,
                           std::span<const std::size_t> validation) override {
    for (auto v : validation) audit_.touch(train_.ids[v]);
    auto gram = dsk_kernel(kind_, p.gamma, select(pairwise_, train, train));
    auto model = train_kernel(gram, labels_at(train_, train), train_.num_classes, p.lambda);
    return predict_kernel(model, dsk_cross_kernel(kind_, p.gamma, select(pairwise_, validation, train)));
  }

 private:
  const Dataset& train_;
  const RowMatrix& pairwise_;
  DskKind kind_;
  LeakageAudit& audit_;
};

// Coordinates are divided by the largest training row norm so the linear
// learner sees features on the same scale as the random features.
double coordinate_scale(const RowMatrix& coords) {
  double largest = coords.rowwise().norm().maxCoeff();
  return largest > 0.0 ? 1.0 / largest : 1.0;
}

class LedLearner : public CvLearner {
 public:
  LedLearner(const Dataset& train, const RowMatrix& pairwise, std::size_t max_rank,
             const ExperimentConfig& config, LeakageAudit& audit)
      : train_(train), pairwise_(pairwise), max_rank_(max_rank), config_(config), audit_(audit) {}

  void begin_fold(std::span<const std::size_t> train, std::span<const std::size_t> validation) override {
    for (auto v : validation) audit_.touch(train_.ids[v]);
    auto pe = pseudo_euclidean_embed(select(pairwise_, train, train),
                                     std::min(max_rank_, train.size()), config_.led_treatment);
    train_coords_ = pe.coordinates;
    val_coords_ = project_pseudo_euclidean(pe, select(pairwise_, validation, train));
  }

  std::vector<int> predict(const ParamPoint& p, std::span<const std::size_t> train,
                           std::span<const std::size_t>) override {
    const auto r = static_cast<Eigen::Index>(std::min<std::size_t>(p.rank, train_coords_.cols()));
    RowMatrix tr = train_coords_.leftCols(r);
    RowMatrix va = val_coords_.leftCols(r);
    const double scale = coordinate_scale(tr);
    tr *= scale;
    va *= scale;
    auto model = train_linear(tr, labels_at(train_, train), train_.num_classes,
                              train_options(config_, p.mu));
    return predict_linear(model, va);
  }

 private:
  const Dataset& train_;
  const RowMatrix& pairwise_;
  std::size_t max_rank_;
  const ExperimentConfig& config_;
  LeakageAudit& audit_;
  RowMatrix train_coords_, val_coords_;
};

std::string fmt(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void record_params(ResultRow& row, const ParamPoint& p) {
  if (p.gamma != 0.0) row.hyperparameters["gamma"] = fmt(p.gamma);
  if (p.mu != 0.0) row.hyperparameters["mu"] = fmt(p.mu);
  if (p.lambda != 0.0) row.hyperparameters["lambda"] = fmt(p.lambda);
  if (p.R != 0) row.hyperparameters["R"] = std::to_string(p.R);
  if (p.k != 0) row.hyperparameters["k"] = std::to_string(p.k);
  if (p.rank != 0) row.hyperparameters["rank"] = std::to_string(p.rank);
}

std::size_t smallest_fold_train(const Dataset& train, const ExperimentConfig& config,
                                std::uint64_t cv_seed) {
  auto folds = stratified_folds(train.labels, train.num_classes, config.folds, cv_seed);
  std::size_t largest = 0;
  for (const auto& f : folds) largest = std::max(largest, f.size());
  return train.size() - largest;
}

template <typename T>
std::vector<T> capped_unique(const std::vector<T>& values, T cap) {
  std::vector<T> out;
  for (auto v : values) {
    auto c = std::min(v, cap);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

}  // namespace

ResultRow run_method(const std::string& method, const Dataset& train, const Dataset& test,
                     const DistanceMeasure& measure, const ExperimentConfig& config,
                     std::uint64_t seed, MethodTrace* trace) {
  ResultRow row;
  row.method = method;
  row.seed = seed;
  MethodTrace local;
  MethodTrace& tr = trace ? *trace : local;
  const std::uint64_t cv_seed = derive_seed(seed, "cv");
  const std::uint64_t method_seed = derive_seed(seed, method.c_str());

  auto& prov = row.provenance;
  prov["dataset"] = config.dataset;
  prov["measure"] = std::string(measure.name());
  prov["folds"] = std::to_string(config.folds);
  prov["cv_seed"] = std::to_string(cv_seed);
  prov["method_seed"] = std::to_string(method_seed);
  prov["n_train"] = std::to_string(train.size());
  prov["n_test"] = std::to_string(test.size());
  prov["selection"] = "cross-validation on train split";

  const auto start = std::chrono::steady_clock::now();
  try {
    std::vector<ParamPoint> grid;
    tr.audit.touch_all(train.ids);

    if (method == "d2ke" || method == "rsm") {
      const bool holdout = method == "rsm";
      const std::size_t cap = holdout ? smallest_fold_train(train, config, cv_seed)
                                      : std::numeric_limits<std::size_t>::max();
      auto R_values = capped_unique(config.R_grid, cap);
      const std::size_t R_max = *std::max_element(R_values.begin(), R_values.end());
      for (auto R : R_values) {
        for (double g : config.gamma_grid) {
          for (double mu : config.mu_grid) grid.push_back({g, mu, 0.0, R, 0, 0});
        }
      }
      const std::uint64_t omega_seed = derive_seed(method_seed, "omega");
      RowMatrix distances;
      if (holdout) {
        distances = pairwise_distances(train.objects, measure);
      } else {
        auto sample = sample_omegas(d2ke_distribution(config, train), R_max, omega_seed);
        distances = distance_matrix(train.objects, sample.objects, measure);
      }
      RandomFeatureLearner learner(train, distances, holdout, R_max, omega_seed, config, tr.audit);
      tr.cv = cross_validate(learner, train, config.folds, grid, cv_seed);
      const auto& best = tr.cv.best;

      auto source = std::make_shared<const Dataset>(train);
      OmegaDistribution dist = holdout ? OmegaDistribution(DataHoldoutSpec{source, true})
                                       : d2ke_distribution(config, train);
      EmbeddingModel model(sample_omegas(dist, best.R, omega_seed), best.gamma, measure);
      tr.train_features = embed_dataset(model, train);
      tr.test_features = embed_dataset(model, test);
      auto linear = train_linear(tr.train_features, train.labels, train.num_classes,
                                 train_options(config, best.mu));
      tr.test_predictions = predict_linear(linear, tr.test_features);
      row.R = model.R();
      prov["pipeline"] = "sample_omegas>embed_dataset>train_linear>predict_linear";
      prov["distribution"] = dist.describe();
      prov["omega_seed"] = std::to_string(omega_seed);
      prov["loss"] = std::string(loss_name(config.loss));
      prov["R_grid"] = join(R_values);
      prov["gamma_grid"] = join(config.gamma_grid);
      prov["mu_grid"] = join(config.mu_grid);
      prov["converged"] = linear.logs.front().converged ? "1" : "0";
      tr.omegas = model.omegas();
    } else {
      auto pairwise = pairwise_distances(train.objects, measure);
      const std::size_t cap = smallest_fold_train(train, config, cv_seed);
      if (method == "knn") {
        for (auto k : capped_unique(config.k_grid, cap)) grid.push_back({0, 0, 0, 0, k, 0});
        KnnLearner learner(train, pairwise, tr.audit);
        tr.cv = cross_validate(learner, train, config.folds, grid, cv_seed);
        auto cross = distance_matrix(test.objects, train.objects, measure);
        for (Eigen::Index i = 0; i < cross.rows(); ++i) {
          std::vector<double> d(cross.row(i).data(), cross.row(i).data() + cross.cols());
          tr.test_predictions.push_back(knn_vote(d, train.labels, tr.cv.best.k, train.num_classes));
        }
        prov["k_grid"] = join(config.k_grid);
      } else if (method == "dsk-rbf" || method == "dsk-nd") {
        const auto kind = method == "dsk-rbf" ? DskKind::kRbf : DskKind::kNegativeDistance;
        for (double lambda : config.lambda_grid) {
          if (kind == DskKind::kRbf) {
            for (double g : config.gamma_grid) grid.push_back({g, 0, lambda, 0, 0, 0});
          } else {
            grid.push_back({0, 0, lambda, 0, 0, 0});
          }
        }
        DskLearner learner(train, pairwise, kind, tr.audit);
        tr.cv = cross_validate(learner, train, config.folds, grid, cv_seed);
        auto gram = dsk_kernel(kind, tr.cv.best.gamma, pairwise);
        auto model = train_kernel(gram, train.labels, train.num_classes, tr.cv.best.lambda);
        auto cross = distance_matrix(test.objects, train.objects, measure);
        tr.test_predictions = predict_kernel(model, dsk_cross_kernel(kind, tr.cv.best.gamma, cross));
        prov["lambda_grid"] = join(config.lambda_grid);
        if (kind == DskKind::kRbf) prov["gamma_grid"] = join(config.gamma_grid);
      } else if (method == "gdk-led") {
        auto ranks = capped_unique(config.rank_grid, cap);
        for (auto r : ranks) {
          for (double mu : config.mu_grid) grid.push_back({0, mu, 0, 0, 0, r});
        }
        const std::size_t max_rank = *std::max_element(ranks.begin(), ranks.end());
        LedLearner learner(train, pairwise, max_rank, config, tr.audit);
        tr.cv = cross_validate(learner, train, config.folds, grid, cv_seed);
        const auto& best = tr.cv.best;
        auto cross = distance_matrix(test.objects, train.objects, measure);
        RowMatrix train_coords, test_coords;
        if (config.transductive_led) {
          // Joint embedding of train and test, as the baseline admits doing.
          const auto n = static_cast<Eigen::Index>(train.size());
          const auto m = static_cast<Eigen::Index>(test.size());
          RowMatrix joint(n + m, n + m);
          joint.topLeftCorner(n, n) = pairwise;
          joint.bottomLeftCorner(m, n) = cross;
          joint.topRightCorner(n, m) = cross.transpose();
          joint.bottomRightCorner(m, m) = pairwise_distances(test.objects, measure);
          auto pe = pseudo_euclidean_embed(joint, std::min<std::size_t>(best.rank, n + m),
                                           config.led_treatment);
          train_coords = pe.coordinates.topRows(n);
          test_coords = pe.coordinates.bottomRows(m);
        } else {
          auto pe = pseudo_euclidean_embed(pairwise, std::min(best.rank, train.size()),
                                           config.led_treatment);
          train_coords = pe.coordinates;
          test_coords = project_pseudo_euclidean(pe, cross);
        }
        const double scale = coordinate_scale(train_coords);
        tr.train_features = train_coords * scale;
        tr.test_features = test_coords * scale;
        auto linear = train_linear(tr.train_features, train.labels, train.num_classes,
                                   train_options(config, best.mu));
        tr.test_predictions = predict_linear(linear, tr.test_features);
        prov["rank_grid"] = join(ranks);
        prov["mu_grid"] = join(config.mu_grid);
        prov["eigen_treatment"] = treatment_name(config.led_treatment);
        prov["transductive"] = config.transductive_led ? "1" : "0";
      } else {
        throw ConfigError("unknown method '" + method + "'");
      }
    }

    std::vector<std::size_t> test_ids(test.ids.begin(), test.ids.end());
    auto leaks = tr.audit.violations(test_ids);
    if (!leaks.empty()) {
      throw Error("leakage audit: " + std::to_string(leaks.size()) +
                  " test objects touched during model selection");
    }
    prov["leakage_audit"] = "pass";
    record_params(row, tr.cv.best);
    row.cv_score = 100.0 * tr.cv.mean_scores[tr.cv.best_index];
    row.accuracy = 100.0 * accuracy(tr.test_predictions, test.labels);
  } catch (const std::exception& e) {
    row.status = "failed";
    row.message = e.what();
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  ResultTable table;
  table.environment["version"] = std::string(kVersion);
  table.environment["threads"] = std::to_string(max_threads());
  table.environment["seeds"] = join(config.seeds);
  table.environment["split"] = "stratified by label";
  table.environment["dtw_normalization"] = "none";
  table.environment["R_selection"] = "cross-validation, not test accuracy";

  std::map<std::string, std::vector<const ResultRow*>> by_method;
  for (auto seed : config.seeds) {
    auto [train, test] = prepare_data(config, seed);
    auto measure = config.measure.empty() ? DistanceMeasure::for_kind(train.kind)
                                          : DistanceMeasure::from_name(config.measure);
    if (measure.kind() != train.kind) {
      throw ConfigError("measure '" + std::string(measure.name()) + "' cannot compare " +
                        std::string(kind_name(train.kind)) + " objects");
    }
    for (const auto& method : config.methods) {
      table.rows.push_back(run_method(method, train, test, measure, config, seed));
    }
  }
  if (config.seeds.size() > 1) {
    for (const auto& method : config.methods) {
      ResultRow mean;
      mean.method = method;
      mean.provenance["row"] = "mean over seeds " + join(config.seeds);
      std::size_t ok = 0;
      for (const auto& r : table.rows) {
        if (r.method != method || r.status != "ok") continue;
        mean.accuracy += r.accuracy;
        mean.seconds += r.seconds;
        mean.cv_score += r.cv_score;
        ++ok;
      }
      if (ok == 0) {
        mean.status = "failed";
        mean.message = "no successful seeds";
      } else {
        mean.accuracy /= static_cast<double>(ok);
        mean.seconds /= static_cast<double>(ok);
        mean.cv_score /= static_cast<double>(ok);
      }
      table.rows.push_back(mean);
    }
  }
  if (!config.output.empty()) {
    emit_results(table, config.output, parse_result_format(config.output_format));
  }
  return table;
}

// ---------------------------------------------------------------- results

ResultFormat parse_result_format(std::string_view name) {
  if (name == "tsv") return ResultFormat::kTsv;
  if (name == "json") return ResultFormat::kJson;
  throw ConfigError("unknown result format '" + std::string(name) + "'");
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ';': out += "\\s"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    char c = s[++i];
    out += c == 's' ? ';' : c == 't' ? '\t' : c == 'n' ? '\n' : c;
  }
  return out;
}

std::string encode_map(const std::map<std::string, std::string>& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    if (!out.empty()) out += ';';
    out += escape(k) + '=' + escape(v);
  }
  return out;
}

// Splits on unescaped ';'.
std::map<std::string, std::string> decode_map(std::string_view s) {
  std::map<std::string, std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] == '\\') {
      ++i;
      continue;
    }
    if (i == s.size() || s[i] == ';') {
      auto item = s.substr(start, i - start);
      if (!item.empty()) {
        auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ParseError(0, "map entry without '='");
        out[unescape(item.substr(0, eq))] = unescape(item.substr(eq + 1));
      }
      start = i + 1;
    }
  }
  return out;
}

constexpr std::string_view kColumns =
    "method\tseed\tstatus\taccuracy\tseconds\tR\tcv_score\thyperparameters\tprovenance\tmessage";

}  // namespace

std::string format_results(const ResultTable& table, ResultFormat format) {
  if (format == ResultFormat::kJson) {
    nlohmann::json j;
    j["version"] = std::string(kVersion);
    j["environment"] = table.environment;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : table.rows) {
      j["rows"].push_back({{"method", r.method},
                           {"seed", r.seed},
                           {"status", r.status},
                           {"message", r.message},
                           {"accuracy", r.accuracy},
                           {"seconds", r.seconds},
                           {"R", r.R},
                           {"cv_score", r.cv_score},
                           {"hyperparameters", r.hyperparameters},
                           {"provenance", r.provenance}});
    }
    return j.dump(2) + "\n";
  }
  std::string out = "#d2ke-results version=" + std::string(kVersion) + "\n";
  for (const auto& [k, v] : table.environment) out += "#env " + escape(k) + "=" + escape(v) + "\n";
  out += kColumns;
  out += '\n';
  for (const auto& r : table.rows) {
    out += escape(r.method) + '\t' + std::to_string(r.seed) + '\t' + escape(r.status) + '\t' +
           fmt(r.accuracy) + '\t' + fmt(r.seconds) + '\t' + std::to_string(r.R) + '\t' +
           fmt(r.cv_score) + '\t' + encode_map(r.hyperparameters) + '\t' +
           encode_map(r.provenance) + '\t' + escape(r.message) + '\n';
  }
  return out;
}

ResultTable parse_results(std::string_view text, ResultFormat format) {
  ResultTable table;
  if (format == ResultFormat::kJson) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(0, std::string("invalid results json: ") + e.what());
    }
    table.environment = j.at("environment").get<std::map<std::string, std::string>>();
    for (const auto& r : j.at("rows")) {
      ResultRow row;
      row.method = r.at("method").get<std::string>();
      row.seed = r.at("seed").get<std::uint64_t>();
      row.status = r.at("status").get<std::string>();
      row.message = r.at("message").get<std::string>();
      row.accuracy = r.at("accuracy").get<double>();
      row.seconds = r.at("seconds").get<double>();
      row.R = r.at("R").get<std::size_t>();
      row.cv_score = r.at("cv_score").get<double>();
      row.hyperparameters = r.at("hyperparameters").get<std::map<std::string, std::string>>();
      row.provenance = r.at("provenance").get<std::map<std::string, std::string>>();
      table.rows.push_back(std::move(row));
    }
    return table;
  }
  std::size_t pos = 0, line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("#env ", 0) == 0) {
      auto kv = line.substr(5);
      auto eq = kv.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, "env line without '='");
      table.environment[unescape(kv.substr(0, eq))] = unescape(kv.substr(eq + 1));
      continue;
    }
    if (line.front() == '#') continue;
    if (!header_seen) {
      if (line != kColumns) throw ParseError(line_no, "unexpected column header");
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        cells.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cells.size() != 10) throw ParseError(line_no, "expected 10 columns");
    ResultRow row;
    row.method = unescape(cells[0]);
    row.seed = std::stoull(std::string(cells[1]));
    row.status = unescape(cells[2]);
    row.accuracy = std::strtod(std::string(cells[3]).c_str(), nullptr);
    row.seconds = std::strtod(std::string(cells[4]).c_str(), nullptr);
    row.R = std::stoull(std::string(cells[5]));
    row.cv_score = std::strtod(std::string(cells[6]).c_str(), nullptr);
    row.hyperparameters = decode_map(cells[7]);
    row.provenance = decode_map(cells[8]);
    row.message = unescape(cells[9]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void emit_results(const ResultTable& table, const std::string& path, ResultFormat format) {
  for (const auto& r : table.rows) {
    if (r.status == "ok" && !(r.accuracy >= 0.0 && r.accuracy <= 100.0)) {
      throw std::invalid_argument("result accuracy outside [0, 100]");
    }
  }
  write_file(path, format_results(table, format));
}

// ---------------------------------------------------------------- timing

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs >= 2 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::max(y[i], 1e-12)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

ScalingReport timing_scaling_report(const DistanceMeasure& measure, const OmegaDistribution& dist,
                                    std::span<const StructuredObject> pool,
                                    std::span<const std::size_t> n_list,
                                    std::span<const std::size_t> R_list, std::uint64_t seed,
                                    std::size_t repeats) {
  if (n_list.size() < 3 || R_list.size() < 3) {
    throw std::invalid_argument("timing sweeps need at least 3 points per axis");
  }
  if (!std::is_sorted(n_list.begin(), n_list.end()) || !std::is_sorted(R_list.begin(), R_list.end())) {
    throw std::invalid_argument("timing sweeps must be ascending");
  }
  const std::size_t n_max = n_list.back(), R_max = R_list.back();
  if (pool.size() < n_max) throw std::invalid_argument("object pool smaller than max(n_list)");
  auto omegas = sample_omegas(dist, R_max, seed);

  auto time_once = [&](std::size_t n, std::size_t R) {
    OmegaSample prefix = omegas;
    prefix.objects.erase(prefix.objects.begin() + static_cast<std::ptrdiff_t>(R), prefix.objects.end());
    EmbeddingModel model(std::move(prefix), 1.0, measure);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t rep = 0; rep < std::max<std::size_t>(1, repeats); ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      auto f = embed_dataset(model, pool.subspan(0, n));
      auto t1 = std::chrono::steady_clock::now();
      if (f.rows() != static_cast<Eigen::Index>(n)) throw std::logic_error("embedding shape");
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };

  ScalingReport report;
  report.threads = max_threads();
  // One untimed pass warms caches and the thread pool.
  time_once(n_list.front(), R_list.front());
  std::vector<double> xs, ys;
  for (auto n : n_list) {
    report.n_sweep.push_back({n, R_max, time_once(n, R_max)});
    xs.push_back(static_cast<double>(n));
    ys.push_back(report.n_sweep.back().seconds);
  }
  report.n_slope = loglog_slope(xs, ys);
  report.degenerate = n_list.front() == n_list.back();
  xs.clear();
  ys.clear();
  for (auto R : R_list) {
    report.R_sweep.push_back({n_max, R, time_once(n_max, R)});
    xs.push_back(static_cast<double>(R));
    ys.push_back(report.R_sweep.back().seconds);
  }
  report.R_slope = loglog_slope(xs, ys);
  report.degenerate = report.degenerate || R_list.front() == R_list.back();
  return report;
}

ScalingReport timing_scaling_report(const DistanceMeasure& measure, const OmegaDistribution& dist,
                                    std::span<const std::size_t> n_list,
                                    std::span<const std::size_t> R_list, std::uint64_t seed) {
  if (n_list.empty()) throw std::invalid_argument("n_list is empty");
  auto pool = sample_omegas(dist, *std::max_element(n_list.begin(), n_list.end()),
                            derive_seed(seed, "timing-data"));
  return timing_scaling_report(measure, dist, pool.objects, n_list, R_list, seed);
}

}  // namespace d2ke
