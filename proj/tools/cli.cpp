#include "cli.hpp"

#include <cstdio>
#include <optional>

#include "CLI11.hpp"

#include "d2ke/datasets.hpp"
#include "d2ke/errors.hpp"
#include "d2ke/experiment.hpp"
#include "d2ke/io.hpp"
#include "d2ke/matrix_io.hpp"
#include "d2ke/model_io.hpp"
#include "d2ke/parallel.hpp"
#include "d2ke/rng.hpp"

namespace d2ke {
namespace {

std::string sig(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::uint64_t need_seed(const std::optional<std::uint64_t>& seed, const char* command) {
  if (!seed) throw ConfigError(std::string(command) + " needs --seed (no implicit entropy)");
  return *seed;
}

DistanceMeasure measure_for(const std::string& name, ObjectKind kind) {
  auto m = name.empty() ? DistanceMeasure::for_kind(kind) : DistanceMeasure::from_name(name);
  if (m.kind() != kind) {
    throw KindMismatch("measure '" + std::string(m.name()) + "' cannot compare " +
                       std::string(kind_name(kind)) + " objects");
  }
  return m;
}

const StructuredObject& pick(const Dataset& data, std::size_t index, const std::string& path) {
  if (index >= data.size()) {
    throw std::out_of_range("'" + path + "' has " + std::to_string(data.size()) +
                            " objects; index " + std::to_string(index) + " requested");
  }
  return data.objects[index];
}

struct DistOptions {
  std::string name;
  std::size_t length_min = 0, length_max = 0;
  std::size_t vars = 0;
  double element_std = 1.0;
  std::uint32_t alphabet_size = 0;
  std::size_t size_min = 0, size_max = 0;
  std::size_t dim = 0;
  std::string source;
  bool with_replacement = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--dist", name,
                    "random-time-series | random-string | random-vector-set | data-holdout");
    cmd->add_option("--length-min", length_min, "series/string length lower bound");
    cmd->add_option("--length-max", length_max, "series/string length upper bound");
    cmd->add_option("--vars", vars, "variables per time step");
    cmd->add_option("--element-std", element_std, "Gaussian std of series entries");
    cmd->add_option("--alphabet-size", alphabet_size, "string alphabet size");
    cmd->add_option("--size-min", size_min, "vector-set size lower bound");
    cmd->add_option("--size-max", size_max, "vector-set size upper bound");
    cmd->add_option("--dim", dim, "vector-set element dimension");
    cmd->add_option("--source", source, "dataset file for data-holdout");
    cmd->add_flag("--with-replacement", with_replacement, "holdout draws with replacement");
  }

  // `train` supplies the default distribution when --dist is absent or
  // leaves fields unset.
  OmegaDistribution build(const Dataset* train) const {
    if (name == "data-holdout") {
      std::shared_ptr<const Dataset> src;
      if (!source.empty()) src = std::make_shared<const Dataset>(load_dataset(source));
      else if (train) src = std::make_shared<const Dataset>(*train);
      else throw ConfigError("data-holdout needs --source");
      return OmegaDistribution(DataHoldoutSpec{src, !with_replacement});
    }
    std::optional<OmegaDistribution> base;
    if (train) base = OmegaDistribution::synthetic_default(*train);
    OmegaDistribution::Spec spec;
    if (name.empty()) {
      if (!base) throw ConfigError("--dist is required");
      spec = base->spec();
    } else if (name == "random-time-series") {
      spec = base && std::holds_alternative<RandomTimeSeriesSpec>(base->spec()) ? base->spec()
                                                                               : RandomTimeSeriesSpec{};
    } else if (name == "random-string") {
      spec = base && std::holds_alternative<RandomStringSpec>(base->spec()) ? base->spec()
                                                                           : RandomStringSpec{};
    } else if (name == "random-vector-set") {
      spec = base && std::holds_alternative<RandomVectorSetSpec>(base->spec()) ? base->spec()
                                                                              : RandomVectorSetSpec{};
    } else {
      throw ConfigError("unknown distribution '" + name + "'");
    }
    if (auto* t = std::get_if<RandomTimeSeriesSpec>(&spec)) {
      if (length_min) t->length_min = length_min;
      if (length_max) t->length_max = length_max;
      if (vars) t->vars = vars;
      t->element_std = element_std;
    } else if (auto* s = std::get_if<RandomStringSpec>(&spec)) {
      if (length_min) s->length_min = length_min;
      if (length_max) s->length_max = length_max;
      if (alphabet_size) s->alphabet_size = alphabet_size;
    } else if (auto* v = std::get_if<RandomVectorSetSpec>(&spec)) {
      if (size_min) v->size_min = size_min;
      if (size_max) v->size_max = size_max;
      if (dim) v->dim = dim;
    }
    OmegaDistribution dist(spec);
    try {
      dist.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return dist;
  }
};

std::string alphabet_of(const Dataset& data) {
  auto it = data.meta.extra.find("alphabet");
  return it == data.meta.extra.end() ? std::string() : it->second;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"D2KE: kernels from distances via random features", "d2ke"};
  app.require_subcommand(1);
  int threads = 0;
  std::optional<std::uint64_t> seed;
  app.add_option("--threads", threads, "cap on worker threads (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "master seed (overrides the config seed)");

  // run
  auto* run = app.add_subcommand("run", "run a configured experiment");
  std::string config_path, run_output;
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--output", run_output, "result file (overrides the config)");

  // distance
  auto* distance = app.add_subcommand("distance", "distance between two objects");
  std::string measure_name, a_path, b_path;
  std::size_t a_index = 0, b_index = 0;
  distance->add_option("--measure", measure_name, "dtw | edit | mod-hausdorff")->required();
  distance->add_option("--a", a_path, "dataset file holding the first object")->required();
  distance->add_option("--b", b_path, "dataset file holding the second object")->required();
  distance->add_option("--a-index", a_index, "object index within --a");
  distance->add_option("--b-index", b_index, "object index within --b");

  // sample
  auto* sample = app.add_subcommand("sample", "draw an omega sample");
  DistOptions sample_dist;
  std::size_t sample_R = 0;
  std::string sample_out;
  sample_dist.attach(sample);
  sample->add_option("--R", sample_R, "number of omegas")->required()->check(CLI::PositiveNumber);
  sample->add_option("--out", sample_out, "omega file to write")->required();

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "embed a dataset with a frozen omega sample");
  std::string embed_model, embed_data, embed_out, embed_measure;
  double embed_gamma = 0.0;
  embed_cmd->add_option("--model", embed_model, "omega file")->required();
  embed_cmd->add_option("--gamma", embed_gamma, "bandwidth")->required();
  embed_cmd->add_option("--measure", embed_measure, "distance measure")->required();
  embed_cmd->add_option("--data", embed_data, "dataset file")->required();
  embed_cmd->add_option("--out", embed_out, "matrix file")->required();

  // train
  auto* train = app.add_subcommand("train", "fit a D2KE linear model with fixed parameters");
  std::string train_data, train_out, train_measure, train_loss = "logistic";
  std::size_t train_R = 256;
  double train_gamma = 1.0, train_mu = 1e-2;
  DistOptions train_dist;
  train->add_option("--data", train_data, "training dataset file")->required();
  train->add_option("--out", train_out, "model file")->required();
  train->add_option("--measure", train_measure, "distance measure (default for the kind)");
  train->add_option("--R", train_R, "number of random features")->check(CLI::PositiveNumber);
  train->add_option("--gamma", train_gamma, "bandwidth");
  train->add_option("--mu", train_mu, "L2 regularization");
  train->add_option("--loss", train_loss, "logistic | squared-hinge");
  train_dist.attach(train);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a saved model on a dataset");
  std::string eval_model, eval_data, eval_predictions;
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--data", eval_data, "dataset file")->required();
  evaluate->add_option("--predictions", eval_predictions, "write one predicted label per line");

  // analyze-kernel
  auto* analyze = app.add_subcommand("analyze-kernel", "Monte-Carlo convergence and spectra");
  std::string an_data, an_measure, an_out;
  double an_gamma = 1.0;
  std::vector<std::size_t> an_R = {16, 64, 256, 1024};
  std::size_t an_trials = 5, an_pairs = 20;
  DistOptions an_dist;
  analyze->add_option("--data", an_data, "dataset file")->required();
  analyze->add_option("--measure", an_measure, "distance measure");
  analyze->add_option("--gamma", an_gamma, "bandwidth");
  analyze->add_option("--R-list", an_R, "feature counts")->delimiter(',');
  analyze->add_option("--trials", an_trials, "trials per level");
  analyze->add_option("--pairs", an_pairs, "object pairs compared");
  analyze->add_option("--out", an_out, "report file (default stdout)");
  an_dist.attach(analyze);

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic benchmark task");
  std::string gen_task, gen_out;
  std::size_t gen_n = 300;
  gen->add_option("--task", gen_task, "motif-string | shifted-sine | two-cluster")->required();
  gen->add_option("--n", gen_n, "number of objects");
  gen->add_option("--out", gen_out, "dataset file")->required();

  // timing
  auto* timing = app.add_subcommand("timing", "embedding wall-clock scaling in n and R");
  std::string tm_kind = "string", tm_measure, tm_out;
  std::vector<std::size_t> tm_n = {250, 500, 1000, 2000}, tm_R = {64, 128, 256, 512};
  timing->add_option("--kind", tm_kind, "object kind of the synthetic pool");
  timing->add_option("--measure", tm_measure, "distance measure");
  timing->add_option("--n-list", tm_n, "ascending object counts")->delimiter(',');
  timing->add_option("--R-list", tm_R, "ascending feature counts")->delimiter(',');
  timing->add_option("--out", tm_out, "report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "d2ke: " << e.what() << "\n";
    return 1;
  }

  std::optional<ThreadScope> scope;
  if (threads > 0) scope.emplace(threads);

  try {
    auto emit = [&](const std::string& path, const std::string& text) {
      if (path.empty()) out << text;
      else write_file(path, text);
    };

    if (*run) {
      auto config = load_config(config_path);
      if (seed) config.seeds = {*seed};
      if (!run_output.empty()) config.output = run_output;
      auto table = run_experiment(config);
      if (config.output.empty()) {
        out << format_results(table, parse_result_format(config.output_format));
      }
      for (const auto& row : table.rows) {
        if (row.status != "ok") err << "d2ke: " << row.method << " failed: " << row.message << "\n";
      }
    } else if (*distance) {
      auto measure = DistanceMeasure::from_name(measure_name);
      auto a = load_dataset(a_path);
      auto b = load_dataset(b_path);
      out << sig(measure(pick(a, a_index, a_path), pick(b, b_index, b_path)), 12) << "\n";
    } else if (*sample) {
      auto dist = sample_dist.build(nullptr);
      std::string alphabet;
      if (auto* h = std::get_if<DataHoldoutSpec>(&dist.spec())) alphabet = alphabet_of(*h->source);
      write_omega_sample(sample_omegas(dist, sample_R, need_seed(seed, "sample")), sample_out,
                         alphabet);
    } else if (*embed_cmd) {
      auto data = load_dataset(embed_data);
      EmbeddingModel model(read_omega_sample(embed_model), embed_gamma,
                           measure_for(embed_measure, data.kind));
      write_matrix(embed_dataset(model, data), embed_out);
    } else if (*train) {
      const auto s = need_seed(seed, "train");
      auto data = load_dataset(train_data);
      auto measure = measure_for(train_measure, data.kind);
      auto dist = train_dist.build(&data);
      const auto omega_seed = derive_seed(s, "omega");
      EmbeddingModel model(sample_omegas(dist, train_R, omega_seed), train_gamma, measure);
      TrainOptions options;
      options.mu = train_mu;
      options.loss = parse_loss(train_loss);
      auto features = embed_dataset(model, data);
      auto linear = train_linear(features, data.labels, data.num_classes, options);
      SavedModel saved{model, linear, data.meta.label_values, alphabet_of(data), {}};
      saved.provenance["seed"] = std::to_string(s);
      saved.provenance["omega_seed"] = std::to_string(omega_seed);
      saved.provenance["distribution"] = dist.describe();
      saved.provenance["data"] = train_data;
      saved.provenance["grid"] = "fixed gamma=" + sig(train_gamma, 17) + " mu=" + sig(train_mu, 17) +
                                 " R=" + std::to_string(train_R);
      saved.provenance["train_accuracy"] =
          sig(100.0 * accuracy(predict_linear(linear, features), data.labels), 17);
      saved.provenance["converged"] = linear.logs.front().converged ? "1" : "0";
      save_model(saved, train_out);
    } else if (*evaluate) {
      auto saved = load_model(eval_model);
      auto data = load_dataset(eval_data);
      auto predictions = predict_linear(saved.linear, embed_dataset(saved.embedding, data));
      std::size_t correct = 0;
      std::string lines;
      for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto label = saved.label_values.at(static_cast<std::size_t>(predictions[i]));
        lines += std::to_string(label) + "\n";
        if (data.meta.label_values.at(static_cast<std::size_t>(data.labels[i])) == label) ++correct;
      }
      if (!eval_predictions.empty()) write_file(eval_predictions, lines);
      out << "accuracy " << sig(100.0 * static_cast<double>(correct) / static_cast<double>(data.size()), 12)
          << "\nn " << data.size() << "\n";
    } else if (*analyze) {
      auto data = load_dataset(an_data);
      auto measure = measure_for(an_measure, data.kind);
      auto dist = an_dist.build(&data);
      const auto s = need_seed(seed, "analyze-kernel");
      std::vector<ObjectPair> pairs;
      for (std::size_t p = 0; p < an_pairs && data.size() >= 2; ++p) {
        auto i = (2 * p) % data.size(), j = (2 * p + 1) % data.size();
        pairs.emplace_back(data.objects[i], data.objects[j]);
      }
      auto report = kernel_convergence_sweep(dist, an_gamma, measure, pairs, an_R, s, an_trials);
      std::string text = "#analyze-kernel gamma=" + sig(an_gamma, 17) + " R_ref=" +
                         std::to_string(report.R_ref) + " trials=" + std::to_string(report.trials) +
                         " " + dist.describe() + "\nR\tmean_max_error\tratio_to_next\n";
      for (std::size_t k = 0; k < report.R_list.size(); ++k) {
        text += std::to_string(report.R_list[k]) + "\t" + sig(report.mean_error[k], 17) + "\t" +
                (k < report.ratios.size() ? sig(report.ratios[k], 17) : "") + "\n";
      }
      auto D = pairwise_distances(data.objects, measure);
      EmbeddingModel model(sample_omegas(dist, an_R.back(), s), an_gamma, measure);
      auto rf = gram_from_features(embed_dataset(model, data));
      text += "min_eigenvalue\td2ke-rf\t" + sig(min_eigenvalue(rf.values), 17) + "\n";
      text += "min_eigenvalue\tdsk-rbf\t" +
              sig(min_eigenvalue(dsk_kernel(DskKind::kRbf, an_gamma, D).values), 17) + "\n";
      text += "min_eigenvalue\tdsk-nd\t" +
              sig(min_eigenvalue(dsk_kernel(DskKind::kNegativeDistance, an_gamma, D).values), 17) + "\n";
      emit(an_out, text);
    } else if (*gen) {
      write_dataset(gen_synthetic(gen_task, gen_n, need_seed(seed, "gen-synthetic")), gen_out);
    } else if (*timing) {
      const auto kind = parse_kind(tm_kind);
      auto measure = measure_for(tm_measure, kind);
      OmegaDistribution dist = kind == ObjectKind::kTimeSeries ? OmegaDistribution(RandomTimeSeriesSpec{})
                               : kind == ObjectKind::kString   ? OmegaDistribution(RandomStringSpec{})
                                                               : OmegaDistribution(RandomVectorSetSpec{});
      auto report = timing_scaling_report(measure, dist, tm_n, tm_R, need_seed(seed, "timing"));
      std::string text = "#timing threads=" + std::to_string(report.threads) + " " +
                         dist.describe() + "\naxis\tn\tR\tseconds\n";
      for (const auto& p : report.n_sweep) {
        text += "n\t" + std::to_string(p.n) + "\t" + std::to_string(p.R) + "\t" + sig(p.seconds, 6) + "\n";
      }
      for (const auto& p : report.R_sweep) {
        text += "R\t" + std::to_string(p.n) + "\t" + std::to_string(p.R) + "\t" + sig(p.seconds, 6) + "\n";
      }
      text += "slope\tn\t" + sig(report.n_slope, 6) + "\nslope\tR\t" + sig(report.R_slope, 6) + "\n";
      if (report.degenerate) text += "degenerate\t1\n";
      emit(tm_out, text);
    }
  } catch (const ConfigError& e) {
    err << "d2ke: config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "d2ke: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace d2ke
