// Acceptance gate: one PASS/FAIL line per criterion. `--only N` runs a
// single criterion; the exit status is non-zero if any criterion run fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "d2ke/datasets.hpp"
#include "d2ke/distances.hpp"
#include "d2ke/embedding.hpp"
#include "d2ke/experiment.hpp"
#include "d2ke/learners.hpp"
#include "d2ke/oracle.hpp"
#include "d2ke/parallel.hpp"
#include "d2ke/sampling.hpp"

using namespace d2ke;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StructuredObject random_string(Rng& rng, std::size_t lo, std::size_t hi, std::uint32_t alphabet) {
  std::uniform_int_distribution<std::size_t> len(lo, hi);
  std::uniform_int_distribution<std::uint32_t> sym(0, alphabet - 1);
  std::vector<std::uint32_t> s(len(rng));
  for (auto& c : s) c = sym(rng);
  return SymbolString(std::move(s), alphabet);
}

StructuredObject random_series(Rng& rng, std::size_t lo, std::size_t hi, std::size_t vars) {
  std::uniform_int_distribution<std::size_t> len(lo, hi);
  std::normal_distribution<> g;
  const auto t = len(rng);
  std::vector<double> v(t * vars);
  for (auto& x : v) x = g(rng);
  return TimeSeries(t, vars, std::move(v));
}

StructuredObject random_set(Rng& rng, std::size_t lo, std::size_t hi, std::size_t dim) {
  std::uniform_int_distribution<std::size_t> len(lo, hi);
  std::normal_distribution<> g;
  std::vector<double> v(len(rng) * dim);
  for (auto& x : v) x = g(rng);
  return VectorSet(dim, std::move(v));
}

StructuredObject random_of(ObjectKind kind, Rng& rng) {
  switch (kind) {
    case ObjectKind::kTimeSeries:
      return random_series(rng, 3, 20, 1);
    case ObjectKind::kString:
      return random_string(rng, 0, 10, 4);
    case ObjectKind::kVectorSet:
      return random_set(rng, 3, 12, 2);
  }
  throw std::logic_error("unreachable");
}

OmegaDistribution default_dist(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kTimeSeries:
      return OmegaDistribution(RandomTimeSeriesSpec{});
    case ObjectKind::kString:
      return OmegaDistribution(RandomStringSpec{});
    case ObjectKind::kVectorSet:
      return OmegaDistribution(RandomVectorSetSpec{});
  }
  throw std::logic_error("unreachable");
}

// Every string of length <= max_len over a binary alphabet.
std::vector<StructuredObject> all_binary_strings(std::size_t max_len) {
  std::vector<StructuredObject> out;
  for (std::size_t len = 0; len <= max_len; ++len) {
    for (std::size_t bits = 0; bits < (std::size_t{1} << len); ++bits) {
      std::vector<std::uint32_t> s(len);
      for (std::size_t i = 0; i < len; ++i) s[i] = (bits >> i) & 1u;
      out.push_back(SymbolString(std::move(s), 2));
    }
  }
  return out;
}

constexpr ObjectKind kKinds[] = {ObjectKind::kTimeSeries, ObjectKind::kString,
                                 ObjectKind::kVectorSet};

Outcome distance_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  const DistanceMeasure edit(MeasureTag::kEdit), dtw_m(MeasureTag::kDtw),
      mh(MeasureTag::kModHausdorff);
  auto strings = all_binary_strings(4);
  std::size_t pairs = 0, edit_bad = 0;
  for (const auto& a : strings) {
    for (const auto& b : strings) {
      ++pairs;
      if (edit(a, b) != oracle_distance(edit, a, b)) ++edit_bad;
    }
  }
  Rng rng(101);
  double dtw_err = 0.0, mh_err = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto a = random_series(rng, 1, kOracleMaxSteps, 1 + i % 2);
    auto b = random_series(rng, 1, kOracleMaxSteps, 1 + i % 2);
    dtw_err = std::max(dtw_err, std::abs(dtw_m(a, b) - oracle_distance(dtw_m, a, b)));
    auto u = random_set(rng, 1, kOracleMaxSetSize, 1 + i % 3);
    auto v = random_set(rng, 1, kOracleMaxSetSize, 1 + i % 3);
    mh_err = std::max(mh_err, std::abs(mh(u, v) - oracle_distance(mh, u, v)));
  }
  const double secs = seconds_since(t0);
  return {edit_bad == 0 && dtw_err <= 1e-9 && mh_err <= 1e-12 && secs < 60.0,
          std::to_string(pairs) + " edit pairs with " + std::to_string(edit_bad) +
              " mismatches; dtw max err " + fmt("%.3g", dtw_err) + "; mod-hausdorff max err " +
              fmt("%.3g", mh_err) + "; " + fmt("%.2fs", secs)};
}

Outcome metric_axioms() {
  const DistanceMeasure edit(MeasureTag::kEdit), dtw_m(MeasureTag::kDtw),
      mh(MeasureTag::kModHausdorff);
  auto strings = all_binary_strings(3);
  std::size_t triples = 0, edit_bad = 0;
  for (const auto& x : strings) {
    if (edit(x, x) != 0.0) ++edit_bad;
    for (const auto& y : strings) {
      const double dxy = edit(x, y);
      if (dxy < 0 || dxy != edit(y, x) || ((dxy == 0) != (x == y))) ++edit_bad;
      for (const auto& z : strings) {
        ++triples;
        if (edit(x, z) > dxy + edit(y, z)) ++edit_bad;
      }
    }
  }
  Rng rng(202);
  std::size_t other_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = random_series(rng, 1, 15, 2), b = random_series(rng, 1, 15, 2);
    if (dtw_m(a, b) < 0 || dtw_m(a, b) != dtw_m(b, a)) ++other_bad;
    auto u = random_set(rng, 1, 10, 2), v = random_set(rng, 1, 10, 2);
    if (mh(u, v) < 0 || mh(u, v) != mh(v, u)) ++other_bad;
  }
  // Search short integer-valued series for a DTW triangle violation.
  std::string witness;
  std::uniform_int_distribution<int> val(0, 3);
  std::uniform_int_distribution<std::size_t> len(1, 4);
  auto draw = [&] {
    std::vector<double> v(len(rng));
    for (auto& x : v) x = val(rng);
    return StructuredObject(TimeSeries(v.size(), 1, v));
  };
  auto show = [](const StructuredObject& o) {
    std::string s = "[";
    for (double v : o.series().values()) s += (s.size() > 1 ? "," : "") + std::to_string(int(v));
    return s + "]";
  };
  for (int i = 0; i < 100000 && witness.empty(); ++i) {
    auto x = draw(), y = draw(), z = draw();
    const double xz = dtw_m(x, z), xy = dtw_m(x, y), yz = dtw_m(y, z);
    if (xz > xy + yz + 1e-12) {
      witness = "x=" + show(x) + " y=" + show(y) + " z=" + show(z) + " d(x,z)=" + fmt("%g", xz) +
                " > d(x,y)+d(y,z)=" + fmt("%g", xy + yz);
    }
  }
  return {edit_bad == 0 && other_bad == 0 && !witness.empty(),
          std::to_string(triples) + " edit triples, " + std::to_string(edit_bad) +
              " edit axiom failures; " + std::to_string(other_bad) +
              " dtw/mod-hausdorff (i),(iii) failures in 1000 instances each; dtw witness: " +
              (witness.empty() ? "none found" : witness)};
}

Outcome psd_by_construction() {
  Rng rng(303);
  double worst_rf = std::numeric_limits<double>::infinity();
  double most_negative_nd = 0.0;
  for (auto kind : kKinds) {
    DistanceMeasure m = DistanceMeasure::for_kind(kind);
    for (int t = 0; t < 20; ++t) {
      std::vector<StructuredObject> xs;
      for (int i = 0; i < 30; ++i) xs.push_back(random_of(kind, rng));
      EmbeddingModel model(sample_omegas(default_dist(kind), 64, derive_seed(303, t)), 0.5, m);
      worst_rf = std::min(worst_rf, min_eigenvalue(gram_from_features(embed_dataset(model, xs)).values));
      auto nd = dsk_kernel(DskKind::kNegativeDistance, 1.0, pairwise_distances(xs, m));
      most_negative_nd = std::min(most_negative_nd, min_eigenvalue(nd.values));
    }
  }
  return {worst_rf >= -1e-8 && most_negative_nd < -1e-3,
          fmt("60 datasets; min d2ke-rf eigenvalue %.3g; most negative dsk-nd eigenvalue %.3g",
              worst_rf, most_negative_nd)};
}

Outcome lipschitz() {
  Rng rng(404);
  const DistanceMeasure edit(MeasureTag::kEdit);
  std::size_t violations = 0, checks = 0;
  double tightest = 0.0;
  for (double gamma : {0.1, 1.0}) {
    for (std::size_t R : {16u, 256u}) {
      EmbeddingModel m(sample_omegas(OmegaDistribution(RandomStringSpec{}), R, 404 + R), gamma, edit);
      for (int p = 0; p < 500; ++p) {
        auto x = random_string(rng, 0, 12, 4), y = random_string(rng, 0, 12, 4);
        auto fx = embed(m, x), fy = embed(m, y);
        double n2 = 0.0;
        for (std::size_t j = 0; j < R; ++j) n2 += (fx[j] - fy[j]) * (fx[j] - fy[j]);
        const double bound = gamma * edit(x, y);
        ++checks;
        if (std::sqrt(n2) > bound + 1e-12) ++violations;
        if (bound > 0) tightest = std::max(tightest, std::sqrt(n2) / bound);
      }
    }
  }
  return {violations == 0, std::to_string(checks) + " pairs, " + std::to_string(violations) +
                               " violations; largest ratio to the bound " + fmt("%.3f", tightest)};
}

Outcome mc_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(505);
  std::vector<ObjectPair> pairs;
  for (int i = 0; i < 25; ++i) pairs.emplace_back(random_string(rng, 4, 10, 4), random_string(rng, 4, 10, 4));
  std::vector<std::size_t> R{16, 64, 256, 1024};
  auto rep = kernel_convergence_sweep(OmegaDistribution(RandomStringSpec{}), 0.5,
                                      DistanceMeasure(MeasureTag::kEdit), pairs, R, 505, 5);
  bool ok = seconds_since(t0) < 300.0;
  std::string detail = "mean max error";
  for (std::size_t k = 0; k < R.size(); ++k) detail += " R=" + std::to_string(R[k]) + ":" + fmt("%.4g", rep.mean_error[k]);
  detail += "; ratios";
  for (double r : rep.ratios) {
    detail += " " + fmt("%.3f", r);
    ok = ok && r >= 1.2 && r <= 3.5;
  }
  return {ok, detail + "; " + fmt("%.1fs", seconds_since(t0))};
}

Outcome softmin_limit() {
  Rng rng(606);
  const DistanceMeasure edit(MeasureTag::kEdit);
  const double gamma = 100.0;
  auto base = sample_omegas(OmegaDistribution(RandomStringSpec{}), 63, 606);
  std::size_t inside = 0, above = 0, below = 0, reversed_ok = 0;
  double worst_excess = 0.0;
  const std::size_t R = base.size() + 1;
  for (int p = 0; p < 100; ++p) {
    auto x = random_string(rng, 2, 10, 4), y = random_string(rng, 2, 10, 4);
    OmegaSample sample = base;
    sample.objects.push_back(x);
    const double s = softmin_distance(sample, gamma, x, y, edit);
    const double d = edit(x, y);
    const double slack = std::log(double(R)) / gamma;
    if (s > d + 1e-12) {
      ++above;
      worst_excess = std::max(worst_excess, s - d);
    } else if (s < d - slack - 1e-12) {
      ++below;
    } else {
      ++inside;
    }
    if (s >= d - 1e-12 && s <= d + slack + 1e-12) ++reversed_ok;
  }
  return {inside == 100,
          std::to_string(inside) + "/100 pairs inside [d - log(R)/gamma, d]; " + std::to_string(above) +
              " above d (max excess " + fmt("%.4g", worst_excess) + ", log(R)/gamma = " +
              fmt("%.4g", std::log(double(R)) / gamma) + "), " + std::to_string(below) +
              " below; " + std::to_string(reversed_ok) +
              "/100 inside [d, d + log(R)/gamma], the interval the mean-based softmin satisfies"};
}

Outcome kernel_softmin_identity() {
  Rng rng(707);
  double worst = 0.0;
  for (auto kind : kKinds) {
    auto m = DistanceMeasure::for_kind(kind);
    const double gamma = 0.5;
    auto omegas = sample_omegas(default_dist(kind), 64, 707);
    EmbeddingModel model(omegas, gamma, m);
    for (int p = 0; p < 100; ++p) {
      auto x = random_of(kind, rng), y = random_of(kind, rng);
      worst = std::max(worst, std::abs(rf_kernel(model, x, y) -
                                       std::exp(-gamma * softmin_distance(omegas, gamma, x, y, m))));
    }
  }
  return {worst <= 1e-10, fmt("300 pairs over three kinds; max |k - exp(-gamma softmin)| = %.3g", worst)};
}

Outcome optimizer() {
  auto data = gen_synthetic(SyntheticTask::kMotifString, 60, 808);
  EmbeddingModel model(sample_omegas(OmegaDistribution::synthetic_default(data), 32, 808), 0.3,
                       DistanceMeasure(MeasureTag::kEdit));
  auto f = embed_dataset(model, data);
  Rng rng(808);
  std::normal_distribution<> g(0.0, 5.0);
  double worst = 0.0;
  bool monotone = true;
  for (auto loss : {Loss::kLogistic, Loss::kSquaredHinge}) {
    std::vector<double> targets;
    for (int y : data.labels) targets.push_back(y == 1 ? 1.0 : -1.0);
    BinaryObjective obj(f, targets, 1e-3, loss);
    for (int point = 0; point < 5; ++point) {
      Eigen::VectorXd w(f.cols()), grad;
      for (auto& v : w) v = g(rng);
      obj.value_and_gradient(w, grad);
      for (Eigen::Index k = 0; k < w.size(); ++k) {
        const double h = 1e-5;
        Eigen::VectorXd wp = w, wm = w;
        wp[k] += h;
        wm[k] -= h;
        const double fd = (obj.value(wp) - obj.value(wm)) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad[k]) / std::max(1.0, std::abs(grad[k])));
      }
    }
    TrainOptions opt;
    opt.mu = 1e-3;
    opt.loss = loss;
    auto lin = train_linear(f, data.labels, data.num_classes, opt);
    const auto& trace = lin.logs.front().objective_trace;
    for (std::size_t k = 1; k < trace.size(); ++k) monotone = monotone && trace[k] <= trace[k - 1] + 1e-12;
  }
  return {worst <= 1e-6 && monotone,
          fmt("max relative gradient error %.3g over 10 points; trace monotone: ", worst) +
              (monotone ? "yes" : "no")};
}

Outcome relative_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (const char* task : {"motif-string", "shifted-sine", "two-cluster"}) {
    auto config = parse_config(std::string("dataset = synthetic:") + task +
                               "\nn = 300\ntrain_fraction = 0.6666666666666666\n"
                               "methods = d2ke, knn\n"
                               "gamma_grid = 1e-3, 1e-2, 1e-1, 1, 1e1\n"
                               "mu_grid = 1e-8, 1e-6, 1e-4, 1e-2\n"
                               "R_grid = 64, 256, 1024\nfolds = 10\nseed = 1, 2, 3\n");
    auto table = run_experiment(config);
    double d2ke = -1, knn = -1;
    for (const auto& r : table.rows) {
      if (r.provenance.count("row") == 0) {
        if (r.status != "ok") ok = false;
        continue;
      }
      (r.method == "d2ke" ? d2ke : knn) = r.accuracy;
    }
    const bool task_ok = d2ke >= knn && (std::string(task) != "motif-string" || d2ke >= 85.0);
    ok = ok && task_ok;
    detail += std::string(detail.empty() ? "" : "; ") + task + fmt(" d2ke %.2f%% knn %.2f%%", d2ke, knn) +
              (task_ok ? "" : " (fails)");
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 600.0, detail + fmt("; %.1fs", secs)};
}

Outcome d2ke_equals_rsm() {
  double worst = 0.0;
  for (auto task : {SyntheticTask::kMotifString, SyntheticTask::kShiftedSine, SyntheticTask::kTwoCluster}) {
    auto data = gen_synthetic(task, 80, 1010);
    auto source = std::make_shared<const Dataset>(data.subset(std::vector<std::size_t>{
        0, 3, 5, 8, 13, 21, 34, 55, 60, 61, 62, 63, 64, 65, 66, 67, 68, 69, 70, 71}));
    auto measure = DistanceMeasure::for_kind(data.kind);
    for (std::size_t R : {4u, 16u}) {
      for (double gamma : {0.1, 1.0}) {
        OmegaDistribution holdout(DataHoldoutSpec{source, true});
        auto sample = sample_omegas(holdout, R, 1010 + R);
        auto pipeline = embed_dataset(EmbeddingModel(sample, gamma, measure), data);
        auto reps = holdout_indices(source->size(), R, true, 1010 + R);
        auto rsm = representative_set_features(distance_matrix(data.objects, source->objects, measure),
                                               reps, gamma);
        worst = std::max(worst, (pipeline - rsm).cwiseAbs().maxCoeff());
      }
    }
  }
  return {worst <= 1e-12, fmt("3 kinds x R {4,16} x gamma {0.1,1}; max |d2ke - rsm| = %.3g", worst)};
}

Outcome complexity() {
  auto pool = gen_synthetic(SyntheticTask::kMotifString, 2000, 1111);
  std::vector<std::size_t> n{250, 500, 1000, 2000}, R{64, 128, 256, 512};
  auto rep = timing_scaling_report(DistanceMeasure(MeasureTag::kEdit),
                                   OmegaDistribution::synthetic_default(pool), pool.objects, n, R, 1111);
  const bool ok = !rep.degenerate && rep.n_slope >= 0.7 && rep.n_slope <= 1.3 && rep.R_slope >= 0.7 &&
                  rep.R_slope <= 1.3;
  return {ok, fmt("n slope %.3f, R slope %.3f (%d thread(s)); largest run %.3fs", rep.n_slope,
                  rep.R_slope, rep.threads, rep.n_sweep.back().seconds)};
}

Outcome pe_reconstruction() {
  Rng rng(1212);
  std::normal_distribution<> g(0.0, 3.0);
  std::vector<std::array<double, 2>> p(10);
  for (auto& q : p) q = {g(rng), g(rng)};
  RowMatrix D(10, 10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) D(i, j) = std::hypot(p[i][0] - p[j][0], p[i][1] - p[j][1]);
  }
  auto pe = pseudo_euclidean_embed(D, 2, EigenTreatment::kClip);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      worst = std::max(worst, std::abs((pe.coordinates.row(i) - pe.coordinates.row(j)).norm() - D(i, j)));
    }
  }
  return {worst <= 1e-8, fmt("max pairwise distance error %.3g", worst)};
}

Outcome determinism() {
  auto config = parse_config(
      "dataset = synthetic:motif-string\nn = 90\nmethods = d2ke, knn, dsk-rbf, dsk-nd, gdk-led, rsm\n"
      "gamma_grid = 0.1, 1\nmu_grid = 1e-6, 1e-3\nR_grid = 16, 64\nrank_grid = 4, 16\n"
      "lambda_grid = 0.1, 1\nk_grid = 1, 3\nfolds = 3\nseed = 13\n");
  auto [train, test] = prepare_data(config, 13);
  auto measure = DistanceMeasure(MeasureTag::kEdit);
  std::vector<ResultRow> reference;
  std::vector<RowMatrix> reference_features;
  std::size_t runs = 0, mismatches = 0;
  for (int threads : {1, 8, 1, 8}) {
    ThreadScope scope(threads);
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      MethodTrace trace;
      auto row = run_method(config.methods[m], train, test, measure, config, 13, &trace);
      ++runs;
      if (reference.size() < config.methods.size()) {
        reference.push_back(row);
        reference_features.push_back(trace.test_features);
        if (row.status != "ok") ++mismatches;
        continue;
      }
      const auto& ref = reference[m];
      if (row.accuracy != ref.accuracy || row.hyperparameters != ref.hyperparameters ||
          row.R != ref.R || trace.test_features != reference_features[m]) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(runs) + " method runs at 1 and 8 threads; " +
                               std::to_string(mismatches) + " differ from the first run"};
}

struct Criterion {
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  const std::vector<Criterion> criteria = {
      {"distance oracle equivalence", distance_oracles},
      {"metric axioms", metric_axioms},
      {"PSD by construction", psd_by_construction},
      {"feature-map Lipschitz bound", lipschitz},
      {"Monte-Carlo kernel convergence", mc_convergence},
      {"softmin limit", softmin_limit},
      {"kernel-softmin identity", kernel_softmin_identity},
      {"optimizer correctness", optimizer},
      {"end-to-end relative ordering", relative_ordering},
      {"D2KE equals RSM under data holdout", d2ke_equals_rsm},
      {"linear complexity in n and R", complexity},
      {"pseudo-Euclidean reconstruction", pe_reconstruction},
      {"determinism across runs and thread counts", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].title,
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
