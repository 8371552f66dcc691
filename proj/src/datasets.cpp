#include "d2ke/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "d2ke/errors.hpp"
#include "d2ke/rng.hpp"

namespace d2ke {

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction,
                                          std::uint64_t seed) {
  if (data.empty()) throw EmptyDataset("cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * n));
  if (n_train == 0 || n_train >= n) {
    throw std::invalid_argument("train fraction " + std::to_string(train_fraction) + " on " +
                                std::to_string(n) + " samples leaves an empty split");
  }

  std::vector<std::vector<std::size_t>> by_class(data.num_classes);
  for (std::size_t i = 0; i < n; ++i) by_class[data.labels[i]].push_back(i);

  // Largest-remainder apportionment of n_train across classes.
  std::vector<std::size_t> quota(by_class.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    double exact = train_fraction * static_cast<double>(by_class[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n_train && k < remainders.size(); ++k) {
    auto c = remainders[k].second;
    if (quota[c] < by_class[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    train_idx.insert(train_idx.end(), members.begin(), members.begin() + quota[c]);
    test_idx.insert(test_idx.end(), members.begin() + quota[c], members.end());
  }
  if (train_idx.empty() || test_idx.empty()) {
    throw std::invalid_argument("stratified split leaves an empty split");
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  Dataset train = data.subset(train_idx);
  Dataset test = data.subset(test_idx);
  train.split = SplitTag::kTrain;
  test.split = SplitTag::kTest;
  train.meta.extra["split"] = "stratified";
  test.meta.extra["split"] = "stratified";
  return {std::move(train), std::move(test)};
}

std::string_view task_name(SyntheticTask task) {
  switch (task) {
    case SyntheticTask::kMotifString:
      return "motif-string";
    case SyntheticTask::kShiftedSine:
      return "shifted-sine";
    case SyntheticTask::kTwoCluster:
      return "two-cluster";
  }
  return "unknown";
}

SyntheticTask parse_task(std::string_view name) {
  if (name == "motif-string") return SyntheticTask::kMotifString;
  if (name == "shifted-sine") return SyntheticTask::kShiftedSine;
  if (name == "two-cluster") return SyntheticTask::kTwoCluster;
  throw ConfigError("unknown synthetic task '" + std::string(name) + "'");
}

namespace {

std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool contains_motif(const std::vector<std::uint32_t>& s, const std::vector<std::uint32_t>& motif) {
  return std::search(s.begin(), s.end(), motif.begin(), motif.end()) != s.end();
}

StructuredObject motif_string(const SyntheticParams& p, int label, Rng& rng) {
  const auto alphabet_size = static_cast<std::uint32_t>(p.alphabet.size());
  std::vector<std::uint32_t> motif;
  for (char c : p.motif) {
    auto pos = p.alphabet.find(c);
    if (pos == std::string::npos) throw std::invalid_argument("motif symbol not in alphabet");
    motif.push_back(static_cast<std::uint32_t>(pos));
  }
  std::uniform_int_distribution<std::uint32_t> symbol(0, alphabet_size - 1);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<std::uint32_t> s(uniform_size(rng, p.string_length_min, p.string_length_max));
    for (auto& c : s) c = symbol(rng);
    if (label == 1) {
      auto at = uniform_size(rng, 0, s.size() - motif.size());
      std::copy(motif.begin(), motif.end(), s.begin() + static_cast<std::ptrdiff_t>(at));
      return SymbolString(std::move(s), alphabet_size);
    }
    if (!contains_motif(s, motif)) return SymbolString(std::move(s), alphabet_size);
  }
  throw Error("could not draw a motif-free string; lengths too long for the alphabet");
}

StructuredObject shifted_sine(const SyntheticParams& p, int label, Rng& rng) {
  const std::size_t steps = uniform_size(rng, p.series_length_min, p.series_length_max);
  const double cycles = label == 0
                            ? std::uniform_real_distribution<>(p.low_band_min, p.low_band_max)(rng)
                            : std::uniform_real_distribution<>(p.high_band_min, p.high_band_max)(rng);
  const double phase = std::uniform_real_distribution<>(0.0, 2.0 * std::numbers::pi)(rng);
  std::normal_distribution<> noise(0.0, p.series_noise);
  std::vector<double> values(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    values[t] = std::sin(2.0 * std::numbers::pi * cycles * static_cast<double>(t) /
                             static_cast<double>(steps) + phase) + noise(rng);
  }
  return TimeSeries(steps, 1, std::move(values));
}

StructuredObject two_cluster(const SyntheticParams& p, int label, Rng& rng) {
  const std::size_t count = uniform_size(rng, p.set_size_min, p.set_size_max);
  std::normal_distribution<> spread(0.0, p.cluster_spread);
  std::vector<double> data(count * p.set_dim);
  for (std::size_t e = 0; e < count; ++e) {
    for (std::size_t k = 0; k < p.set_dim; ++k) {
      double center = k == 0 ? (label == 0 ? -p.cluster_separation : p.cluster_separation) : 0.0;
      data[e * p.set_dim + k] = center + spread(rng);
    }
  }
  return VectorSet(p.set_dim, std::move(data));
}

template <typename T>
std::string str(const T& v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

Dataset gen_synthetic(SyntheticTask task, std::size_t n, std::uint64_t seed,
                      const SyntheticParams& params) {
  if (n < 4) throw std::invalid_argument("synthetic tasks need n >= 4");
  Dataset data;
  data.num_classes = 2;
  data.meta.source_path = "synthetic:" + std::string(task_name(task));
  auto& extra = data.meta.extra;
  extra["task"] = task_name(task);
  extra["seed"] = std::to_string(seed);
  extra["n"] = std::to_string(n);
  data.meta.label_values = {0, 1};

  switch (task) {
    case SyntheticTask::kMotifString:
      data.kind = ObjectKind::kString;
      extra["alphabet"] = params.alphabet;
      extra["motif"] = params.motif;
      extra["length_range"] = str(params.string_length_min) + "," + str(params.string_length_max);
      if (params.motif.size() > params.string_length_min) {
        throw std::invalid_argument("motif longer than the shortest string");
      }
      break;
    case SyntheticTask::kShiftedSine:
      data.kind = ObjectKind::kTimeSeries;
      extra["length_range"] = str(params.series_length_min) + "," + str(params.series_length_max);
      extra["bands"] = str(params.low_band_min) + "-" + str(params.low_band_max) + "," +
                       str(params.high_band_min) + "-" + str(params.high_band_max);
      extra["noise"] = str(params.series_noise);
      break;
    case SyntheticTask::kTwoCluster:
      data.kind = ObjectKind::kVectorSet;
      extra["dim"] = str(params.set_dim);
      extra["size_range"] = str(params.set_size_min) + "," + str(params.set_size_max);
      extra["separation"] = str(params.cluster_separation);
      extra["spread"] = str(params.cluster_spread);
      break;
  }

  data.objects.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    Rng rng(derive_seed(seed, i));
    switch (task) {
      case SyntheticTask::kMotifString:
        data.objects.push_back(motif_string(params, label, rng));
        break;
      case SyntheticTask::kShiftedSine:
        data.objects.push_back(shifted_sine(params, label, rng));
        break;
      case SyntheticTask::kTwoCluster:
        data.objects.push_back(two_cluster(params, label, rng));
        break;
    }
    data.labels.push_back(label);
    data.ids.push_back(i);
  }
  data.validate();
  return data;
}

Dataset gen_synthetic(std::string_view task, std::size_t n, std::uint64_t seed) {
  return gen_synthetic(parse_task(task), n, seed);
}

SeriesScaler SeriesScaler::fit(const Dataset& data) {
  if (data.kind != ObjectKind::kTimeSeries) throw KindMismatch("scaler needs time series");
  if (data.empty()) throw EmptyDataset("cannot fit a scaler on no data");
  const std::size_t vars = data.objects.front().series().vars();
  std::vector<double> sum(vars, 0.0), sum_sq(vars, 0.0);
  double count = 0;
  for (const auto& o : data.objects) {
    const auto& s = o.series();
    for (std::size_t t = 0; t < s.steps(); ++t) {
      auto row = s.row(t);
      for (std::size_t v = 0; v < vars; ++v) {
        sum[v] += row[v];
        sum_sq[v] += row[v] * row[v];
      }
    }
    count += static_cast<double>(s.steps());
  }
  SeriesScaler scaler;
  for (std::size_t v = 0; v < vars; ++v) {
    double mean = sum[v] / count;
    double var = std::max(0.0, sum_sq[v] / count - mean * mean);
    scaler.mean.push_back(mean);
    scaler.stddev.push_back(var > 1e-24 ? std::sqrt(var) : 1.0);
  }
  return scaler;
}

Dataset SeriesScaler::apply(const Dataset& data) const {
  Dataset out = data;
  for (auto& o : out.objects) {
    const auto& s = o.series();
    if (s.vars() != mean.size()) throw DimensionMismatch("scaler fitted on another V");
    std::vector<double> values(s.values().begin(), s.values().end());
    for (std::size_t i = 0; i < values.size(); ++i) {
      auto v = i % s.vars();
      values[i] = (values[i] - mean[v]) / stddev[v];
    }
    o = TimeSeries(s.steps(), s.vars(), std::move(values));
  }
  return out;
}

std::size_t median_string_length(const Dataset& data) {
  if (data.empty()) throw EmptyDataset("median of an empty dataset");
  std::vector<std::size_t> lengths;
  for (const auto& o : data.objects) lengths.push_back(o.string().size());
  auto mid = lengths.begin() + static_cast<std::ptrdiff_t>((lengths.size() - 1) / 2);
  std::nth_element(lengths.begin(), mid, lengths.end());
  return *mid;
}

}  // namespace d2ke
