#include "d2ke/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "d2ke/datasets.hpp"
#include "d2ke/errors.hpp"
#include "d2ke/io.hpp"

namespace d2ke {

OmegaDistribution::OmegaDistribution(Spec spec) : spec_(std::move(spec)) {}

ObjectKind OmegaDistribution::kind() const {
  struct Visitor {
    ObjectKind operator()(const RandomTimeSeriesSpec&) const { return ObjectKind::kTimeSeries; }
    ObjectKind operator()(const RandomStringSpec&) const { return ObjectKind::kString; }
    ObjectKind operator()(const RandomVectorSetSpec&) const { return ObjectKind::kVectorSet; }
    ObjectKind operator()(const DataHoldoutSpec& h) const {
      if (!h.source) throw std::invalid_argument("holdout distribution without a source");
      return h.source->kind;
    }
  };
  return std::visit(Visitor{}, spec_);
}

std::string OmegaDistribution::name() const {
  switch (spec_.index()) {
    case 0:
      return "random-time-series";
    case 1:
      return "random-string";
    case 2:
      return "random-vector-set";
    default:
      return "data-holdout";
  }
}

std::string OmegaDistribution::describe() const {
  std::ostringstream ss;
  ss.precision(17);
  ss << "dist=" << name();
  if (auto* t = std::get_if<RandomTimeSeriesSpec>(&spec_)) {
    ss << " length_min=" << t->length_min << " length_max=" << t->length_max
       << " vars=" << t->vars << " element_std=" << t->element_std;
  } else if (auto* s = std::get_if<RandomStringSpec>(&spec_)) {
    ss << " length_min=" << s->length_min << " length_max=" << s->length_max
       << " alphabet_size=" << s->alphabet_size;
  } else if (auto* v = std::get_if<RandomVectorSetSpec>(&spec_)) {
    ss << " size_min=" << v->size_min << " size_max=" << v->size_max << " dim=" << v->dim;
  } else {
    const auto& h = std::get<DataHoldoutSpec>(spec_);
    ss << " without_replacement=" << (h.without_replacement ? 1 : 0)
       << " source_size=" << (h.source ? h.source->size() : 0);
    if (h.source && !h.source->meta.source_path.empty()) {
      ss << " source=" << h.source->meta.source_path;
    }
  }
  return ss.str();
}

void OmegaDistribution::validate() const {
  auto check_range = [](std::size_t lo, std::size_t hi, const char* what) {
    if (lo < 1 || lo > hi) {
      throw std::invalid_argument(std::string(what) + " range must satisfy 1 <= min <= max");
    }
  };
  if (auto* t = std::get_if<RandomTimeSeriesSpec>(&spec_)) {
    check_range(t->length_min, t->length_max, "series length");
    if (t->vars == 0) throw std::invalid_argument("series V must be positive");
    if (!(t->element_std > 0.0)) throw std::invalid_argument("element_std must be positive");
  } else if (auto* s = std::get_if<RandomStringSpec>(&spec_)) {
    check_range(s->length_min, s->length_max, "string length");
    if (s->alphabet_size == 0) throw std::invalid_argument("alphabet size must be positive");
  } else if (auto* v = std::get_if<RandomVectorSetSpec>(&spec_)) {
    check_range(v->size_min, v->size_max, "set size");
    if (v->dim == 0) throw std::invalid_argument("set dimension must be positive");
  } else {
    const auto& h = std::get<DataHoldoutSpec>(spec_);
    if (!h.source || h.source->empty()) {
      throw std::invalid_argument("holdout source must be a non-empty dataset");
    }
  }
}

OmegaDistribution OmegaDistribution::synthetic_default(const Dataset& train) {
  if (train.empty()) throw EmptyDataset("cannot derive omega defaults from an empty dataset");
  const auto& first = train.objects.front();
  switch (train.kind) {
    case ObjectKind::kTimeSeries:
      return OmegaDistribution(RandomTimeSeriesSpec{2, 10, first.series().vars(), 1.0});
    case ObjectKind::kString: {
      auto median = std::max<std::size_t>(2, median_string_length(train));
      return OmegaDistribution(RandomStringSpec{2, median, first.string().alphabet_size()});
    }
    case ObjectKind::kVectorSet:
      return OmegaDistribution(RandomVectorSetSpec{3, 15, first.vector_set().dim()});
  }
  throw std::logic_error("unreachable");
}

std::vector<double> unit_sphere_vector(std::size_t p, Rng& rng) {
  if (p == 0) throw std::invalid_argument("sphere dimension must be positive");
  std::normal_distribution<> gauss(0.0, 1.0);
  std::vector<double> v(p);
  for (;;) {
    double sq = 0.0;
    for (auto& x : v) {
      x = gauss(rng);
      sq += x * x;
    }
    if (sq > 1e-300) {
      double norm = std::sqrt(sq);
      for (auto& x : v) x /= norm;
      return v;
    }
  }
}

std::vector<std::size_t> holdout_indices(std::size_t source_size, std::size_t R,
                                         bool without_replacement, std::uint64_t seed) {
  std::vector<std::size_t> out(R);
  if (without_replacement) {
    if (R > source_size) {
      throw std::invalid_argument("holdout draw of " + std::to_string(R) +
                                  " without replacement from " + std::to_string(source_size) +
                                  " objects");
    }
    std::vector<std::size_t> perm(source_size);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Seeded Fisher-Yates with per-step derived seeds, stable across libraries.
    for (std::size_t i = 0; i + 1 < source_size && i < R; ++i) {
      auto span = source_size - i;
      auto pick = i + derive_seed(seed, i) % span;
      std::swap(perm[i], perm[pick]);
    }
    std::copy_n(perm.begin(), R, out.begin());
  } else {
    for (std::size_t j = 0; j < R; ++j) out[j] = derive_seed(seed, j) % source_size;
  }
  return out;
}

namespace {

StructuredObject draw_one(const OmegaDistribution::Spec& spec, Rng& rng) {
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  if (auto* t = std::get_if<RandomTimeSeriesSpec>(&spec)) {
    auto steps = uniform(t->length_min, t->length_max);
    std::normal_distribution<> gauss(0.0, t->element_std);
    std::vector<double> values(steps * t->vars);
    for (auto& v : values) v = gauss(rng);
    return TimeSeries(steps, t->vars, std::move(values));
  }
  if (auto* s = std::get_if<RandomStringSpec>(&spec)) {
    auto len = uniform(s->length_min, s->length_max);
    std::uniform_int_distribution<std::uint32_t> symbol(0, s->alphabet_size - 1);
    std::vector<std::uint32_t> symbols(len);
    for (auto& c : symbols) c = symbol(rng);
    return SymbolString(std::move(symbols), s->alphabet_size);
  }
  const auto& v = std::get<RandomVectorSetSpec>(spec);
  auto count = uniform(v.size_min, v.size_max);
  std::vector<double> data;
  data.reserve(count * v.dim);
  for (std::size_t e = 0; e < count; ++e) {
    auto u = unit_sphere_vector(v.dim, rng);
    data.insert(data.end(), u.begin(), u.end());
  }
  return VectorSet(v.dim, std::move(data));
}

}  // namespace

OmegaSample sample_omegas(const OmegaDistribution& dist, std::size_t R, std::uint64_t seed) {
  if (R == 0) throw std::invalid_argument("R must be at least 1");
  dist.validate();
  OmegaSample sample{{}, seed, dist, {}};
  if (auto* h = std::get_if<DataHoldoutSpec>(&dist.spec())) {
    sample.source_indices = holdout_indices(h->source->size(), R, h->without_replacement, seed);
    sample.objects.reserve(R);
    for (auto i : sample.source_indices) sample.objects.push_back(h->source->objects[i]);
    return sample;
  }
  // Generated serially: per-index seeds make the result order independent,
  // and R objects are cheap next to the N x R distance evaluations.
  sample.objects.reserve(R);
  for (std::size_t j = 0; j < R; ++j) {
    Rng rng(derive_seed(seed, j));
    sample.objects.push_back(draw_one(dist.spec(), rng));
  }
  return sample;
}

std::string format_omega_sample(const OmegaSample& sample, const std::string& alphabet) {
  Dataset data;
  data.kind = sample.distribution.kind();
  data.objects = sample.objects;
  data.labels.assign(sample.objects.size(), 0);
  data.ids.resize(sample.objects.size());
  std::iota(data.ids.begin(), data.ids.end(), std::size_t{0});
  data.num_classes = 1;
  if (!alphabet.empty()) {
    data.meta.extra["alphabet"] = alphabet;
  } else if (auto* h = std::get_if<DataHoldoutSpec>(&sample.distribution.spec())) {
    if (auto it = h->source->meta.extra.find("alphabet"); it != h->source->meta.extra.end()) {
      data.meta.extra["alphabet"] = it->second;
    }
  }
  std::string header = "omega seed=" + std::to_string(sample.seed) + " R=" +
                       std::to_string(sample.size()) + " kind=" +
                       std::string(kind_name(data.kind)) + " " + sample.distribution.describe();
  return format_dataset(data, {header});
}

void write_omega_sample(const OmegaSample& sample, const std::string& path,
                        const std::string& alphabet) {
  write_file(path, format_omega_sample(sample, alphabet));
}

namespace {

std::map<std::string, std::string> parse_record(const std::string& line) {
  std::map<std::string, std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

}  // namespace

OmegaSample parse_omega_sample(std::string_view text, const std::string& source_name) {
  std::map<std::string, std::string> rec;
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("#omega ", 0) == 0) {
      rec = parse_record(line.substr(7));
      break;
    }
  }
  if (rec.empty()) throw ParseError(1, "'" + source_name + "' has no '#omega' header");
  auto get = [&](const char* key) -> const std::string& {
    auto it = rec.find(key);
    if (it == rec.end()) throw ParseError(1, std::string("omega header lacks '") + key + "'");
    return it->second;
  };
  auto num = [&](const char* key) { return static_cast<std::size_t>(std::stoull(get(key))); };

  const ObjectKind kind = parse_kind(get("kind"));
  auto data = std::make_shared<Dataset>(
      parse_dataset(text, kind, format_for_kind(kind), source_name));
  const auto& name = get("dist");
  OmegaDistribution::Spec spec = DataHoldoutSpec{data, true};
  if (name == "random-time-series") {
    spec = RandomTimeSeriesSpec{num("length_min"), num("length_max"), num("vars"),
                                std::stod(get("element_std"))};
  } else if (name == "random-string") {
    spec = RandomStringSpec{num("length_min"), num("length_max"),
                            static_cast<std::uint32_t>(num("alphabet_size"))};
  } else if (name == "random-vector-set") {
    spec = RandomVectorSetSpec{num("size_min"), num("size_max"), num("dim")};
  } else if (name == "data-holdout") {
    // The original source is not stored; the omegas themselves stand in.
    spec = DataHoldoutSpec{data, get("without_replacement") == "1"};
  } else {
    throw ParseError(1, "unknown omega distribution '" + name + "'");
  }
  OmegaSample sample{data->objects, std::stoull(get("seed")), OmegaDistribution(spec), {}};
  if (sample.distribution.kind() != data->kind) {
    throw KindMismatch("omega header distribution does not match file contents");
  }
  return sample;
}

OmegaSample read_omega_sample(const std::string& path) {
  return parse_omega_sample(read_file(path), path);
}

}  // namespace d2ke
