#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "d2ke/datasets.hpp"
#include "d2ke/errors.hpp"
#include "helpers.hpp"

using namespace d2ke;

namespace {

bool contains_motif(const SymbolString& s, const std::vector<std::uint32_t>& motif) {
  auto sym = s.symbols();
  return std::search(sym.begin(), sym.end(), motif.begin(), motif.end()) != sym.end();
}

}  // namespace

TEST_CASE("split sizes and determinism") {
  auto d = gen_synthetic(SyntheticTask::kMotifString, 10, 3);
  auto [a, b] = split_dataset(d, 0.7, 11);
  CHECK(a.size() == 7);
  CHECK(b.size() == 3);
  auto [a2, b2] = split_dataset(d, 0.7, 11);
  CHECK(a.ids == a2.ids);
  CHECK(b.ids == b2.ids);
  CHECK(a.split == SplitTag::kTrain);
  CHECK(b.split == SplitTag::kTest);
}

TEST_CASE("split is a stratified partition") {
  auto d = gen_synthetic(SyntheticTask::kTwoCluster, 10, 4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto [a, b] = split_dataset(d, 0.6, seed);
    std::multiset<std::size_t> all(a.ids.begin(), a.ids.end());
    all.insert(b.ids.begin(), b.ids.end());
    CHECK(all == std::multiset<std::size_t>(d.ids.begin(), d.ids.end()));
    CHECK(std::count(a.labels.begin(), a.labels.end(), 0) == 3);
    CHECK(std::count(b.labels.begin(), b.labels.end(), 1) == 2);
    CHECK(std::is_sorted(a.ids.begin(), a.ids.end()));
  }
}

TEST_CASE("split errors") {
  auto d = gen_synthetic(SyntheticTask::kMotifString, 4, 1);
  auto two = d.subset(std::vector<std::size_t>{0, 1});
  CHECK_THROWS(split_dataset(two, 0.999, 1));
  CHECK_THROWS(split_dataset(d, 0.0, 1));
  CHECK_THROWS(split_dataset(d, 1.0, 1));
}

TEST_CASE("motif-string construction") {
  auto d = gen_synthetic(SyntheticTask::kMotifString, 100, 9);
  const std::vector<std::uint32_t> motif{0, 1, 2};  // "abc" over "abcd"
  int with = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    bool has = contains_motif(d.objects[i].string(), motif);
    CHECK(has == (d.labels[i] == 1));
    with += has;
  }
  CHECK(with == 50);
  CHECK(d.meta.extra.count("motif"));
}

TEST_CASE("synthetic generation is deterministic") {
  for (auto task : {SyntheticTask::kMotifString, SyntheticTask::kShiftedSine,
                    SyntheticTask::kTwoCluster}) {
    CHECK(gen_synthetic(task, 30, 42).objects == gen_synthetic(task, 30, 42).objects);
    CHECK(gen_synthetic(task, 30, 42).objects != gen_synthetic(task, 30, 43).objects);
  }
}

TEST_CASE("shifted-sine shape") {
  auto d = gen_synthetic(SyntheticTask::kShiftedSine, 20, 2);
  SyntheticParams p;
  REQUIRE(d.size() == 20);
  for (const auto& o : d.objects) {
    const auto& s = o.series();
    CHECK(s.vars() == 1);
    CHECK(s.steps() >= p.series_length_min);
    CHECK(s.steps() <= p.series_length_max);
    for (double v : s.values()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("synthetic errors") {
  CHECK_THROWS(gen_synthetic(SyntheticTask::kTwoCluster, 3, 1));
  CHECK_THROWS_AS(gen_synthetic("spiral", 10, 1), ConfigError);
}

TEST_CASE("series scaler standardizes training data") {
  auto d = gen_synthetic(SyntheticTask::kShiftedSine, 20, 2);
  auto scaler = SeriesScaler::fit(d);
  auto z = scaler.apply(d);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& o : z.objects) {
    for (double v : o.series().values()) {
      sum += v;
      sq += v * v;
      ++n;
    }
  }
  CHECK(std::abs(sum / n) < 1e-12);
  CHECK(std::abs(sq / n - 1.0) < 1e-9);
}

TEST_CASE("median string length") {
  auto d = test::make_dataset({test::str("a"), test::str("abcd"), test::str("ab"), test::str("")},
                              {0, 1, 0, 1});
  CHECK(median_string_length(d) == 1);
}
