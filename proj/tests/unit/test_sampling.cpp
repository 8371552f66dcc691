#include "doctest.h"

#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "d2ke/datasets.hpp"
#include "d2ke/errors.hpp"
#include "d2ke/sampling.hpp"
#include "helpers.hpp"

using namespace d2ke;

TEST_CASE("fixed-length random strings have uniform symbols") {
  OmegaDistribution dist(RandomStringSpec{2, 2, 4});
  auto s = sample_omegas(dist, 1000, 7);
  std::array<double, 4> count{};
  for (const auto& o : s.objects) {
    REQUIRE(o.string().size() == 2);
    for (auto c : o.string().symbols()) count[c] += 1;
  }
  const double n = 2000, p = 0.25, se = std::sqrt(p * (1 - p) / n);
  for (double c : count) CHECK(std::abs(c / n - p) <= 4 * se);
}

TEST_CASE("random vector sets lie on the unit sphere") {
  auto s = sample_omegas(OmegaDistribution(RandomVectorSetSpec{3, 15, 3}), 100, 1);
  for (const auto& o : s.objects) {
    const auto& v = o.vector_set();
    CHECK(v.size() >= 3);
    CHECK(v.size() <= 15);
    for (std::size_t i = 0; i < v.size(); ++i) {
      double n2 = 0;
      for (double x : v.element(i)) n2 += x * x;
      CHECK(std::abs(std::sqrt(n2) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("random series respect their ranges") {
  auto s = sample_omegas(OmegaDistribution(RandomTimeSeriesSpec{2, 10, 3, 0.5}), 200, 2);
  for (const auto& o : s.objects) {
    CHECK(o.series().steps() >= 2);
    CHECK(o.series().steps() <= 10);
    CHECK(o.series().vars() == 3);
  }
}

TEST_CASE("holdout without replacement draws a permutation") {
  auto data = std::make_shared<const Dataset>(gen_synthetic(SyntheticTask::kMotifString, 10, 3));
  auto s = sample_omegas(OmegaDistribution(DataHoldoutSpec{data, true}), 10, 4);
  std::set<std::size_t> idx(s.source_indices.begin(), s.source_indices.end());
  CHECK(idx.size() == 10);
  for (std::size_t j = 0; j < 10; ++j) CHECK(s.objects[j] == data->objects[s.source_indices[j]]);
  CHECK_THROWS(sample_omegas(OmegaDistribution(DataHoldoutSpec{data, true}), 11, 4));
  CHECK_NOTHROW(sample_omegas(OmegaDistribution(DataHoldoutSpec{data, false}), 30, 4));
}

TEST_CASE("sampling is deterministic and prefix stable") {
  auto data = std::make_shared<const Dataset>(gen_synthetic(SyntheticTask::kTwoCluster, 40, 3));
  for (const auto& dist :
       {OmegaDistribution(RandomStringSpec{}), OmegaDistribution(RandomTimeSeriesSpec{}),
        OmegaDistribution(RandomVectorSetSpec{}), OmegaDistribution(DataHoldoutSpec{data, true}),
        OmegaDistribution(DataHoldoutSpec{data, false})}) {
    auto big = sample_omegas(dist, 32, 99);
    CHECK(sample_omegas(dist, 32, 99).objects == big.objects);
    auto small = sample_omegas(dist, 9, 99);
    for (std::size_t j = 0; j < 9; ++j) CHECK(small.objects[j] == big.objects[j]);
    CHECK(sample_omegas(dist, 32, 100).objects != big.objects);
  }
}

TEST_CASE("distribution validation") {
  CHECK_THROWS(OmegaDistribution(RandomStringSpec{3, 2, 4}).validate());
  CHECK_THROWS(OmegaDistribution(RandomStringSpec{0, 2, 4}).validate());
  CHECK_THROWS(OmegaDistribution(RandomTimeSeriesSpec{2, 10, 1, 0.0}).validate());
  CHECK_THROWS(OmegaDistribution(RandomVectorSetSpec{3, 15, 0}).validate());
  CHECK_THROWS(OmegaDistribution(DataHoldoutSpec{nullptr, true}).validate());
  CHECK_THROWS(sample_omegas(OmegaDistribution(RandomStringSpec{}), 0, 1));
}

TEST_CASE("default distribution follows the training data") {
  auto d = test::make_dataset({test::str("ab", 3), test::str("abcab", 3), test::str("abca", 3)},
                              {0, 1, 0});
  auto dist = OmegaDistribution::synthetic_default(d);
  const auto& s = std::get<RandomStringSpec>(dist.spec());
  CHECK(s.length_min == 2);
  CHECK(s.length_max == 4);
  CHECK(s.alphabet_size == 3);
  auto ts = gen_synthetic(SyntheticTask::kShiftedSine, 8, 1);
  auto ts_dist = OmegaDistribution::synthetic_default(ts);
  const auto& t = std::get<RandomTimeSeriesSpec>(ts_dist.spec());
  CHECK(t.length_min == 2);
  CHECK(t.length_max == 10);
  CHECK(t.element_std == 1.0);
}

TEST_CASE("unit sphere vector in one dimension is a fair sign") {
  Rng rng(12);
  int plus = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto v = unit_sphere_vector(1, rng);
    REQUIRE(std::abs(std::abs(v[0]) - 1.0) <= 1e-12);
    plus += v[0] > 0;
  }
  CHECK(std::abs(plus / double(n) - 0.5) <= 4 * std::sqrt(0.25 / n));
}

TEST_CASE("unit sphere vector angles are uniform in the plane") {
  Rng rng(2024);
  std::array<double, 8> bins{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto v = unit_sphere_vector(2, rng);
    CHECK(std::abs(std::hypot(v[0], v[1]) - 1.0) <= 1e-12);
    double a = std::atan2(v[1], v[0]) + std::numbers::pi;
    bins[std::min<std::size_t>(7, static_cast<std::size_t>(a / (2 * std::numbers::pi) * 8))] += 1;
  }
  double chi2 = 0.0;
  for (double b : bins) chi2 += (b - n / 8.0) * (b - n / 8.0) / (n / 8.0);
  // chi-square(7) critical value at significance 0.001.
  CHECK(chi2 < 24.322);
  CHECK_THROWS(unit_sphere_vector(0, rng));
}

TEST_CASE("omega files round trip") {
  test::TempDir dir;
  for (const auto& dist : {OmegaDistribution(RandomStringSpec{2, 5, 3}),
                           OmegaDistribution(RandomTimeSeriesSpec{2, 6, 2, 0.75}),
                           OmegaDistribution(RandomVectorSetSpec{3, 4, 2})}) {
    auto s = sample_omegas(dist, 6, 5);
    auto path = dir.file("o" + dist.name() + (dist.kind() == ObjectKind::kString ? ".str.txt"
                                              : dist.kind() == ObjectKind::kTimeSeries
                                                  ? ".ts.tsv"
                                                  : ".vset.jsonl"));
    write_omega_sample(s, path);
    auto back = read_omega_sample(path);
    CHECK(back.objects == s.objects);
    CHECK(back.seed == 5);
    CHECK(back.distribution.describe() == dist.describe());
  }
}
