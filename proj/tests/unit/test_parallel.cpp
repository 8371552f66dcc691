#include "doctest.h"

#include "d2ke/embedding.hpp"
#include "d2ke/errors.hpp"
#include "d2ke/parallel.hpp"
#include "helpers.hpp"

using namespace d2ke;
using namespace d2ke::test;

TEST_CASE("parallel kernels equal their serial references at any thread count") {
  Rng rng(21);
  std::vector<StructuredObject> rows, cols;
  for (int i = 0; i < 37; ++i) rows.push_back(random_series(rng, 3, 25, 2));
  for (int i = 0; i < 13; ++i) cols.push_back(random_series(rng, 2, 10, 2));
  DistanceMeasure m(MeasureTag::kDtw);
  const auto ref = distance_matrix_serial(rows, cols, m);
  const auto pref = pairwise_distances_serial(rows, m);
  for (int threads : {1, 2, 3, 8}) {
    ThreadScope scope(threads);
    CHECK(distance_matrix(rows, cols, m) == ref);
    CHECK(pairwise_distances(rows, m) == pref);
  }
  for (Eigen::Index i = 0; i < pref.rows(); ++i) {
    CHECK(pref(i, i) == 0.0);
    for (Eigen::Index j = 0; j < pref.cols(); ++j) CHECK(pref(i, j) == pref(j, i));
  }
}

TEST_CASE("embed_dataset is schedule independent") {
  Rng rng(5);
  std::vector<StructuredObject> xs;
  for (int i = 0; i < 41; ++i) xs.push_back(random_set(rng, 2, 9, 3));
  EmbeddingModel model(sample_omegas(OmegaDistribution(RandomVectorSetSpec{3, 15, 3}), 29, 6), 0.8,
                       DistanceMeasure(MeasureTag::kModHausdorff));
  const auto ref = embed_dataset_serial(model, xs);
  for (int threads : {1, 4, 8}) {
    ThreadScope scope(threads);
    CHECK(embed_dataset(model, xs) == ref);
  }
}

TEST_CASE("thread scope restores the worker count") {
  const int before = max_threads();
  {
    ThreadScope scope(3);
    CHECK(max_threads() == 3);
  }
  CHECK(max_threads() == before);
}

TEST_CASE("kind errors inside parallel regions surface as exceptions") {
  std::vector<StructuredObject> rows{str("ab"), series({1.0}), str("b")};
  std::vector<StructuredObject> cols{str("a")};
  CHECK_THROWS_AS(distance_matrix(rows, cols, DistanceMeasure(MeasureTag::kEdit)), KindMismatch);
  CHECK_THROWS_AS(pairwise_distances(rows, DistanceMeasure(MeasureTag::kEdit)), KindMismatch);
  CHECK_THROWS_AS(require_kind(rows, ObjectKind::kString, "rows"), KindMismatch);
}
