#pragma once

#include <span>

#include <Eigen/Dense>

#include "d2ke/distances.hpp"
#include "d2ke/objects.hpp"

namespace d2ke {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Worker-count control. Without OpenMP these are no-ops returning 1.
int max_threads();
void set_threads(int threads);

/// RAII override of the worker count.
class ThreadScope {
 public:
  explicit ThreadScope(int threads);
  ~ThreadScope();
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int saved_;
};

// Every cell is computed independently, so the parallel kernels are bitwise
// equal to their serial references under any schedule.

/// D(i, j) = d(rows[i], cols[j]).
RowMatrix distance_matrix(std::span<const StructuredObject> rows,
                          std::span<const StructuredObject> cols, const DistanceMeasure& measure);
RowMatrix distance_matrix_serial(std::span<const StructuredObject> rows,
                                 std::span<const StructuredObject> cols,
                                 const DistanceMeasure& measure);

/// Symmetric all-pairs matrix with zero diagonal; evaluates d(x_i, x_j) for
/// i < j only and mirrors it.
RowMatrix pairwise_distances(std::span<const StructuredObject> objects,
                             const DistanceMeasure& measure);
RowMatrix pairwise_distances_serial(std::span<const StructuredObject> objects,
                                    const DistanceMeasure& measure);

/// Throws KindMismatch naming the first object of the wrong kind.
void require_kind(std::span<const StructuredObject> objects, ObjectKind kind, const char* what);

}  // namespace d2ke
