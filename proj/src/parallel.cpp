#include "d2ke/parallel.hpp"

#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "d2ke/errors.hpp"

namespace d2ke {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

ThreadScope::ThreadScope(int threads) : saved_(max_threads()) { set_threads(threads); }
ThreadScope::~ThreadScope() { set_threads(saved_); }

void require_kind(std::span<const StructuredObject> objects, ObjectKind kind, const char* what) {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].kind() != kind) {
      throw KindMismatch(std::string(what) + " object " + std::to_string(i) + " is " +
                         std::string(kind_name(objects[i].kind())) + ", expected " +
                         std::string(kind_name(kind)));
    }
  }
}

namespace {

// Keeps the exception of the lowest failing cell so error reports do not
// depend on the schedule.
class FirstError {
 public:
  void capture(std::ptrdiff_t cell) {
#pragma omp critical(d2ke_first_error)
    {
      if (!error_ || cell < cell_) {
        error_ = std::current_exception();
        cell_ = cell;
      }
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
  std::ptrdiff_t cell_ = 0;
};

}  // namespace

RowMatrix distance_matrix(std::span<const StructuredObject> rows,
                          std::span<const StructuredObject> cols, const DistanceMeasure& measure) {
  require_kind(rows, measure.kind(), "row");
  require_kind(cols, measure.kind(), "column");
  const auto n_rows = static_cast<std::ptrdiff_t>(rows.size());
  const auto n_cols = static_cast<std::ptrdiff_t>(cols.size());
  RowMatrix out(n_rows, n_cols);
  FirstError first;
#pragma omp parallel
  {
    DistanceWorkspace ws;
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t cell = 0; cell < n_rows * n_cols; ++cell) {
      const auto i = cell / n_cols, j = cell % n_cols;
      try {
        out(i, j) = measure(rows[i], cols[j], ws);
      } catch (...) {
        first.capture(cell);
      }
    }
  }
  first.rethrow();
  return out;
}

RowMatrix distance_matrix_serial(std::span<const StructuredObject> rows,
                                 std::span<const StructuredObject> cols,
                                 const DistanceMeasure& measure) {
  require_kind(rows, measure.kind(), "row");
  require_kind(cols, measure.kind(), "column");
  RowMatrix out(rows.size(), cols.size());
  DistanceWorkspace ws;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = measure(rows[i], cols[j], ws);
  }
  return out;
}

RowMatrix pairwise_distances(std::span<const StructuredObject> objects,
                             const DistanceMeasure& measure) {
  require_kind(objects, measure.kind(), "dataset");
  const auto n = static_cast<std::ptrdiff_t>(objects.size());
  RowMatrix out = RowMatrix::Zero(n, n);
  FirstError first;
#pragma omp parallel
  {
    DistanceWorkspace ws;
    // Row i owns cells (i, j > i); rows shrink, so hand them out dynamically.
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      for (std::ptrdiff_t j = i + 1; j < n; ++j) {
        try {
          out(i, j) = measure(objects[i], objects[j], ws);
        } catch (...) {
          first.capture(i * n + j);
        }
      }
    }
  }
  first.rethrow();
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  }
  return out;
}

RowMatrix pairwise_distances_serial(std::span<const StructuredObject> objects,
                                    const DistanceMeasure& measure) {
  require_kind(objects, measure.kind(), "dataset");
  const auto n = objects.size();
  RowMatrix out = RowMatrix::Zero(n, n);
  DistanceWorkspace ws;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out(i, j) = measure(objects[i], objects[j], ws);
      out(j, i) = out(i, j);
    }
  }
  return out;
}

}  // namespace d2ke
