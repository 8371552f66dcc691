#include "d2ke/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "d2ke/errors.hpp"

namespace d2ke {

double euclidean(std::span<const double> u, std::span<const double> v) {
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double diff = u[k] - v[k];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

// Two-row DP over the (T_a+1) x (T_b+1) cumulative cost table.
double dtw(const TimeSeries& a, const TimeSeries& b, DistanceWorkspace& ws) {
  if (a.vars() != b.vars()) {
    throw DimensionMismatch("dtw: series have " + std::to_string(a.vars()) + " and " +
                            std::to_string(b.vars()) + " variables");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t m = b.steps();
  ws.prev.assign(m + 1, inf);
  ws.curr.assign(m + 1, inf);
  ws.prev[0] = 0.0;
  for (std::size_t i = 1; i <= a.steps(); ++i) {
    auto ra = a.row(i - 1);
    ws.curr[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      double best = std::min({ws.prev[j - 1], ws.prev[j], ws.curr[j - 1]});
      ws.curr[j] = best + euclidean(ra, b.row(j - 1));
    }
    std::swap(ws.prev, ws.curr);
  }
  return ws.prev[m];
}

double dtw(const TimeSeries& a, const TimeSeries& b) {
  DistanceWorkspace ws;
  return dtw(a, b, ws);
}

std::size_t edit_distance(const SymbolString& a, const SymbolString& b, DistanceWorkspace& ws) {
  if (a.alphabet_size() != b.alphabet_size()) {
    throw DimensionMismatch("edit distance: alphabets of size " +
                            std::to_string(a.alphabet_size()) + " and " +
                            std::to_string(b.alphabet_size()));
  }
  const std::size_t m = b.size();
  ws.iprev.resize(m + 1);
  ws.icurr.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) ws.iprev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    ws.icurr[0] = i;
    const auto ai = a[i - 1];
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = ws.iprev[j - 1] + (ai == b[j - 1] ? 0 : 1);
      ws.icurr[j] = std::min({sub, ws.iprev[j] + 1, ws.icurr[j - 1] + 1});
    }
    std::swap(ws.iprev, ws.icurr);
  }
  return ws.iprev[m];
}

std::size_t edit_distance(const SymbolString& a, const SymbolString& b) {
  DistanceWorkspace ws;
  return edit_distance(a, b, ws);
}

namespace {

// Mean over elements of `from` of the distance to the nearest element of `to`.
double directed_average(const VectorSet& from, const VectorSet& to) {
  double total = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    auto u = from.element(i);
    for (std::size_t j = 0; j < to.size(); ++j) best = std::min(best, euclidean(u, to.element(j)));
    total += best;
  }
  return total / static_cast<double>(from.size());
}

}  // namespace

double mod_hausdorff(const VectorSet& a, const VectorSet& b, GroundDistance) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("mod_hausdorff: dimensions " + std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  }
  // VectorSet cannot be empty, so both averages are well defined.
  return std::max(directed_average(a, b), directed_average(b, a));
}

DistanceMeasure DistanceMeasure::from_name(std::string_view name) {
  if (name == "dtw") return DistanceMeasure(MeasureTag::kDtw);
  if (name == "edit") return DistanceMeasure(MeasureTag::kEdit);
  if (name == "mod-hausdorff") return DistanceMeasure(MeasureTag::kModHausdorff);
  throw ConfigError("unknown distance measure '" + std::string(name) + "'");
}

DistanceMeasure DistanceMeasure::for_kind(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kTimeSeries:
      return DistanceMeasure(MeasureTag::kDtw);
    case ObjectKind::kString:
      return DistanceMeasure(MeasureTag::kEdit);
    case ObjectKind::kVectorSet:
      return DistanceMeasure(MeasureTag::kModHausdorff);
  }
  return DistanceMeasure(MeasureTag::kEdit);
}

std::string_view DistanceMeasure::name() const {
  switch (tag_) {
    case MeasureTag::kDtw:
      return "dtw";
    case MeasureTag::kEdit:
      return "edit";
    case MeasureTag::kModHausdorff:
      return "mod-hausdorff";
  }
  return "unknown";
}

ObjectKind DistanceMeasure::kind() const {
  switch (tag_) {
    case MeasureTag::kDtw:
      return ObjectKind::kTimeSeries;
    case MeasureTag::kEdit:
      return ObjectKind::kString;
    case MeasureTag::kModHausdorff:
      return ObjectKind::kVectorSet;
  }
  return ObjectKind::kString;
}

MetricAxioms DistanceMeasure::axioms() const {
  if (tag_ == MeasureTag::kEdit) return {true, true, true, true};
  return {true, false, true, false};
}

double DistanceMeasure::operator()(const StructuredObject& a, const StructuredObject& b,
                                   DistanceWorkspace& ws) const {
  switch (tag_) {
    case MeasureTag::kDtw:
      return dtw(a.series(), b.series(), ws);
    case MeasureTag::kEdit:
      return static_cast<double>(edit_distance(a.string(), b.string(), ws));
    case MeasureTag::kModHausdorff:
      return mod_hausdorff(a.vector_set(), b.vector_set());
  }
  return 0.0;
}

double DistanceMeasure::operator()(const StructuredObject& a, const StructuredObject& b) const {
  DistanceWorkspace ws;
  return (*this)(a, b, ws);
}

}  // namespace d2ke
