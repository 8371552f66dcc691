#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "d2ke/objects.hpp"

namespace d2ke {

enum class MeasureTag { kDtw, kEdit, kModHausdorff };

/// Which metric axioms a measure claims: (i) non-negativity, (ii) identity of
/// indiscernibles, (iii) symmetry, (iv) triangle inequality.
struct MetricAxioms {
  bool non_negative = false;
  bool identity = false;
  bool symmetric = false;
  bool triangle = false;
};

/// Reusable DP rows. Results never depend on the workspace's prior contents.
struct DistanceWorkspace {
  std::vector<double> prev, curr;
  std::vector<std::size_t> iprev, icurr;
};

double dtw(const TimeSeries& a, const TimeSeries& b, DistanceWorkspace& ws);
double dtw(const TimeSeries& a, const TimeSeries& b);

std::size_t edit_distance(const SymbolString& a, const SymbolString& b, DistanceWorkspace& ws);
std::size_t edit_distance(const SymbolString& a, const SymbolString& b);

enum class GroundDistance { kEuclidean };

double mod_hausdorff(const VectorSet& a, const VectorSet& b,
                     GroundDistance ground = GroundDistance::kEuclidean);

double euclidean(std::span<const double> u, std::span<const double> v);

class DistanceMeasure {
 public:
  explicit DistanceMeasure(MeasureTag tag) : tag_(tag) {}
  static DistanceMeasure from_name(std::string_view name);
  static DistanceMeasure for_kind(ObjectKind kind);

  MeasureTag tag() const { return tag_; }
  std::string_view name() const;
  ObjectKind kind() const;
  MetricAxioms axioms() const;

  // Throws KindMismatch when either object is of the wrong kind.
  double operator()(const StructuredObject& a, const StructuredObject& b,
                    DistanceWorkspace& ws) const;
  double operator()(const StructuredObject& a, const StructuredObject& b) const;

  bool operator==(const DistanceMeasure&) const = default;

 private:
  MeasureTag tag_;
};

}  // namespace d2ke
