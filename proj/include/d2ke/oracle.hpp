#pragma once

#include <cstddef>

#include "d2ke/distances.hpp"

namespace d2ke {

// Slow, definition-level distance evaluation used to check the DP kernels.
// Size caps keep the exhaustive searches tractable.
inline constexpr std::size_t kOracleMaxSteps = 8;
inline constexpr std::size_t kOracleMaxStringLength = 6;
inline constexpr std::size_t kOracleMaxSetSize = 5;

// Minimum over every monotone warping path, enumerated recursively.
double oracle_dtw(const TimeSeries& a, const TimeSeries& b);
// Breadth-first search over single-symbol edits starting from `a`.
std::size_t oracle_edit(const SymbolString& a, const SymbolString& b);
// Full pairwise ground-distance table, then both directed averages.
double oracle_mod_hausdorff(const VectorSet& a, const VectorSet& b);

double oracle_distance(const DistanceMeasure& measure, const StructuredObject& a,
                       const StructuredObject& b);

}  // namespace d2ke
