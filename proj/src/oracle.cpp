#include "d2ke/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "d2ke/errors.hpp"

namespace d2ke {

namespace {

double walk_paths(const TimeSeries& a, const TimeSeries& b, std::size_t i, std::size_t j) {
  double here = euclidean(a.row(i), b.row(j));
  if (i + 1 == a.steps() && j + 1 == b.steps()) return here;
  double best = std::numeric_limits<double>::infinity();
  if (i + 1 < a.steps()) best = std::min(best, walk_paths(a, b, i + 1, j));
  if (j + 1 < b.steps()) best = std::min(best, walk_paths(a, b, i, j + 1));
  if (i + 1 < a.steps() && j + 1 < b.steps()) best = std::min(best, walk_paths(a, b, i + 1, j + 1));
  return here + best;
}

}  // namespace

double oracle_dtw(const TimeSeries& a, const TimeSeries& b) {
  if (a.steps() > kOracleMaxSteps || b.steps() > kOracleMaxSteps) {
    throw std::invalid_argument("oracle dtw limited to T <= " + std::to_string(kOracleMaxSteps));
  }
  if (a.vars() != b.vars()) throw DimensionMismatch("oracle dtw: variable counts differ");
  return walk_paths(a, b, 0, 0);
}

std::size_t oracle_edit(const SymbolString& a, const SymbolString& b) {
  if (a.size() > kOracleMaxStringLength || b.size() > kOracleMaxStringLength) {
    throw std::invalid_argument("oracle edit limited to length <= " +
                                std::to_string(kOracleMaxStringLength));
  }
  if (a.alphabet_size() != b.alphabet_size()) throw DimensionMismatch("oracle edit: alphabets differ");

  using Word = std::vector<std::uint32_t>;
  const Word start(a.symbols().begin(), a.symbols().end());
  const Word target(b.symbols().begin(), b.symbols().end());
  // Optimal scripts never need symbols absent from the target, nor words
  // longer than the longer endpoint.
  std::set<std::uint32_t> useful(target.begin(), target.end());
  const std::size_t max_len = std::max(start.size(), target.size());

  std::map<Word, std::size_t> depth{{start, 0}};
  std::deque<Word> queue{start};
  while (!queue.empty()) {
    Word w = queue.front();
    queue.pop_front();
    const std::size_t d = depth[w];
    if (w == target) return d;
    auto visit = [&](Word next) {
      if (depth.emplace(next, d + 1).second) queue.push_back(std::move(next));
    };
    for (std::size_t p = 0; p < w.size(); ++p) {
      Word del = w;
      del.erase(del.begin() + static_cast<std::ptrdiff_t>(p));
      visit(std::move(del));
      for (auto s : useful) {
        if (s == w[p]) continue;
        Word sub = w;
        sub[p] = s;
        visit(std::move(sub));
      }
    }
    if (w.size() < max_len) {
      for (std::size_t p = 0; p <= w.size(); ++p) {
        for (auto s : useful) {
          Word ins = w;
          ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(p), s);
          visit(std::move(ins));
        }
      }
    }
  }
  throw Error("oracle edit: target unreachable");
}

double oracle_mod_hausdorff(const VectorSet& a, const VectorSet& b) {
  if (a.size() > kOracleMaxSetSize || b.size() > kOracleMaxSetSize) {
    throw std::invalid_argument("oracle mod-hausdorff limited to <= " +
                                std::to_string(kOracleMaxSetSize) + " elements");
  }
  if (a.dim() != b.dim()) throw DimensionMismatch("oracle mod-hausdorff: dimensions differ");
  const std::size_t m = a.size(), n = b.size();
  std::vector<double> ground(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < a.dim(); ++k) {
        sq += std::pow(a.element(i)[k] - b.element(j)[k], 2);
      }
      ground[i * n + j] = std::sqrt(sq);
    }
  }
  double a_to_b = 0.0, b_to_a = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    a_to_b += *std::min_element(ground.begin() + static_cast<std::ptrdiff_t>(i * n),
                                ground.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
  }
  for (std::size_t j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) best = std::min(best, ground[i * n + j]);
    b_to_a += best;
  }
  return std::max(a_to_b / static_cast<double>(m), b_to_a / static_cast<double>(n));
}

double oracle_distance(const DistanceMeasure& measure, const StructuredObject& a,
                       const StructuredObject& b) {
  switch (measure.tag()) {
    case MeasureTag::kDtw:
      return oracle_dtw(a.series(), b.series());
    case MeasureTag::kEdit:
      return static_cast<double>(oracle_edit(a.string(), b.string()));
    case MeasureTag::kModHausdorff:
      return oracle_mod_hausdorff(a.vector_set(), b.vector_set());
  }
  return 0.0;
}

}  // namespace d2ke
