#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace d2ke {

enum class ObjectKind { kTimeSeries, kString, kVectorSet };

std::string_view kind_name(ObjectKind kind);
ObjectKind parse_kind(std::string_view name);

/// Multivariate series stored row-major: T time steps of V variables each.
class TimeSeries {
 public:
  TimeSeries(std::size_t steps, std::size_t vars, std::vector<double> values);

  std::size_t steps() const { return steps_; }
  std::size_t vars() const { return vars_; }
  std::span<const double> row(std::size_t t) const {
    return {values_.data() + t * vars_, vars_};
  }
  std::span<const double> values() const { return values_; }

  bool operator==(const TimeSeries&) const = default;

 private:
  std::size_t steps_;
  std::size_t vars_;
  std::vector<double> values_;
};

/// Sequence of alphabet indices; the empty string is legal.
class SymbolString {
 public:
  SymbolString(std::vector<std::uint32_t> symbols, std::uint32_t alphabet_size);

  std::size_t size() const { return symbols_.size(); }
  std::uint32_t alphabet_size() const { return alphabet_size_; }
  std::span<const std::uint32_t> symbols() const { return symbols_; }
  std::uint32_t operator[](std::size_t i) const { return symbols_[i]; }

  bool operator==(const SymbolString&) const = default;

 private:
  std::vector<std::uint32_t> symbols_;
  std::uint32_t alphabet_size_;
};

/// Non-empty multiset of vectors sharing one dimension, stored row-major.
class VectorSet {
 public:
  VectorSet(std::size_t dim, std::vector<double> data);

  std::size_t size() const { return data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> element(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const double> data() const { return data_; }

  bool operator==(const VectorSet&) const = default;

 private:
  std::size_t dim_;
  std::vector<double> data_;
};

class StructuredObject {
 public:
  StructuredObject(TimeSeries s) : value_(std::move(s)) {}
  StructuredObject(SymbolString s) : value_(std::move(s)) {}
  StructuredObject(VectorSet s) : value_(std::move(s)) {}

  ObjectKind kind() const { return static_cast<ObjectKind>(value_.index()); }

  // Throw KindMismatch when the variant holds another kind.
  const TimeSeries& series() const;
  const SymbolString& string() const;
  const VectorSet& vector_set() const;

  bool operator==(const StructuredObject&) const = default;

 private:
  std::variant<TimeSeries, SymbolString, VectorSet> value_;
};

enum class SplitTag { kFull, kTrain, kTest };

struct DatasetMetadata {
  std::string source_path;
  std::uint64_t checksum = 0;
  // Original label value of each class index, in class-index order.
  std::vector<long long> label_values;
  // Free-form provenance (generator parameters, notes).
  std::map<std::string, std::string> extra;

  bool operator==(const DatasetMetadata&) const = default;
};

/// Homogeneous labeled collection. `ids` are stable per-object identifiers
/// that survive splitting and subsetting.
struct Dataset {
  ObjectKind kind = ObjectKind::kString;
  std::vector<StructuredObject> objects;
  std::vector<int> labels;
  std::vector<std::size_t> ids;
  std::size_t num_classes = 0;
  SplitTag split = SplitTag::kFull;
  DatasetMetadata meta;

  std::size_t size() const { return objects.size(); }
  bool empty() const { return objects.empty(); }

  // Checks sizes, kind homogeneity, label range, shared V / p / alphabet.
  void validate() const;

  Dataset subset(std::span<const std::size_t> indices) const;
};

}  // namespace d2ke
