#include "d2ke/objects.hpp"

#include <cmath>
#include <stdexcept>

#include "d2ke/errors.hpp"

namespace d2ke {

std::string_view kind_name(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kTimeSeries:
      return "time-series";
    case ObjectKind::kString:
      return "string";
    case ObjectKind::kVectorSet:
      return "vector-set";
  }
  return "unknown";
}

ObjectKind parse_kind(std::string_view name) {
  if (name == "time-series" || name == "ts") return ObjectKind::kTimeSeries;
  if (name == "string" || name == "str") return ObjectKind::kString;
  if (name == "vector-set" || name == "vset") return ObjectKind::kVectorSet;
  throw ConfigError("unknown object kind '" + std::string(name) + "'");
}

TimeSeries::TimeSeries(std::size_t steps, std::size_t vars, std::vector<double> values)
    : steps_(steps), vars_(vars), values_(std::move(values)) {
  if (steps_ == 0 || vars_ == 0) {
    throw std::invalid_argument("time series needs T >= 1 and V >= 1");
  }
  if (values_.size() != steps_ * vars_) {
    throw DimensionMismatch("time series has " + std::to_string(values_.size()) +
                            " values, expected T*V = " + std::to_string(steps_ * vars_));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("time series entry is not finite");
  }
}

SymbolString::SymbolString(std::vector<std::uint32_t> symbols, std::uint32_t alphabet_size)
    : symbols_(std::move(symbols)), alphabet_size_(alphabet_size) {
  if (alphabet_size_ == 0) throw std::invalid_argument("alphabet size must be positive");
  for (auto s : symbols_) {
    if (s >= alphabet_size_) {
      throw std::invalid_argument("symbol index " + std::to_string(s) +
                                  " outside alphabet of size " + std::to_string(alphabet_size_));
    }
  }
}

VectorSet::VectorSet(std::size_t dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw std::invalid_argument("vector set dimension must be positive");
  if (data_.empty()) throw std::invalid_argument("vector set must be non-empty");
  if (data_.size() % dim_ != 0) {
    throw DimensionMismatch("vector set data is not a multiple of dimension " +
                            std::to_string(dim_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw std::invalid_argument("vector set entry is not finite");
  }
}

const TimeSeries& StructuredObject::series() const {
  if (auto* p = std::get_if<TimeSeries>(&value_)) return *p;
  throw KindMismatch("expected time-series, got " + std::string(kind_name(kind())));
}

const SymbolString& StructuredObject::string() const {
  if (auto* p = std::get_if<SymbolString>(&value_)) return *p;
  throw KindMismatch("expected string, got " + std::string(kind_name(kind())));
}

const VectorSet& StructuredObject::vector_set() const {
  if (auto* p = std::get_if<VectorSet>(&value_)) return *p;
  throw KindMismatch("expected vector-set, got " + std::string(kind_name(kind())));
}

namespace {

// Width shared by every object of a dataset: V, alphabet size or p.
std::size_t object_width(const StructuredObject& o) {
  switch (o.kind()) {
    case ObjectKind::kTimeSeries:
      return o.series().vars();
    case ObjectKind::kString:
      return o.string().alphabet_size();
    case ObjectKind::kVectorSet:
      return o.vector_set().dim();
  }
  return 0;
}

}  // namespace

void Dataset::validate() const {
  if (labels.size() != objects.size() || ids.size() != objects.size()) {
    throw std::invalid_argument("dataset objects, labels and ids differ in length");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].kind() != kind) {
      throw KindMismatch("object " + std::to_string(i) + " is " +
                         std::string(kind_name(objects[i].kind())) + " in a " +
                         std::string(kind_name(kind)) + " dataset");
    }
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw std::invalid_argument("label " + std::to_string(labels[i]) + " of object " +
                                  std::to_string(i) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
    }
    if (object_width(objects[i]) != object_width(objects[0])) {
      throw DimensionMismatch("object " + std::to_string(i) + " has width " +
                              std::to_string(object_width(objects[i])) + ", object 0 has " +
                              std::to_string(object_width(objects[0])));
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.kind = kind;
  out.num_classes = num_classes;
  out.split = split;
  out.meta = meta;
  out.objects.reserve(indices.size());
  out.labels.reserve(indices.size());
  out.ids.reserve(indices.size());
  for (auto i : indices) {
    out.objects.push_back(objects.at(i));
    out.labels.push_back(labels.at(i));
    out.ids.push_back(ids.at(i));
  }
  return out;
}

}  // namespace d2ke
