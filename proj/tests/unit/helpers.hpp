#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "d2ke/objects.hpp"
#include "d2ke/rng.hpp"

namespace d2ke::test {

// Lowercase letters map to symbols 0, 1, 2, ...
inline StructuredObject str(const std::string& s, std::uint32_t alphabet = 4) {
  std::vector<std::uint32_t> sym;
  for (char c : s) sym.push_back(static_cast<std::uint32_t>(c - 'a'));
  return SymbolString(std::move(sym), alphabet);
}

inline StructuredObject series(std::vector<double> v) {
  const auto n = v.size();
  return TimeSeries(n, 1, std::move(v));
}

inline StructuredObject vset(std::size_t dim, std::vector<double> data) {
  return VectorSet(dim, std::move(data));
}

inline StructuredObject random_string(Rng& rng, std::size_t min_len, std::size_t max_len,
                                      std::uint32_t alphabet) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::uint32_t> sym(0, alphabet - 1);
  std::vector<std::uint32_t> s(len(rng));
  for (auto& c : s) c = sym(rng);
  return SymbolString(std::move(s), alphabet);
}

inline StructuredObject random_series(Rng& rng, std::size_t min_len, std::size_t max_len,
                                      std::size_t vars = 1) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::normal_distribution<> g;
  const auto t = len(rng);
  std::vector<double> v(t * vars);
  for (auto& x : v) x = g(rng);
  return TimeSeries(t, vars, std::move(v));
}

inline StructuredObject random_set(Rng& rng, std::size_t min_size, std::size_t max_size,
                                   std::size_t dim) {
  std::uniform_int_distribution<std::size_t> len(min_size, max_size);
  std::normal_distribution<> g;
  std::vector<double> v(len(rng) * dim);
  for (auto& x : v) x = g(rng);
  return VectorSet(dim, std::move(v));
}

inline Dataset make_dataset(std::vector<StructuredObject> objects, std::vector<int> labels) {
  Dataset d;
  d.kind = objects.front().kind();
  d.objects = std::move(objects);
  d.labels = std::move(labels);
  d.ids.resize(d.objects.size());
  for (std::size_t i = 0; i < d.ids.size(); ++i) d.ids[i] = i;
  int top = 0;
  for (int y : d.labels) top = std::max(top, y);
  d.num_classes = static_cast<std::size_t>(top) + 1;
  for (int c = 0; c <= top; ++c) d.meta.label_values.push_back(c);
  return d;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("d2ke_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace d2ke::test
