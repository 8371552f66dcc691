#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "d2ke/embedding.hpp"
#include "d2ke/learners.hpp"

namespace d2ke {

/// Frozen D2KE classifier: the omega sample, gamma and measure plus the
/// trained linear weights. Everything needed to embed and score new objects.
struct SavedModel {
  EmbeddingModel embedding;
  LinearModel linear;
  std::vector<long long> label_values;  // original label per class index
  std::string alphabet;                 // string symbols, empty otherwise
  std::map<std::string, std::string> provenance;
};

std::string serialize_model(const SavedModel& model);
SavedModel deserialize_model(std::string_view text);
void save_model(const SavedModel& model, const std::string& path);
SavedModel load_model(const std::string& path);

}  // namespace d2ke
