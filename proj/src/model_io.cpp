#include "d2ke/model_io.hpp"

#include "json.hpp"

#include "d2ke/errors.hpp"
#include "d2ke/io.hpp"

namespace d2ke {

using nlohmann::json;

std::string serialize_model(const SavedModel& model) {
  json j;
  j["format"] = "d2ke-model";
  j["gamma"] = model.embedding.gamma();
  j["measure"] = std::string(model.embedding.measure().name());
  j["omegas"] = format_omega_sample(model.embedding.omegas(), model.alphabet);
  j["num_classes"] = model.linear.num_classes;
  j["mu"] = model.linear.mu;
  j["loss"] = std::string(loss_name(model.linear.loss));
  j["weights"] = json::array();
  for (const auto& w : model.linear.weights) {
    j["weights"].push_back(std::vector<double>(w.data(), w.data() + w.size()));
  }
  j["label_values"] = model.label_values;
  j["alphabet"] = model.alphabet;
  j["provenance"] = model.provenance;
  // nlohmann prints doubles with round-trip precision.
  return j.dump(1) + "\n";
}

SavedModel deserialize_model(std::string_view text) {
  try {
    auto j = json::parse(text);
    if (j.at("format") != "d2ke-model") throw ParseError(0, "not a d2ke model file");
    auto omegas = parse_omega_sample(j.at("omegas").get<std::string>(), "<model>");
    SavedModel m{EmbeddingModel(std::move(omegas), j.at("gamma").get<double>(),
                                DistanceMeasure::from_name(j.at("measure").get<std::string>())),
                 {}, {}, {}, {}};
    m.linear.num_classes = j.at("num_classes").get<std::size_t>();
    m.linear.mu = j.at("mu").get<double>();
    m.linear.loss = parse_loss(j.at("loss").get<std::string>());
    for (const auto& w : j.at("weights")) {
      auto v = w.get<std::vector<double>>();
      if (v.size() != m.embedding.R()) throw DimensionMismatch("weight length differs from R");
      m.linear.weights.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    }
    m.label_values = j.at("label_values").get<std::vector<long long>>();
    m.alphabet = j.at("alphabet").get<std::string>();
    m.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("invalid model file: ") + e.what());
  }
}

void save_model(const SavedModel& model, const std::string& path) {
  write_file(path, serialize_model(model));
}

SavedModel load_model(const std::string& path) { return deserialize_model(read_file(path)); }

}  // namespace d2ke
