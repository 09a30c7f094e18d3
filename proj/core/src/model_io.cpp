#include <fstream>

#include <json.hpp>

#include "ionet/dataset_io.hpp"
#include "ionet/error.hpp"
#include "ionet/neural_odometry.hpp"

namespace ionet {

namespace {

using json = nlohmann::json;

constexpr std::string_view kFormatName = "ionet-weights";

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorKind::kCorruptFile, "weight file: " + what);
}

}  // namespace

std::string serialize_model(const Model& model) {
  model.params.check();
  const ModelShape& s = model.params.shape;
  json doc;
  doc["format"] = kFormatName;
  doc["version"] = kWeightFormatVersion;
  doc["window"] = s.window;
  doc["input_channels"] = s.input;
  doc["hidden"] = s.hidden;
  doc["layers"] = s.layers;
  doc["gate_order"] = "input,forget,cell,output";
  doc["profile"] = model.profile;
  doc["epochs_trained"] = model.epochs_trained;
  doc["normalization"] = {{"channels", {"ax", "ay", "az", "wx", "wy", "wz"}},
                          {"mean", model.norm.mean},
                          {"scale", model.norm.scale}};
  json tensors = json::array();
  for (const ConstTensorView& t : model.params.tensors()) {
    tensors.push_back({{"name", t.name},
                       {"shape", {t.rows, t.cols}},
                       {"data", std::vector<double>(t.data.begin(), t.data.end())}});
  }
  doc["tensors"] = std::move(tensors);
  return doc.dump(1) + "\n";
}

Model deserialize_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    corrupt(std::string("unparseable document (") + e.what() + ")");
  }
  if (!doc.is_object() || doc.value("format", std::string()) != kFormatName) {
    corrupt("missing or wrong format tag");
  }
  Model model;
  try {
    const int version = doc.at("version").get<int>();
    if (version != kWeightFormatVersion) {
      throw Error(ErrorKind::kVersionMismatch,
                  "weight file version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kWeightFormatVersion) + ")");
    }
    ModelShape shape;
    shape.window = doc.at("window").get<int>();
    shape.input = doc.at("input_channels").get<int>();
    shape.hidden = doc.at("hidden").get<int>();
    shape.layers = doc.at("layers").get<int>();
    model.params = ModelParams::zeros(shape);
    model.profile = doc.at("profile").get<std::string>();
    model.epochs_trained = doc.at("epochs_trained").get<int>();
    model.norm.mean = doc.at("normalization").at("mean").get<std::array<double, kImuChannels>>();
    model.norm.scale = doc.at("normalization").at("scale").get<std::array<double, kImuChannels>>();

    const json& tensors = doc.at("tensors");
    auto views = model.params.tensors();
    if (!tensors.is_array() || tensors.size() != views.size()) corrupt("unexpected tensor count");
    for (std::size_t i = 0; i < views.size(); ++i) {
      const json& t = tensors[i];
      if (t.at("name").get<std::string>() != views[i].name) {
        corrupt("expected tensor " + views[i].name + ", found " + t.at("name").get<std::string>());
      }
      const auto shape_rc = t.at("shape").get<std::array<int, 2>>();
      if (shape_rc[0] != views[i].rows || shape_rc[1] != views[i].cols) {
        corrupt("tensor " + views[i].name + " has the wrong shape");
      }
      const json& data = t.at("data");
      if (!data.is_array() || data.size() != views[i].data.size()) {
        corrupt("tensor " + views[i].name + " has the wrong number of values");
      }
      for (std::size_t k = 0; k < views[i].data.size(); ++k) views[i].data[k] = data[k].get<double>();
    }
  } catch (const json::exception& e) {
    corrupt(std::string("malformed field (") + e.what() + ")");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kModelContract) corrupt(e.what());
    throw;
  }
  for (double s : model.norm.scale) {
    if (!(s > 0.0) || !std::isfinite(s)) corrupt("normalization scale must be positive");
  }
  try {
    model.params.check();
  } catch (const Error& e) {
    corrupt(e.what());
  }
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::string text = serialize_model(model);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open for writing: " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return deserialize_model(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace ionet
