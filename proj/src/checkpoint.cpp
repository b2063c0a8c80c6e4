#include "bst/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace bst {

using nlohmann::json;

void save_checkpoint(const std::string& path, const ModelConfig& config,
                     const NamedTensors& params) {
  check_param_shapes(params, config);
  json tensors = json::object();
  for (const auto& [name, tensor] : params)
    tensors[name] = {{"rows", tensor.rows}, {"cols", tensor.cols}, {"data", tensor.data}};
  json j{{"format_version", kCheckpointVersion},
         {"model", model_config_to_json(config)},
         {"tensors", std::move(tensors)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out.flush()) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::runtime_error("checkpoint " + path + " is corrupt: " + err.what());
  }
  if (!j.is_object() || !j.contains("format_version"))
    throw std::runtime_error("checkpoint " + path + ": missing format_version");
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint " + path + ": format_version " +
                             std::to_string(version) + " unsupported (expected " +
                             std::to_string(kCheckpointVersion) + ")");
  if (!j.contains("model") || !j.contains("tensors"))
    throw std::runtime_error("checkpoint " + path + ": missing model or tensors section");

  Checkpoint ckpt;
  ckpt.config = model_config_from_json(j.at("model"));
  for (const auto& [name, tj] : j.at("tensors").items()) {
    if (!tj.contains("rows") || !tj.contains("cols") || !tj.contains("data"))
      throw std::runtime_error("checkpoint " + path + ": tensor " + name + " is malformed");
    Tensor t(tj.at("rows").get<int>(), tj.at("cols").get<int>());
    auto data = tj.at("data").get<std::vector<double>>();
    if (static_cast<int>(data.size()) != t.size())
      throw std::runtime_error("checkpoint " + path + ": tensor " + name +
                               " data length does not match its shape");
    t.data = std::move(data);
    ckpt.params.emplace(name, std::move(t));
  }
  try {
    check_param_shapes(ckpt.params, ckpt.config);
  } catch (const std::invalid_argument& err) {
    throw std::runtime_error("checkpoint " + path + ": " + err.what());
  }
  return ckpt;
}

}  // namespace bst
