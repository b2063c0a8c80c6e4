#pragma once

#include <string>

#include "json.hpp"

#include "bst/model.hpp"
#include "bst/synth.hpp"
#include "bst/train.hpp"

namespace bst {

nlohmann::json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const nlohmann::json& j);

nlohmann::json block_to_json(const BlockConfig& block);
BlockConfig block_from_json(const nlohmann::json& j);

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

nlohmann::json gen_config_to_json(const GenConfig& gen);
GenConfig gen_config_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& train);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Whole-run configuration: generator, model shape, training recipe. Any part
// may be omitted in the file; defaults fill the gaps (schema defaults to the
// one implied by the generator).
struct RunConfig {
  GenConfig gen;
  ModelConfig model;
  TrainConfig train;
  bool explicit_schema = false;
};

RunConfig default_run_config();
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& run);
RunConfig load_run_config(const std::string& path);

}  // namespace bst
