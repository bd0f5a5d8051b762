#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "satkit/body_model.hpp"
#include "satkit/network.hpp"
#include "satkit/pipeline.hpp"
#include "satkit/scale_map.hpp"
#include "satkit/scene.hpp"
#include "satkit/token_engine.hpp"

namespace satkit {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

json parse_json_text(const std::string& text, const std::string& origin);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
// Two-space indented dump with a trailing newline.
std::string dump(const json& j);

json to_json(const ScaleMap& map);
ScaleMap scale_map_from_json(const json& j);

json to_json(const TokenCounts& counts);
TokenCounts token_counts_from_json(const json& j);
json to_json(const TokenLayout& layout);
TokenLayout token_layout_from_json(const json& j);

json to_json(const Scene& scene);
Scene scene_from_json(const json& j, const std::string& name = "");
Scene load_scene(const std::string& path);

json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::string& path);

json to_json(const BodyModelDef& model);
BodyModelDef body_model_from_json(const json& j);
std::string mesh_to_obj(const Points& vertices, const BodyModelDef& model);

// {"schema_version", "config", "tensors": {name: {"shape": [r, c], "data": [...]}}}
json to_json(const NetworkWeights& w, const ArchConfig& cfg);
NetworkWeights weights_from_json(const json& j, const ArchConfig& cfg);

json to_json(const Prediction& p);
Prediction prediction_from_json(const json& j);

struct PredictionSet {
    std::string scene;
    std::vector<Prediction> predictions;
    std::vector<int> valid;
};
json to_json(const PredictionSet& set);
PredictionSet prediction_set_from_json(const json& j);

json to_json(const LossBreakdown& loss);
json to_json(const EvalReport& report);

}  // namespace satkit
