#include <string>

#include "satkit/error.hpp"
#include "satkit/serialize.hpp"

namespace satkit {

json to_json(const NetworkWeights& w, const ArchConfig& cfg) {
    json tensors = json::object();
    visit_tensors(w, [&](const std::string& name, const Mat& t) {
        tensors[name] = {{"shape", {t.rows(), t.cols()}},
                         {"data", std::vector<double>(t.data(), t.data() + t.size())}};
    });
    return {{"schema_version", kSchemaVersion},
            {"config",
             {{"d_model", cfg.d_model}, {"heads", cfg.heads}, {"mlp_ratio", cfg.mlp_ratio},
              {"n_lr", cfg.n_lr}, {"n_hr", cfg.n_hr}, {"n_sa", cfg.n_sa}, {"n_dec", cfg.n_dec},
              {"queries", cfg.queries}, {"patch", cfg.patch}, {"scale_hidden", cfg.scale_hidden},
              {"joints", cfg.joints}, {"channels", cfg.channels}}},
            {"tensors", tensors}};
}

NetworkWeights weights_from_json(const json& j, const ArchConfig& cfg) {
    if (!j.is_object() || !j.contains("tensors") || !j.at("tensors").is_object()) {
        throw Error(Errc::schema, "weights: expected an object with a 'tensors' map");
    }
    if (j.value("schema_version", -1) != kSchemaVersion) {
        throw Error(Errc::schema, "weights.schema_version: unsupported");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "schema_version" && it.key() != "config" && it.key() != "tensors") {
            throw Error(Errc::schema, "weights." + it.key() + ": unknown field");
        }
    }
    // init_weights gives the expected shapes; every tensor is then overwritten.
    NetworkWeights w = init_weights(cfg);
    const json& tensors = j.at("tensors");
    std::size_t consumed = 0;
    visit_tensors(w, [&](const std::string& name, Mat& t) {
        const std::string path = "weights.tensors." + name;
        if (!tensors.contains(name)) throw Error(Errc::schema, path + ": missing tensor");
        const json& entry = tensors.at(name);
        std::vector<long> shape;
        std::vector<double> data;
        try {
            shape = entry.at("shape").get<std::vector<long>>();
            data = entry.at("data").get<std::vector<double>>();
        } catch (const json::exception&) {
            throw Error(Errc::schema, path + ": expected {shape, data}");
        }
        if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols()) {
            throw Error(Errc::schema, path + ": shape does not match the architecture config");
        }
        if (static_cast<long>(data.size()) != t.size()) {
            throw Error(Errc::schema, path + ": data length does not match shape");
        }
        std::copy(data.begin(), data.end(), t.data());
        ++consumed;
    });
    if (consumed != tensors.size()) throw Error(Errc::schema, "weights.tensors: unknown tensors present");
    return w;
}

}  // namespace satkit
