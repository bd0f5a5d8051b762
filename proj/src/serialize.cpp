#include "satkit/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "satkit/error.hpp"

namespace satkit {

namespace {

// Strict object reader: every key must be consumed or finish() throws.
class Reader {
   public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw Error(Errc::schema, at(key) + ": missing required field");
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key) {
        const json& v = raw(key);
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            throw Error(Errc::schema, at(key) + ": wrong type");
        }
    }

    template <class T>
    T get_or(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        return get<T>(key);
    }

    // Marks an optional key as known without reading it.
    void allow(const std::string& key) { seen_.insert(key); }

    Reader child(const std::string& key) { return Reader(raw(key), at(key)); }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const std::string& path() const { return path_; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw Error(Errc::schema, at(it.key()) + ": unknown field");
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error(Errc::schema, (path_.empty() ? std::string("<root>") : path_) + ": " + msg);
    }

   private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check_version(Reader& r) {
    const int v = r.get<int>("schema_version");
    if (v != kSchemaVersion) r.fail("unsupported schema_version " + std::to_string(v));
}

json points_to_json(const Points& p) {
    json out = json::array();
    for (Eigen::Index i = 0; i < p.rows(); ++i) out.push_back({p(i, 0), p(i, 1), p(i, 2)});
    return out;
}

Points points_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw Error(Errc::schema, path + ": expected an array of 3-vectors");
    Points p(j.size(), 3);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& row = j[i];
        if (!row.is_array() || row.size() != 3) {
            throw Error(Errc::schema, path + "[" + std::to_string(i) + "]: expected 3 numbers");
        }
        for (int k = 0; k < 3; ++k) {
            if (!row[k].is_number()) throw Error(Errc::schema, path + "[" + std::to_string(i) + "]: not a number");
            p(i, k) = row[k].get<double>();
        }
    }
    return p;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw Error(Errc::schema, path + ": expected a non-empty 2-D array");
    }
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw Error(Errc::schema, path + "[" + std::to_string(r) + "]: ragged row");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw Error(Errc::schema, path + ": not a number");
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& path) {
    std::vector<double> v;
    try {
        v = j.get<std::vector<double>>();
    } catch (const json::exception&) {
        throw Error(Errc::schema, path + ": expected an array of numbers");
    }
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json box_to_json(const BBox& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }

BBox box_from_json(const json& j, const std::string& path) {
    const Eigen::VectorXd v = vector_from_json(j, path);
    if (v.size() != 4) throw Error(Errc::schema, path + ": expected [x_min, y_min, x_max, y_max]");
    return {v[0], v[1], v[2], v[3]};
}

json dims_to_json(const ImageDims& d) { return {{"width", d.width}, {"height", d.height}}; }

ImageDims dims_from_json(Reader r) {
    ImageDims d{r.get<int>("width"), r.get<int>("height")};
    r.finish();
    return d;
}

template <class Fn>
auto validating(Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw Error(Errc::schema, e.what());
    }
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is a 1-based offset; report it as line:column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(Errc::parse, origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                     ": " + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::io, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_json_text(ss.str(), path);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io, "cannot open " + path + " for writing");
    f << text;
    if (!f) throw Error(Errc::io, "failed writing " + path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---- scale maps and layouts ----

json to_json(const ScaleMap& map) {
    std::vector<double> c, s;
    for (const auto& e : map.entries) {
        c.push_back(e.c);
        s.push_back(e.s);
    }
    return {{"schema_version", kSchemaVersion}, {"rows", map.rows}, {"cols", map.cols},
            {"confidence", c}, {"scale", s}};
}

ScaleMap scale_map_from_json(const json& j) {
    Reader r(j, "");
    check_version(r);
    ScaleMap map(r.get<int>("rows"), r.get<int>("cols"));
    const auto c = r.get<std::vector<double>>("confidence");
    const auto s = r.get<std::vector<double>>("scale");
    r.finish();
    if (c.size() != map.entries.size() || s.size() != map.entries.size()) {
        throw Error(Errc::schema, "scale map arrays must have rows*cols entries");
    }
    for (std::size_t i = 0; i < c.size(); ++i) map.entries[i] = {c[i], s[i]};
    validate(map);
    return map;
}

json to_json(const TokenCounts& k) {
    return {{"k_lr", k.k_lr},       {"k_b", k.k_b},         {"k_b_pooled", k.k_b_pooled},
            {"pooled_groups", k.pooled_groups}, {"remainder", k.remainder}, {"k_small", k.k_small},
            {"k_large", k.k_large}, {"k_hr", k.k_hr},       {"k_sa", k.k_sa}};
}

TokenCounts token_counts_from_json(const json& j) {
    Reader r(j, "counts");
    TokenCounts k;
    k.k_lr = r.get<int>("k_lr");
    k.k_b = r.get<int>("k_b");
    k.k_b_pooled = r.get<int>("k_b_pooled");
    k.pooled_groups = r.get<int>("pooled_groups");
    k.remainder = r.get<int>("remainder");
    k.k_small = r.get<int>("k_small");
    k.k_large = r.get<int>("k_large");
    k.k_hr = r.get<int>("k_hr");
    k.k_sa = r.get<int>("k_sa");
    r.finish();
    return k;
}

json to_json(const TokenLayout& layout) {
    json records = json::array();
    for (const auto& rec : layout.records) {
        records.push_back({{"provenance", provenance_name(rec.provenance)},
                           {"sources", rec.sources},
                           {"center", {rec.cx, rec.cy}},
                           {"extent", {rec.ex, rec.ey}}});
    }
    return {{"schema_version", kSchemaVersion}, {"rows", layout.rows}, {"cols", layout.cols},
            {"counts", to_json(layout.counts)}, {"records", records}};
}

TokenLayout token_layout_from_json(const json& j) {
    Reader r(j, "");
    check_version(r);
    TokenLayout layout;
    layout.rows = r.get<int>("rows");
    layout.cols = r.get<int>("cols");
    layout.counts = token_counts_from_json(r.raw("counts"));
    const json& recs = r.raw("records");
    r.finish();
    if (!recs.is_array()) throw Error(Errc::schema, "records: expected an array");
    for (std::size_t i = 0; i < recs.size(); ++i) {
        Reader rr(recs[i], "records[" + std::to_string(i) + "]");
        TokenRecord rec;
        const auto prov = rr.get<std::string>("provenance");
        bool known = false;
        for (auto p : {Provenance::pooled_background, Provenance::unpooled_background,
                       Provenance::large_low_res, Provenance::high_res}) {
            if (prov == provenance_name(p)) {
                rec.provenance = p;
                known = true;
            }
        }
        if (!known) rr.fail("unknown provenance '" + prov + "'");
        rec.sources = rr.get<std::vector<int>>("sources");
        const auto c = rr.get<std::vector<double>>("center");
        const auto e = rr.get<std::vector<double>>("extent");
        rr.finish();
        if (c.size() != 2 || e.size() != 2) rr.fail("center/extent must have 2 entries");
        rec.cx = c[0];
        rec.cy = c[1];
        rec.ex = e[0];
        rec.ey = e[1];
        layout.records.push_back(std::move(rec));
    }
    return layout;
}

// ---- scenes ----

json to_json(const Scene& scene) {
    json persons = json::array();
    for (const auto& p : scene.persons) {
        json pj = {{"bbox", box_to_json(p.box)}, {"depth", p.depth}};
        if (p.params) {
            pj["pose"] = points_to_json(p.params->pose);
            pj["betas"] = vector_to_json(p.params->betas);
            pj["trans"] = {p.params->trans.x(), p.params->trans.y(), p.params->trans.z()};
        }
        if (p.joints) pj["joints"] = points_to_json(*p.joints);
        persons.push_back(std::move(pj));
    }
    json out = {{"schema_version", kSchemaVersion},
                {"image", dims_to_json(scene.image)},
                {"image_hr", dims_to_json(scene.image_hr)},
                {"patch_size", scene.patch_size},
                {"fov_deg", scene.fov_deg},
                {"persons", persons}};
    if (!scene.name.empty()) out["name"] = scene.name;
    if (scene.gt_focal) out["gt_focal"] = *scene.gt_focal;
    if (scene.pixels) {
        out["pixels"] = {{"width", scene.pixels->dims.width},
                         {"height", scene.pixels->dims.height},
                         {"data", scene.pixels->data}};
    }
    return out;
}

Scene scene_from_json(const json& j, const std::string& name) {
    Reader r(j, "");
    check_version(r);
    Scene s;
    s.name = r.get_or<std::string>("name", name);
    s.image = dims_from_json(r.child("image"));
    s.image_hr = dims_from_json(r.child("image_hr"));
    s.patch_size = r.get_or<int>("patch_size", 14);
    s.fov_deg = r.get_or<double>("fov_deg", 60.0);
    if (r.has("gt_focal")) s.gt_focal = r.get<double>("gt_focal");
    else r.allow("gt_focal");
    const json& persons = r.raw("persons");
    if (!persons.is_array()) throw Error(Errc::schema, "persons: expected an array");
    for (std::size_t i = 0; i < persons.size(); ++i) {
        const std::string path = "persons[" + std::to_string(i) + "]";
        Reader pr(persons[i], path);
        PersonAnnotation p;
        p.box = box_from_json(pr.raw("bbox"), pr.at("bbox"));
        p.depth = pr.get<double>("depth");
        const bool any_params = pr.has("pose") || pr.has("betas") || pr.has("trans");
        if (any_params) {
            SmplParams params;
            params.pose = points_from_json(pr.raw("pose"), pr.at("pose"));
            params.betas = pr.has("betas") ? vector_from_json(pr.raw("betas"), pr.at("betas"))
                                           : Eigen::VectorXd::Zero(kShapeCoeffs);
            if (params.betas.size() != kShapeCoeffs) pr.fail("betas must have 10 entries");
            if (pr.has("trans")) {
                const Eigen::VectorXd t = vector_from_json(pr.raw("trans"), pr.at("trans"));
                if (t.size() != 3) pr.fail("trans must have 3 entries");
                params.trans = t;
            }
            p.params = params;
        }
        pr.allow("betas");
        pr.allow("trans");
        if (pr.has("joints")) p.joints = points_from_json(pr.raw("joints"), pr.at("joints"));
        else pr.allow("joints");
        pr.finish();
        s.persons.push_back(std::move(p));
    }
    if (r.has("pixels")) {
        Reader px = r.child("pixels");
        RgbImage img;
        img.dims = {px.get<int>("width"), px.get<int>("height")};
        img.data = px.get<std::vector<std::uint8_t>>("data");
        px.finish();
        s.pixels = std::move(img);
    } else {
        r.allow("pixels");
    }
    r.finish();
    validate(s);
    return s;
}

Scene load_scene(const std::string& path) {
    std::string stem = path;
    if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    return scene_from_json(read_json_file(path), stem);
}

// ---- run config ----

json to_json(const RunConfig& c) {
    const ArchConfig& a = c.arch;
    const LossWeights& w = c.loss_weights;
    json out = {
        {"schema_version", kSchemaVersion},
        {"thresholds",
         {{"alpha_c", c.thresholds.alpha_c}, {"alpha_s", c.thresholds.alpha_s}, {"alpha_d", c.thresholds.alpha_d}}},
        {"arch",
         {{"d_model", a.d_model}, {"heads", a.heads}, {"mlp_ratio", a.mlp_ratio}, {"n_lr", a.n_lr},
          {"n_hr", a.n_hr}, {"n_sa", a.n_sa}, {"n_dec", a.n_dec}, {"queries", a.queries},
          {"patch", a.patch}, {"scale_hidden", a.scale_hidden}, {"joints", a.joints},
          {"channels", a.channels}, {"seed", a.seed}}},
        {"loss_weights",
         {{"map", w.map}, {"depth", w.depth}, {"pose", w.pose}, {"shape", w.shape}, {"j3d", w.j3d},
          {"j2d", w.j2d}, {"box", w.box}, {"det", w.det}}},
        {"focal", {{"alpha", c.focal.alpha}, {"gamma", c.focal.gamma}}},
        {"bin_edges", c.bin_edges},
        {"seed", c.seed},
        {"pool_twice", c.pool_twice},
        {"cost_model",
         {{"d_model", c.cost.d_model}, {"n_lr", c.cost.n_lr}, {"n_hr", c.cost.n_hr},
          {"n_sa", c.cost.n_sa}, {"mlp_ratio", c.cost.mlp_ratio}}},
        {"pck_threshold_mm", c.pck_threshold_mm},
        {"tp_threshold_px", c.tp_threshold_px}};
    if (c.body_model) out["body_model"] = *c.body_model;
    return out;
}

RunConfig run_config_from_json(const json& j) {
    Reader r(j, "");
    check_version(r);
    RunConfig c;
    if (r.has("thresholds")) {
        Reader t = r.child("thresholds");
        c.thresholds.alpha_c = t.get_or("alpha_c", c.thresholds.alpha_c);
        c.thresholds.alpha_s = t.get_or("alpha_s", c.thresholds.alpha_s);
        c.thresholds.alpha_d = t.get_or("alpha_d", c.thresholds.alpha_d);
        t.finish();
    } else {
        r.allow("thresholds");
    }
    if (r.has("arch")) {
        Reader a = r.child("arch");
        ArchConfig& x = c.arch;
        x.d_model = a.get_or("d_model", x.d_model);
        x.heads = a.get_or("heads", x.heads);
        x.mlp_ratio = a.get_or("mlp_ratio", x.mlp_ratio);
        x.n_lr = a.get_or("n_lr", x.n_lr);
        x.n_hr = a.get_or("n_hr", x.n_hr);
        x.n_sa = a.get_or("n_sa", x.n_sa);
        x.n_dec = a.get_or("n_dec", x.n_dec);
        x.queries = a.get_or("queries", x.queries);
        x.patch = a.get_or("patch", x.patch);
        x.scale_hidden = a.get_or("scale_hidden", x.scale_hidden);
        x.joints = a.get_or("joints", x.joints);
        x.channels = a.get_or("channels", x.channels);
        x.seed = a.get_or<std::uint64_t>("seed", x.seed);
        a.finish();
    } else {
        r.allow("arch");
    }
    if (r.has("loss_weights")) {
        Reader l = r.child("loss_weights");
        LossWeights& w = c.loss_weights;
        w.map = l.get_or("map", w.map);
        w.depth = l.get_or("depth", w.depth);
        w.pose = l.get_or("pose", w.pose);
        w.shape = l.get_or("shape", w.shape);
        w.j3d = l.get_or("j3d", w.j3d);
        w.j2d = l.get_or("j2d", w.j2d);
        w.box = l.get_or("box", w.box);
        w.det = l.get_or("det", w.det);
        l.finish();
    } else {
        r.allow("loss_weights");
    }
    if (r.has("focal")) {
        Reader f = r.child("focal");
        c.focal.alpha = f.get_or("alpha", c.focal.alpha);
        c.focal.gamma = f.get_or("gamma", c.focal.gamma);
        f.finish();
    } else {
        r.allow("focal");
    }
    c.bin_edges = r.get_or("bin_edges", c.bin_edges);
    c.seed = r.get_or<std::uint64_t>("seed", c.seed);
    c.pool_twice = r.get_or("pool_twice", c.pool_twice);
    if (r.has("cost_model")) {
        Reader m = r.child("cost_model");
        c.cost.d_model = m.get_or("d_model", c.cost.d_model);
        c.cost.n_lr = m.get_or("n_lr", c.cost.n_lr);
        c.cost.n_hr = m.get_or("n_hr", c.cost.n_hr);
        c.cost.n_sa = m.get_or("n_sa", c.cost.n_sa);
        c.cost.mlp_ratio = m.get_or("mlp_ratio", c.cost.mlp_ratio);
        m.finish();
    } else {
        r.allow("cost_model");
    }
    c.pck_threshold_mm = r.get_or("pck_threshold_mm", c.pck_threshold_mm);
    c.tp_threshold_px = r.get_or("tp_threshold_px", c.tp_threshold_px);
    if (r.has("body_model")) c.body_model = r.get<std::string>("body_model");
    else r.allow("body_model");
    r.finish();
    validate(c);
    return c;
}

RunConfig load_run_config(const std::string& path) { return run_config_from_json(read_json_file(path)); }

// ---- body model ----

json to_json(const BodyModelDef& m) {
    json faces = json::array();
    for (const auto& f : m.faces) faces.push_back({f[0], f[1], f[2]});
    return {{"schema_version", kSchemaVersion},
            {"template", points_to_json(m.template_vertices)},
            {"shape_dirs", matrix_to_json(m.shape_dirs)},
            {"parents", m.parents},
            {"rest_regressor", matrix_to_json(m.rest_regressor)},
            {"skin_weights", matrix_to_json(m.skin_weights)},
            {"joint_regressor", matrix_to_json(m.joint_regressor)},
            {"root_joint", m.root_joint},
            {"faces", faces}};
}

BodyModelDef body_model_from_json(const json& j) {
    Reader r(j, "");
    check_version(r);
    BodyModelDef m;
    m.template_vertices = points_from_json(r.raw("template"), "template");
    m.shape_dirs = matrix_from_json(r.raw("shape_dirs"), "shape_dirs");
    m.parents = r.get<std::vector<int>>("parents");
    m.rest_regressor = matrix_from_json(r.raw("rest_regressor"), "rest_regressor");
    m.skin_weights = matrix_from_json(r.raw("skin_weights"), "skin_weights");
    m.joint_regressor = matrix_from_json(r.raw("joint_regressor"), "joint_regressor");
    m.root_joint = r.get_or("root_joint", 0);
    for (const auto& f : r.get_or("faces", std::vector<std::array<int, 3>>{})) m.faces.push_back(f);
    r.finish();
    if (m.parents.empty()) throw Error(Errc::schema, "parents: must not be empty");
    validate(m);
    return m;
}

std::string mesh_to_obj(const Points& vertices, const BodyModelDef& model) {
    std::ostringstream out;
    out.precision(9);
    for (Eigen::Index v = 0; v < vertices.rows(); ++v)
        out << "v " << vertices(v, 0) << ' ' << vertices(v, 1) << ' ' << vertices(v, 2) << '\n';
    for (const auto& f : model.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    return out.str();
}

// ---- predictions, losses, reports ----

json to_json(const Prediction& p) {
    return {{"pose", points_to_json(p.pose)},
            {"betas", vector_to_json(p.betas)},
            {"trans", {p.trans.x(), p.trans.y(), p.trans.z()}},
            {"box", {p.box.cx, p.box.cy, p.box.w, p.box.h}},
            {"confidence", p.confidence}};
}

Prediction prediction_from_json(const json& j) {
    return validating([&] {
        Reader r(j, "prediction");
        Prediction p;
        p.pose = points_from_json(r.raw("pose"), "pose");
        p.betas = vector_from_json(r.raw("betas"), "betas");
        const auto t = r.get<std::vector<double>>("trans");
        const auto b = r.get<std::vector<double>>("box");
        p.confidence = r.get<double>("confidence");
        r.finish();
        if (t.size() != 3 || b.size() != 4) r.fail("trans needs 3 and box 4 entries");
        p.trans = {t[0], t[1], t[2]};
        p.box = {b[0], b[1], b[2], b[3]};
        return p;
    });
}

json to_json(const PredictionSet& set) {
    json preds = json::array();
    for (const auto& p : set.predictions) preds.push_back(to_json(p));
    return {{"schema_version", kSchemaVersion}, {"scene", set.scene}, {"predictions", preds},
            {"valid", set.valid}};
}

PredictionSet prediction_set_from_json(const json& j) {
    Reader r(j, "");
    check_version(r);
    PredictionSet set;
    set.scene = r.get_or<std::string>("scene", "");
    const json& preds = r.raw("predictions");
    set.valid = r.get<std::vector<int>>("valid");
    r.finish();
    if (!preds.is_array()) throw Error(Errc::schema, "predictions: expected an array");
    for (const auto& p : preds) set.predictions.push_back(prediction_from_json(p));
    for (int v : set.valid)
        if (v < 0 || v >= static_cast<int>(set.predictions.size()))
            throw Error(Errc::schema, "valid: index out of range");
    return set;
}

namespace {

json terms_to_json(const LossTerms& t) {
    return {{"map", t.map}, {"depth", t.depth}, {"pose", t.pose}, {"shape", t.shape},
            {"j3d", t.j3d}, {"j2d", t.j2d},     {"box", t.box},   {"det", t.det}};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const LossBreakdown& loss) {
    json persons = json::array();
    for (const auto& p : loss.persons) {
        persons.push_back({{"gt", p.gt}, {"pred", p.pred}, {"depth", p.depth}, {"pose", p.pose},
                           {"shape", p.shape}, {"j3d", p.j3d}, {"j2d", p.j2d}, {"box", p.box}});
    }
    return {{"terms", terms_to_json(loss.terms)},
            {"weighted", terms_to_json(loss.weighted)},
            {"total", loss.total},
            {"persons", persons}};
}

json to_json(const EvalReport& rep) {
    json bins = json::array();
    for (const auto& b : rep.scale_bins.bins) {
        bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"mve", optional_number(b.mean)}});
    }
    const DetectionResult& d = rep.detection;
    return {{"schema_version", kSchemaVersion},
            {"persons_gt", rep.persons_gt},
            {"predictions", rep.predictions},
            {"detection",
             {{"tp", d.tp}, {"fp", d.fp}, {"fn", d.fn}, {"precision", d.precision},
              {"recall", d.recall}, {"f1", d.f1}}},
            {"mve_mm", optional_number(rep.mve)},
            {"pa_mve_mm", optional_number(rep.pa_mve)},
            {"mpjpe_mm", optional_number(rep.mpjpe)},
            {"pa_mpjpe_mm", optional_number(rep.pa_mpjpe)},
            {"nmve_mm", optional_number(rep.nmve)},
            {"nmje_mm", optional_number(rep.nmje)},
            {"pck", optional_number(rep.pck)},
            {"scale_bins", bins},
            {"scale_average_mve_mm", optional_number(rep.scale_bins.average)}};
}

}  // namespace satkit
