#include <doctest.h>

#include "oracles.hpp"
#include "satkit/pipeline.hpp"
#include "satkit/pixmap.hpp"
#include "satkit/serialize.hpp"

using namespace satkit;

namespace {

Scene demo_scene(std::uint64_t seed) {
    SyntheticSceneOptions opts;
    opts.image = {140, 84};
    opts.min_persons = 2;
    opts.max_persons = 4;
    opts.min_scale = 0.2;
    return make_synthetic_scene(seed, opts, make_mini_model(0));
}

Prediction as_prediction(const PersonAnnotation& p, const ImageDims& hr) {
    Prediction out;
    out.pose = p.params->pose;
    out.betas = p.params->betas;
    out.trans = p.params->trans;
    out.box = to_center(normalize_box(p.box, hr));
    out.confidence = 1.0;
    return out;
}

}  // namespace

TEST_CASE("synthetic scenes are valid and deterministic") {
    const BodyModelDef model = make_mini_model(0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Scene a = demo_scene(seed);
        CHECK_NOTHROW(validate(a, &model));
        CHECK(dump(to_json(a)) == dump(to_json(demo_scene(seed))));
        CHECK(a.image_hr == ImageDims{280, 168});
        for (const auto& p : a.persons) CHECK(p.depth > 0.0);
    }
}

TEST_CASE("evaluation of ground truth predictions is perfect") {
    const BodyModelDef model = make_mini_model(0);
    const RunConfig cfg;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Scene s = demo_scene(seed);
        std::vector<Prediction> preds;
        for (const auto& p : s.persons) preds.push_back(as_prediction(p, s.image_hr));
        const EvalReport r = evaluate(s, preds, model, cfg);
        CHECK(r.detection.f1 == 1.0);
        CHECK(*r.mve <= 1e-6);
        CHECK(*r.mpjpe <= 1e-6);
        CHECK(*r.pa_mpjpe <= 1e-3);
        CHECK(*r.pck == 1.0);
        CHECK(*r.nmve == *r.mve);
        CHECK(!format_report_table(r).empty());
    }
}

TEST_CASE("evaluation without predictions leaves errors absent") {
    const BodyModelDef model = make_mini_model(0);
    const Scene s = demo_scene(1);
    const EvalReport r = evaluate(s, {}, model, RunConfig{});
    CHECK(r.detection.recall == 0.0);
    CHECK(!r.mve);
    CHECK(!r.nmve);
    for (const auto& b : r.scale_bins.bins) CHECK(!b.mean);
}

TEST_CASE("scene loss on ground truth predictions") {
    const BodyModelDef model = make_mini_model(0);
    RunConfig cfg;
    cfg.arch.d_model = 16;
    cfg.arch.heads = 2;
    cfg.arch.scale_hidden = 8;
    const Scene s = demo_scene(3);
    ForwardResult fwd;
    for (const auto& p : s.persons) fwd.predictions.push_back(as_prediction(p, s.image_hr));
    Prediction spare = fwd.predictions[0];
    spare.confidence = 0.0;
    spare.trans.z() += 3.0;
    fwd.predictions.push_back(spare);
    fwd.predicted_map = gt_scale_map(s);
    const SceneLoss sl = scene_loss(s, fwd, model, cfg);
    CHECK(sl.match.gt_to_pred.size() == s.persons.size());
    for (std::size_t g = 0; g < s.persons.size(); ++g) CHECK(sl.match.gt_to_pred[g] == static_cast<int>(g));
    const LossTerms& t = sl.breakdown.terms;
    CHECK(t.pose <= 1e-9);
    CHECK(t.shape <= 1e-9);
    CHECK(t.j3d <= 1e-9);
    CHECK(t.j2d <= 1e-9);
    CHECK(t.box <= 1e-9);
    CHECK(t.depth <= 1e-9);
    CHECK(t.det <= 1e-6);
}

TEST_CASE("scene image and pixmaps are deterministic") {
    const Scene s = demo_scene(2);
    const FloatImage a = scene_image(s, 4);
    const FloatImage b = scene_image(s, 4);
    CHECK(a.values == b.values);
    CHECK(a.dims == s.image_hr);

    Scene empty = s;
    empty.persons.clear();
    const ScaleMap m = gt_scale_map(empty);
    const Pixmap px = render_scale_map(m, empty.image_hr, empty.patch_size, 0.3);
    for (auto v : px.rgb) CHECK(v == 255);
    const std::string ppm = encode_ppm(px);
    CHECK(ppm.rfind("P6\n280 168\n255\n", 0) == 0);
    CHECK(ppm.size() == std::string("P6\n280 168\n255\n").size() + 280 * 168 * 3);

    const ScaleMap full = gt_scale_map(s);
    CHECK(encode_ppm(render_scale_map(full, s.image_hr, 14, 0.3)) ==
          encode_ppm(render_scale_map(full, s.image_hr, 14, 0.3)));
    const TokenLayout l = assemble(classify(full, Thresholds{}));
    CHECK(render_token_layout(l, s.image_hr, 14).dims == s.image_hr);
}

TEST_CASE("scale colors run from rose to blue") {
    CHECK(scale_color(0.0) == std::array<std::uint8_t, 3>{236, 112, 148});
    CHECK(scale_color(1.0) == std::array<std::uint8_t, 3>{52, 92, 214});
}

TEST_CASE("documented example scene agrees with the oracle and its golden map") {
    const Scene s = load_scene(std::string(SATKIT_DOCS_DIR) + "/example_scene.json");
    const ScaleMap m = gt_scale_map(s);
    const PatchGrid grid = partition(s.image, s.patch_size);
    CHECK(m == oracle::raster_scale_map(grid.rows, grid.cols, s.patch_size, s.image_hr, s.persons,
                                        s.image_hr.longest_side()));
    const ScaleMap golden = scale_map_from_json(read_json_file(std::string(SATKIT_DOCS_DIR) + "/golden/scale_map_gt.json"));
    CHECK(golden == m);
    const TokenCounts counts =
        token_counts_from_json(read_json_file(std::string(SATKIT_DOCS_DIR) + "/golden/token_counts.json"));
    CHECK(counts == assemble(classify(m, Thresholds{})).counts);
    CHECK(counts.k_sa == counts.k_b_pooled + counts.k_large + 4 * counts.k_small);
}
