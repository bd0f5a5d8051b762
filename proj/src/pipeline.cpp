#include "satkit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "satkit/error.hpp"
#include "satkit/rng.hpp"

namespace satkit {

void validate(const RunConfig& cfg) {
    validate(cfg.thresholds);
    validate(cfg.arch);
    validate(cfg.loss_weights);
    if (!(cfg.focal.alpha >= 0.0 && cfg.focal.alpha <= 1.0) || !(cfg.focal.gamma >= 0.0)) {
        throw Error(Errc::invalid_argument, "focal alpha must lie in [0, 1] and gamma be >= 0");
    }
    for (std::size_t i = 0; i < cfg.bin_edges.size(); ++i) {
        const double e = cfg.bin_edges[i];
        if (!(e > 0.0 && e < 1.0) || (i > 0 && e <= cfg.bin_edges[i - 1])) {
            throw Error(Errc::invalid_argument, "bin_edges must be increasing inside (0, 1)");
        }
    }
    const CostModel& c = cfg.cost;
    if (c.d_model < 1 || c.n_lr < 0 || c.n_hr < 0 || c.n_sa < 0 || c.mlp_ratio < 1) {
        throw Error(Errc::invalid_argument, "cost model sizes must be positive");
    }
    if (!(cfg.pck_threshold_mm > 0.0) || !(cfg.tp_threshold_px > 0.0)) {
        throw Error(Errc::invalid_argument, "pck and true-positive thresholds must be positive");
    }
}

FloatImage scene_image(const Scene& scene, std::uint64_t seed) {
    FloatImage img(scene.image_hr, 3);
    if (scene.pixels) {
        for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = scene.pixels->data[i] / 255.0;
        return img;
    }
    Rng rng(seed);
    const int w = scene.image_hr.width;
    const int h = scene.image_hr.height;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double g = 0.3 + 0.2 * y / h;
            for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = g + 0.05 * (rng.uniform() - 0.5);
        }
    // Persons painted far to near.
    std::vector<std::size_t> order(scene.persons.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scene.persons[a].depth > scene.persons[b].depth;
    });
    for (std::size_t i : order) {
        const BBox& b = scene.persons[i].box;
        const double color[3] = {0.4 + 0.5 * rng.uniform(), 0.2 + 0.5 * rng.uniform(), 0.3 + 0.5 * rng.uniform()};
        const int x0 = std::clamp(static_cast<int>(std::floor(b.x_min)), 0, w);
        const int x1 = std::clamp(static_cast<int>(std::ceil(b.x_max)), 0, w);
        const int y0 = std::clamp(static_cast<int>(std::floor(b.y_min)), 0, h);
        const int y1 = std::clamp(static_cast<int>(std::ceil(b.y_max)), 0, h);
        for (int y = y0; y < y1; ++y)
            for (int x = x0; x < x1; ++x)
                for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = color[ch];
    }
    return img;
}

ScaleMap gt_scale_map(const Scene& scene) {
    const PatchGrid grid = partition(scene.image, scene.patch_size);
    return build_gt_scale_map(grid, scene.persons, scene.image_hr.longest_side());
}

namespace {

LossContext make_context(const Scene& scene, const BodyModelDef& model) {
    LossContext ctx;
    ctx.model = &model;
    ctx.camera = scene.camera();
    ctx.image_hr = scene.image_hr;
    ctx.gt_focal = scene.gt_focal.value_or(ctx.camera.focal);
    return ctx;
}

Points2 to_pixels(const Points2& normalized, double longest) { return normalized * longest; }

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

}  // namespace

EvalReport evaluate(const Scene& scene, std::span<const Prediction> preds, const BodyModelDef& model,
                    const RunConfig& cfg) {
    validate(cfg);
    const LossContext ctx = make_context(scene, model);
    const double longest = scene.image_hr.longest_side();
    EvalReport rep;
    rep.persons_gt = static_cast<int>(scene.persons.size());
    rep.predictions = static_cast<int>(preds.size());

    std::vector<PredictionGeometry> geoms;
    std::vector<Points2> pred2d;
    for (const auto& p : preds) {
        geoms.push_back(prediction_geometry(p, ctx));
        pred2d.push_back(to_pixels(geoms.back().joints2d, longest));
    }
    std::vector<PersonTarget> targets;
    std::vector<Points2> gt2d;
    for (const auto& person : scene.persons) {
        targets.push_back(person_target(person, ctx));
        gt2d.push_back(to_pixels(targets.back().joints2d, longest));
    }
    rep.detection = detection_prf(pred2d, gt2d, cfg.tp_threshold_px);

    std::vector<double> mve_v, pa_mve_v, mpjpe_v, pa_mpjpe_v, joint_errs, scales, binned_errs;
    const int root = model.root_joint;
    for (const auto& [g, i] : rep.detection.matches) {
        const PersonTarget& tg = targets[g];
        mpjpe_v.push_back(mpjpe(geoms[i].joints3d, tg.joints3d, root));
        pa_mpjpe_v.push_back(pa_mpjpe(geoms[i].joints3d, tg.joints3d));
        const auto errs = joint_errors_mm(geoms[i].joints3d, tg.joints3d, root);
        joint_errs.insert(joint_errs.end(), errs.begin(), errs.end());
        if (scene.persons[g].params) {
            SmplParams pp;
            pp.pose = preds[i].pose;
            pp.betas = preds[i].betas;
            pp.trans = preds[i].trans;
            const Points pv = forward(pp, model);
            const Points gv = forward(*scene.persons[g].params, model);
            const double e = mve(pv, gv, geoms[i].joints3d.row(root).transpose(),
                                 tg.joints3d.row(root).transpose());
            mve_v.push_back(e);
            pa_mve_v.push_back(mean_distance_mm(procrustes_align(pv, gv), gv));
            binned_errs.push_back(e);
            scales.push_back(person_scale(scene.persons[g].box, longest));
        }
    }
    if (!mpjpe_v.empty()) {
        rep.mpjpe = mean_of(mpjpe_v);
        rep.pa_mpjpe = mean_of(pa_mpjpe_v);
        rep.pck = pck(joint_errs, cfg.pck_threshold_mm);
    }
    if (!mve_v.empty()) {
        rep.mve = mean_of(mve_v);
        rep.pa_mve = mean_of(pa_mve_v);
    }
    if (rep.detection.f1 > 0.0 && rep.mve && rep.mpjpe) {
        const NormalizedErrors n = normalized_errors(*rep.mve, *rep.mpjpe, rep.detection.f1);
        rep.nmve = n.nmve;
        rep.nmje = n.nmje;
    }
    rep.scale_bins = scale_binned_mve(binned_errs, scales, cfg.bin_edges);
    return rep;
}

namespace {

std::string cell(const std::optional<double>& v, int width, int precision = 1) {
    char buf[64];
    if (v) std::snprintf(buf, sizeof buf, "%*.*f", width, precision, *v);
    else std::snprintf(buf, sizeof buf, "%*s", width, "-");
    return buf;
}

std::string header(const char* name, int width) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%*s", width, name);
    return buf;
}

}  // namespace

std::string format_report_table(const EvalReport& r) {
    constexpr int w = 9;
    std::ostringstream out;
    const DetectionResult& d = r.detection;
    out << header("F1", w) << header("Prec.", w) << header("Rec.", w) << header("MPJPE", w)
        << header("MVE", w) << header("NMJE", w) << header("NMVE", w) << header("PA-MPJPE", w)
        << header("PA-MVE", w) << header("PCK", w) << '\n';
    out << cell(d.f1, w, 2) << cell(d.precision, w, 2) << cell(d.recall, w, 2) << cell(r.mpjpe, w)
        << cell(r.mve, w) << cell(r.nmje, w) << cell(r.nmve, w) << cell(r.pa_mpjpe, w)
        << cell(r.pa_mve, w) << cell(r.pck, w, 3) << '\n';
    out << '\n';
    for (const auto& b : r.scale_bins.bins) {
        char name[32];
        if (b.hi >= 1.0) std::snprintf(name, sizeof name, "%.0f%%+", b.lo * 100);
        else std::snprintf(name, sizeof name, "%.0f-%.0f%%", b.lo * 100, b.hi * 100);
        out << header(name, w);
    }
    out << header("Avg.", w) << '\n';
    for (const auto& b : r.scale_bins.bins) out << cell(b.mean, w);
    out << cell(r.scale_bins.average, w) << '\n';
    out << "TP " << d.tp << "  FP " << d.fp << "  FN " << d.fn << '\n';
    return out.str();
}

SceneLoss scene_loss(const Scene& scene, const ForwardResult& fwd, const BodyModelDef& model,
                     const RunConfig& cfg) {
    const LossContext ctx = make_context(scene, model);
    std::vector<PredictionGeometry> geoms;
    for (const auto& p : fwd.predictions) geoms.push_back(prediction_geometry(p, ctx));
    std::vector<PersonTarget> targets;
    for (const auto& person : scene.persons) targets.push_back(person_target(person, ctx));
    SceneLoss out;
    out.match = hungarian(matching_cost_matrix(fwd.predictions, geoms, targets, cfg.loss_weights));
    out.breakdown = total_loss(fwd.predictions, geoms, targets, out.match, fwd.predicted_map,
                               gt_scale_map(scene), cfg.loss_weights, ctx, cfg.focal);
    return out;
}

}  // namespace satkit
