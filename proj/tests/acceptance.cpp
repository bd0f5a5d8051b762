// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "satkit/match_loss.hpp"
#include "satkit/metrics.hpp"
#include "satkit/network.hpp"
#include "satkit/pipeline.hpp"
#include "satkit/scale_map.hpp"
#include "satkit/token_engine.hpp"

using namespace satkit;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double limit_ms;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool bit_equal(const Prediction& a, const Prediction& b) {
    auto same = [](const auto& x, const auto& y) {
        if (x.size() != y.size()) return false;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!bit_equal(x.data()[i], y.data()[i])) return false;
        return true;
    };
    return same(a.pose, b.pose) && same(a.betas, b.betas) && same(a.trans, b.trans) &&
           bit_equal(a.box.cx, b.box.cx) && bit_equal(a.box.cy, b.box.cy) && bit_equal(a.box.w, b.box.w) &&
           bit_equal(a.box.h, b.box.h) && bit_equal(a.confidence, b.confidence);
}

Outcome token_counts() {
    const int hr = partition({1288, 728}, 14).count();
    const int lr = partition({644, 364}, 14).count();
    return {hr == 4784 && lr == 1196, fmt("1288x728 -> %d, 644x364 -> %d", hr, lr)};
}

Outcome normalization() {
    const NormalizedErrors n = normalized_errors(63.3, 67.9, 0.95);
    const bool ok = std::abs(n.nmve - 66.6) <= 0.05 && std::abs(n.nmje - 71.5) <= 0.05;
    return {ok, fmt("NMVE %.4f, NMJE %.4f", n.nmve, n.nmje)};
}

Outcome count_conservation() {
    Rng rng(1001);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const ClassGrid g = oracle::random_class_grid(rng, rng.uniform_int(1, 26), rng.uniform_int(1, 46));
        const TokenLayout l = assemble(g);
        const TokenCounts& k = l.counts;
        const oracle::PoolCounts o = oracle::brute_pool(g);
        int small = 0, large = 0, bg = 0;
        for (auto c : g.cells) (c == PatchClass::small ? small : c == PatchClass::large ? large : bg) += 1;
        bool ok = k.k_small == small && k.k_large == large && k.k_b == bg && k.k_lr == g.count();
        ok = ok && k.k_hr == 4 * k.k_small;
        ok = ok && k.k_b == 4 * k.pooled_groups + k.remainder;
        ok = ok && k.k_b_pooled == k.pooled_groups + k.remainder;
        ok = ok && k.k_sa == k.k_b_pooled + k.k_large + k.k_hr && k.k_sa == l.size();
        ok = ok && 4 * k.pooled_groups == o.pooled_cells && k.remainder == o.remainder;
        std::vector<int> hits(g.count(), 0);
        for (int c : covered_cells(l)) hits[c] += 1;
        for (int i = 0; i < g.count(); ++i) ok = ok && hits[i] == (g.cells[i] == PatchClass::small ? 4 : 1);
        // High-res children cover each Small cell's 2x2 block exactly once.
        std::vector<int> hr_hits(4 * g.count(), 0);
        for (const auto& r : l.records)
            if (r.provenance == Provenance::high_res) hr_hits[r.sources[0]] += 1;
        for (int i = 0; i < 4 * g.count(); ++i) {
            const int row = i / (2 * g.cols), col = i % (2 * g.cols);
            const bool child = g.at(row / 2, col / 2) == PatchClass::small;
            ok = ok && hr_hits[i] == (child ? 1 : 0);
        }
        violations += ok ? 0 : 1;
    }
    return {violations == 0, fmt("1000 grids, %d violations", violations)};
}

Outcome scale_map_oracle() {
    Rng rng(1002);
    const BodyModelDef model = make_mini_model(0);
    int mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Scene s;
        if (trial % 2 == 0) {
            SyntheticSceneOptions opts;
            opts.with_params = false;
            s = make_synthetic_scene(5000 + trial, opts, model);
        } else {
            s.image = {644, 364};
            s.image_hr = {1288, 728};
            const int n = rng.uniform_int(0, 8);
            for (int i = 0; i < n; ++i) {
                PersonAnnotation p;
                const double cell = 28.0;
                if (rng.uniform() < 0.4) {
                    p.box.x_min = cell * rng.uniform_int(-2, 46);
                    p.box.y_min = cell * rng.uniform_int(-2, 26);
                    p.box.x_max = p.box.x_min + cell * rng.uniform_int(1, 12);
                    p.box.y_max = p.box.y_min + cell * rng.uniform_int(1, 12);
                } else {
                    p.box.x_min = rng.uniform(-100, 1288);
                    p.box.y_min = rng.uniform(-100, 728);
                    p.box.x_max = p.box.x_min + rng.uniform(1, 900);
                    p.box.y_max = p.box.y_min + rng.uniform(1, 700);
                }
                p.depth = 1.0 + rng.uniform_int(0, 3) * 1.5;
                s.persons.push_back(p);
            }
        }
        const PatchGrid grid = partition(s.image, s.patch_size);
        const double s_hr = s.image_hr.longest_side();
        const ScaleMap a = build_gt_scale_map(grid, s.persons, s_hr);
        const ScaleMap b = oracle::raster_scale_map(grid.rows, grid.cols, s.patch_size, s.image_hr, s.persons, s_hr);
        mismatches += a == b ? 0 : 1;
    }
    return {mismatches == 0, fmt("100 scenes, %d mismatches", mismatches)};
}

Outcome hungarian_optimality() {
    Rng rng(1003);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.uniform_int(1, 7);
        const int m = rng.uniform_int(1, n);
        Eigen::MatrixXd c(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) c(i, j) = trial % 3 == 0 ? rng.uniform_int(0, 4) : rng.normal(0, 10);
        const MatchResult r = hungarian(c);
        double sum = 0.0;
        std::vector<int> used(n, 0);
        bool injective = static_cast<int>(r.gt_to_pred.size()) == m;
        for (int j = 0; injective && j < m; ++j) {
            injective = used[r.gt_to_pred[j]]++ == 0;
            sum += c(r.gt_to_pred[j], j);
        }
        const double best = oracle::brute_force_assignment(c);
        if (!injective || std::abs(sum - best) > 1e-9 * std::max(1.0, std::abs(best))) ++mismatches;
    }
    return {mismatches == 0, fmt("200 matrices, %d mismatches", mismatches)};
}

Outcome gradient_checks() {
    Rng rng(1004);
    const double step = 1e-5;
    double worst[4] = {0, 0, 0, 0};
    for (int i = 0; i < 100; ++i) {
        {
            const double p = rng.uniform(0.01, 0.99);
            const double y = i % 2;
            Eigen::VectorXd x(1);
            x << p;
            worst[0] = std::max(worst[0], grad_check([&](const Eigen::VectorXd& v) { return focal_loss(v[0], y); },
                                                     Eigen::VectorXd::Constant(1, focal_loss_grad(p, y)), x, step)
                                              .max_rel_deviation);
        }
        {
            const int n = rng.uniform_int(1, 20);
            std::vector<double> p(n), g(n);
            for (int k = 0; k < n; ++k) {
                g[k] = rng.normal();
                const double d = rng.uniform(1e-2, 1.0) * (rng.uniform() < 0.5 ? -1 : 1);
                p[k] = g[k] + d;
            }
            const Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(p.data(), n);
            worst[1] = std::max(worst[1], grad_check(
                                              [&](const Eigen::VectorXd& v) {
                                                  return l1_loss(std::span<const double>(v.data(), n), g);
                                              },
                                              l1_loss_grad(p, g), x, step)
                                              .max_rel_deviation);
        }
        {
            double d, dg, f, fg;
            do {
                d = rng.uniform(0.5, 20);
                dg = rng.uniform(0.5, 20);
                f = rng.uniform(300, 2000);
                fg = rng.uniform(300, 2000);
            } while (std::abs(1 / dg - f / (fg * d)) < 1e-3);
            Eigen::VectorXd x(1);
            x << d;
            worst[2] = std::max(worst[2], grad_check([&](const Eigen::VectorXd& v) { return loss_depth(v[0], dg, f, fg); },
                                                     Eigen::VectorXd::Constant(1, loss_depth_grad(d, dg, f, fg)), x, step)
                                              .max_rel_deviation);
        }
        {
            // Admissible: no corner ties, no min/max ties in the enclosure or
            // intersection, positive sizes.
            CenterBox p;
            BBox g;
            auto admissible = [&] {
                const BBox pc = to_corner(p);
                const double a[4] = {pc.x_min, pc.y_min, pc.x_max, pc.y_max};
                const double b[4] = {g.x_min, g.y_min, g.x_max, g.y_max};
                for (int k = 0; k < 4; ++k)
                    if (std::abs(a[k] - b[k]) < 1e-3) return false;
                const double ix = std::min(pc.x_max, g.x_max) - std::max(pc.x_min, g.x_min);
                const double iy = std::min(pc.y_max, g.y_max) - std::max(pc.y_min, g.y_min);
                if (std::abs(ix) < 1e-3 || std::abs(iy) < 1e-3) return false;
                return p.w > 1e-2 && p.h > 1e-2;
            };
            do {
                p = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.02, 0.6), rng.uniform(0.02, 0.6)};
                const double x0 = rng.uniform(0, 0.8), y0 = rng.uniform(0, 0.8);
                g = {x0, y0, x0 + rng.uniform(0.02, 0.5), y0 + rng.uniform(0.02, 0.5)};
            } while (!admissible());
            const Eigen::Vector4d x(p.cx, p.cy, p.w, p.h);
            worst[3] = std::max(worst[3], grad_check(
                                              [&](const Eigen::VectorXd& v) {
                                                  return loss_box(CenterBox{v[0], v[1], v[2], v[3]}, g);
                                              },
                                              loss_box_grad(p, g), x, step)
                                              .max_rel_deviation);
        }
    }
    const double m = *std::max_element(worst, worst + 4);
    return {m <= 1e-4, fmt("max rel dev focal %.2e, L1 %.2e, depth %.2e, box %.2e", worst[0], worst[1], worst[2], worst[3])};
}

Outcome loss_roots() {
    const BodyModelDef model = make_mini_model(0);
    SyntheticSceneOptions opts;
    opts.image = {140, 84};
    opts.min_persons = 2;
    opts.max_persons = 5;
    double worst = 0.0, worst_conf = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Scene s = make_synthetic_scene(seed, opts, model);
        LossContext ctx;
        ctx.model = &model;
        ctx.camera = s.camera();
        ctx.image_hr = s.image_hr;
        ctx.gt_focal = ctx.camera.focal;
        std::vector<Prediction> preds;
        std::vector<PredictionGeometry> geoms;
        std::vector<PersonTarget> targets;
        for (const auto& p : s.persons) {
            Prediction pr;
            pr.pose = p.params->pose;
            pr.betas = p.params->betas;
            pr.trans = p.params->trans;
            pr.box = to_center(normalize_box(p.box, s.image_hr));
            pr.confidence = 1.0;
            preds.push_back(pr);
            geoms.push_back(prediction_geometry(pr, ctx));
            targets.push_back(person_target(p, ctx));
        }
        MatchResult match;
        for (std::size_t g = 0; g < targets.size(); ++g) match.gt_to_pred.push_back(static_cast<int>(g));
        const ScaleMap gt = gt_scale_map(s);
        const LossBreakdown lb = total_loss(preds, geoms, targets, match, gt, gt, LossWeights{}, ctx);
        const LossTerms& t = lb.terms;
        for (double v : {t.depth, t.pose, t.shape, t.j3d, t.j2d, t.box}) worst = std::max(worst, v);
        worst_conf = std::max({worst_conf, t.det, t.map});
    }
    // Focal loss at a saturated confidence, clamped to 1 - 1e-7.
    const double eps = focal_loss(1.0 - kProbClamp, 1.0) + focal_loss(kProbClamp, 0.0);
    Rng rng(1007);
    double worst_depth = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double dg = rng.uniform(0.5, 30), f = rng.uniform(100, 3000), fg = rng.uniform(100, 3000);
        worst_depth = std::max(worst_depth, loss_depth(f * dg / fg, dg, f, fg));
    }
    const bool ok = worst <= 1e-9 && worst_conf <= std::max(eps, 1e-9) && worst_depth <= 1e-12;
    return {ok, fmt("max term %.2e, confidence terms %.2e (eps %.2e), depth root %.2e", worst, worst_conf, eps,
                    worst_depth)};
}

Outcome baseline_degeneration() {
    Rng rng(1008);
    int differing = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ArchConfig cfg;
        cfg.seed = seed;
        const NetworkWeights w = init_weights(cfg);
        FloatImage hr({224, 168}, 3);
        for (auto& v : hr.values) v = rng.uniform();
        const ImagePair img = make_image_pair(std::move(hr));
        const DecoderOutput base = baseline_forward(img, cfg, w);

        ForwardOptions forced;
        forced.source = ScaleSource::all_large;
        const ForwardResult a = full_forward(img, cfg, w, forced);

        ScaleMap all_large(6, 8);
        for (auto& e : all_large.entries) e = {1.0, 1.0};
        ForwardOptions via_map;
        via_map.source = ScaleSource::ground_truth;
        via_map.gt_map = &all_large;
        const ForwardResult b = full_forward(img, cfg, w, via_map);

        bool same = a.layout.counts.k_sa == 48 && a.predictions.size() == base.predictions.size() &&
                    b.predictions.size() == base.predictions.size();
        for (std::size_t i = 0; same && i < base.predictions.size(); ++i)
            same = bit_equal(a.predictions[i], base.predictions[i]) && bit_equal(b.predictions[i], base.predictions[i]);
        differing += same ? 0 : 1;
    }
    return {differing == 0, fmt("10 seeds at 112x84, %d not bit-identical", differing)};
}

Outcome equivariance_and_anchors() {
    Rng rng(1009);
    double worst = 0.0;
    int escaped = 0;
    for (int draw = 0; draw < 1000; ++draw) {
        ArchConfig cfg;
        cfg.seed = 10000 + draw;
        cfg.queries = 8;
        NetworkWeights w = init_weights(cfg);
        const int k = rng.uniform_int(2, 40);
        const double gain = std::pow(10.0, rng.uniform(-1, 2));
        Mat x(k, cfg.d_model);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < cfg.d_model; ++j) x(i, j) = rng.normal() * gain;
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = k - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);
        Mat px(k, cfg.d_model);
        for (int i = 0; i < k; ++i) px.row(i) = x.row(perm[i]);
        std::vector<EncoderBlock> blocks = w.shallow;
        blocks.insert(blocks.end(), w.adaptive.begin(), w.adaptive.end());
        const Mat y = encoder_forward(x, blocks, cfg.heads);
        const Mat py = encoder_forward(px, blocks, cfg.heads);
        for (int i = 0; i < k; ++i) worst = std::max(worst, (py.row(i) - y.row(perm[i])).cwiseAbs().maxCoeff());

        // Stress the refinement with amplified box heads as well.
        for (auto& layer : w.decoder) layer.box_head.l2.w *= gain * 10.0;
        const DecoderOutput out = decoder_forward(y, w, cfg);
        for (const auto& s : out.layers)
            if (!(s.anchors.minCoeff() > 0.0 && s.anchors.maxCoeff() < 1.0)) ++escaped;
        for (const auto& p : out.predictions)
            for (double v : {p.box.cx, p.box.cy, p.box.w, p.box.h})
                if (!(v > 0.0 && v < 1.0)) ++escaped;
    }
    return {worst <= 1e-6 && escaped == 0,
            fmt("1000 draws, max equivariance error %.2e, %d anchor escapes", worst, escaped)};
}

Outcome procrustes_exactness() {
    Rng rng(1010);
    double worst = 0.0;
    int order_violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Points gt = oracle::random_cloud(rng, 24, 0.5);
        const Eigen::Matrix3d r = oracle::random_rotation(rng);
        const double s = rng.uniform(0.3, 3.0);
        const Eigen::RowVector3d t(rng.normal(), rng.normal(), rng.normal());
        const Points pred = ((s * gt) * r.transpose()).rowwise() + t;
        worst = std::max(worst, (procrustes_align(pred, gt) - gt).cwiseAbs().maxCoeff());
        if (pa_mpjpe(pred, gt) > mpjpe(pred, gt, 0) + 1e-9) ++order_violations;
        const Points noisy = pred + oracle::random_cloud(rng, 24, 0.05);
        const Points noisy_near = gt + oracle::random_cloud(rng, 24, 0.05);
        if (pa_mpjpe(noisy, gt) > mpjpe(noisy, gt, 0) + 1e-9) ++order_violations;
        if (pa_mpjpe(noisy_near, gt) > mpjpe(noisy_near, gt, 0) + 1e-9) ++order_violations;
    }
    return {worst <= 1e-8 && order_violations == 0,
            fmt("200 trials, max residual %.2e, %d PA > MPJPE", worst, order_violations)};
}

Outcome body_model_identities() {
    bool exact = true;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const BodyModelDef m = make_mini_model(seed);
        const Points v = forward(SmplParams::zero(m.joint_count()), m);
        exact = exact && v.rows() == m.template_vertices.rows() &&
                std::memcmp(v.data(), m.template_vertices.data(), sizeof(double) * v.size()) == 0;
    }
    const BodyModelDef m = make_mini_model(0);
    Rng rng(1011);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        SmplParams p = SmplParams::zero(m.joint_count());
        for (int j = 1; j < m.joint_count(); ++j)
            for (int k = 0; k < 3; ++k) p.pose(j, k) = rng.normal(0, 0.5);
        for (int k = 0; k < kShapeCoeffs; ++k) p.betas[k] = rng.normal();
        const Points base = forward(p, m);
        const Eigen::Matrix3d r = oracle::random_rotation(rng);
        const Eigen::Vector3d t(rng.normal(0, 2), rng.normal(0, 2), rng.normal(0, 2));
        const Eigen::AngleAxisd aa(r);
        SmplParams q = p;
        q.pose.row(m.root_joint) = (aa.angle() * aa.axis()).transpose();
        q.trans = t;
        const Eigen::RowVector3d root = rest_joints(p.betas, m).row(m.root_joint);
        const Points expect = (((base.rowwise() - root) * r.transpose()).rowwise() + root).rowwise() + t.transpose();
        worst = std::max(worst, (forward(q, m) - expect).cwiseAbs().maxCoeff());
    }
    return {exact && worst <= 1e-8,
            fmt("template %s, max rigid deviation %.2e", exact ? "exact" : "NOT exact", worst)};
}

Outcome cost_ordering() {
    const BodyModelDef model = make_mini_model(0);
    const CostModel cm;
    const Thresholds th;
    int violations = 0, sparse = 0, sparse_violations = 0;
    double sum_ratio = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Scene s = make_synthetic_scene(20000 + i, SyntheticSceneOptions{}, model);
        const ClassGrid g = classify(gt_scale_map(s), th);
        const TokenCounts k = assemble(g).counts;
        const PipelineCost pc = pipeline_cost(k, cm);
        if (!(pc.scale_adaptive <= pc.uniform_hr)) ++violations;
        sum_ratio += pc.scale_adaptive / pc.uniform_hr;
        if (k.k_b >= 0.6 * k.k_lr && k.k_small <= 0.1 * k.k_lr) {
            ++sparse;
            if (k.k_sa > k.k_lr) ++sparse_violations;
        }
    }
    const bool ok = violations == 0 && sparse_violations == 0 && sparse > 0;
    return {ok, fmt("50 scenes, %d cost violations; %d sparse scenes, %d above k_lr; mean SA/HR cost %.3f",
                    violations, sparse, sparse_violations, sum_ratio / 50)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "token-count arithmetic", 1.0, token_counts},
        {2, "normalization identity", 1.0, normalization},
        {3, "count conservation", 5000.0, count_conservation},
        {4, "scale-map oracle equivalence", 10000.0, scale_map_oracle},
        {5, "hungarian optimality", 10000.0, hungarian_optimality},
        {6, "gradient checks", 5000.0, gradient_checks},
        {7, "loss roots", 1000.0, loss_roots},
        {8, "baseline degeneration", 30000.0, baseline_degeneration},
        {9, "encoder equivariance and anchor confinement", 60000.0, equivariance_and_anchors},
        {10, "procrustes exactness", 5000.0, procrustes_exactness},
        {11, "body-model identities", 5000.0, body_model_identities},
        {12, "cost-model ordering", 10000.0, cost_ordering},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = ms < c.limit_ms;
        const bool pass = out.ok && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s  criterion %2d  %-45s %s  [%.1f ms, limit %.0f ms%s]\n", pass ? "PASS" : "FAIL", c.id, c.title,
                    out.detail.c_str(), ms, c.limit_ms, in_time ? "" : ", TOO SLOW");
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
