#include "satkit/match_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "satkit/error.hpp"

namespace satkit {

void validate(const LossWeights& w) {
    for (double v : {w.map, w.depth, w.pose, w.shape, w.j3d, w.j2d, w.box, w.det}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(Errc::invalid_argument, "loss weights must be finite and non-negative");
        }
    }
}

double focal_loss(double p, double y, const FocalParams& fp) {
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    const double pt = y > 0.5 ? pc : 1.0 - pc;
    const double at = y > 0.5 ? fp.alpha : 1.0 - fp.alpha;
    return -at * std::pow(1.0 - pt, fp.gamma) * std::log(pt);
}

double focal_loss_grad(double p, double y, const FocalParams& fp) {
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    if (pc != p) return 0.0;  // flat outside the clamp
    const bool pos = y > 0.5;
    const double pt = pos ? pc : 1.0 - pc;
    const double at = pos ? fp.alpha : 1.0 - fp.alpha;
    const double q = 1.0 - pt;
    double dpt = -at * std::pow(q, fp.gamma) / pt;
    if (fp.gamma != 0.0) dpt += at * fp.gamma * std::pow(q, fp.gamma - 1.0) * std::log(pt);
    return pos ? dpt : -dpt;
}

double loss_map(const ScaleMap& pred, const ScaleMap& gt, const FocalParams& fp) {
    if (pred.rows != gt.rows || pred.cols != gt.cols || pred.entries.size() != gt.entries.size()) {
        throw Error(Errc::dimension_mismatch, "scale maps differ in grid size");
    }
    if (pred.count() == 0) return 0.0;
    double conf = 0.0;
    double scale = 0.0;
    int persons = 0;
    for (int i = 0; i < pred.count(); ++i) {
        conf += focal_loss(pred.entries[i].c, gt.entries[i].c, fp);
        if (gt.entries[i].c > 0.5) {
            scale += std::abs(pred.entries[i].s - gt.entries[i].s);
            ++persons;
        }
    }
    return conf / pred.count() + (persons > 0 ? scale / persons : 0.0);
}

namespace {

void check_depth_args(double d, double d_gt, double f, double f_gt) {
    if (!(d > 0.0) || !(d_gt > 0.0) || !(f > 0.0) || !(f_gt > 0.0)) {
        throw Error(Errc::invalid_argument, "depth loss arguments must be positive");
    }
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double loss_depth(double d, double d_gt, double f, double f_gt) {
    check_depth_args(d, d_gt, f, f_gt);
    return std::abs(1.0 / d_gt - f / (f_gt * d));
}

double loss_depth_grad(double d, double d_gt, double f, double f_gt) {
    check_depth_args(d, d_gt, f, f_gt);
    return sign(1.0 / d_gt - f / (f_gt * d)) * f / (f_gt * d * d);
}

double l1_loss(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size()) throw Error(Errc::dimension_mismatch, "L1 operands differ in size");
    if (pred.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - gt[i]);
    return acc / pred.size();
}

Eigen::VectorXd l1_loss_grad(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size()) throw Error(Errc::dimension_mismatch, "L1 operands differ in size");
    Eigen::VectorXd g(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) g[i] = sign(pred[i] - gt[i]) / pred.size();
    return g;
}

double l1_loss(const Points& pred, const Points& gt) {
    if (pred.rows() != gt.rows()) {
        throw Error(Errc::dimension_mismatch, "joint count mismatch: " + std::to_string(pred.rows()) +
                                                  " vs " + std::to_string(gt.rows()));
    }
    return l1_loss(std::span<const double>(pred.data(), pred.size()),
                   std::span<const double>(gt.data(), gt.size()));
}

double l1_loss(const Points2& pred, const Points2& gt) {
    if (pred.rows() != gt.rows()) {
        throw Error(Errc::dimension_mismatch, "2D joint count mismatch: " + std::to_string(pred.rows()) +
                                                  " vs " + std::to_string(gt.rows()));
    }
    return l1_loss(std::span<const double>(pred.data(), pred.size()),
                   std::span<const double>(gt.data(), gt.size()));
}

double loss_box(const CenterBox& pred, const BBox& gt) {
    const BBox p = to_corner(pred);
    const double corners = (std::abs(p.x_min - gt.x_min) + std::abs(p.y_min - gt.y_min) +
                            std::abs(p.x_max - gt.x_max) + std::abs(p.y_max - gt.y_max)) /
                           4.0;
    return corners + (1.0 - giou(p, gt));
}

Eigen::Vector4d loss_box_grad(const CenterBox& pred, const BBox& gt) {
    const BBox p = to_corner(pred);
    // Gradient over corners (x0, y0, x1, y1) first.
    Eigen::Vector4d g;
    g << sign(p.x_min - gt.x_min) / 4.0, sign(p.y_min - gt.y_min) / 4.0,
        sign(p.x_max - gt.x_max) / 4.0, sign(p.y_max - gt.y_max) / 4.0;

    const double iw_raw = std::min(p.x_max, gt.x_max) - std::max(p.x_min, gt.x_min);
    const double ih_raw = std::min(p.y_max, gt.y_max) - std::max(p.y_min, gt.y_min);
    const bool overlap = iw_raw > 0.0 && ih_raw > 0.0;
    const double iw = overlap ? iw_raw : 0.0;
    const double ih = overlap ? ih_raw : 0.0;
    const double inter = iw * ih;
    const double pw = p.width();
    const double ph = p.height();
    const double uni = pw * ph + gt.area() - inter;
    const double cw = std::max(p.x_max, gt.x_max) - std::min(p.x_min, gt.x_min);
    const double ch = std::max(p.y_max, gt.y_max) - std::min(p.y_min, gt.y_min);
    const double enc = cw * ch;
    if (uni <= 0.0 || enc <= 0.0) return g;

    Eigen::Vector4d d_inter = Eigen::Vector4d::Zero();
    if (overlap) {
        const double diw_x0 = p.x_min > gt.x_min ? -1.0 : 0.0;
        const double diw_x1 = p.x_max < gt.x_max ? 1.0 : 0.0;
        const double dih_y0 = p.y_min > gt.y_min ? -1.0 : 0.0;
        const double dih_y1 = p.y_max < gt.y_max ? 1.0 : 0.0;
        d_inter << diw_x0 * ih, dih_y0 * iw, diw_x1 * ih, dih_y1 * iw;
    }
    Eigen::Vector4d d_area;
    d_area << -ph, -pw, ph, pw;
    const Eigen::Vector4d d_uni = d_area - d_inter;
    Eigen::Vector4d d_enc;
    d_enc << (p.x_min < gt.x_min ? -ch : 0.0), (p.y_min < gt.y_min ? -cw : 0.0),
        (p.x_max > gt.x_max ? ch : 0.0), (p.y_max > gt.y_max ? cw : 0.0);
    // giou = I/U - 1 + U/C
    const Eigen::Vector4d d_giou =
        d_inter / uni - inter * d_uni / (uni * uni) + d_uni / enc - uni * d_enc / (enc * enc);
    g -= d_giou;

    Eigen::Vector4d out;
    out << g[0] + g[2], g[1] + g[3], (g[2] - g[0]) / 2.0, (g[3] - g[1]) / 2.0;
    return out;
}

Points2 project_normalized(const Points& joints3d, const LossContext& ctx) {
    const double norm = ctx.image_hr.longest_side();
    Points2 out(joints3d.rows(), 2);
    for (Eigen::Index j = 0; j < joints3d.rows(); ++j) {
        Vec3 p = joints3d.row(j).transpose();
        p.z() = std::max(p.z(), kMinProjectionDepth);
        const Vec2 uv = project(p, ctx.camera);
        out(j, 0) = uv.x() / norm;
        out(j, 1) = uv.y() / norm;
    }
    return out;
}

namespace {

const BodyModelDef& require_model(const LossContext& ctx) {
    if (!ctx.model) throw Error(Errc::invalid_argument, "loss context has no body model");
    return *ctx.model;
}

}  // namespace

PredictionGeometry prediction_geometry(const Prediction& pred, const LossContext& ctx) {
    const BodyModelDef& model = require_model(ctx);
    SmplParams params;
    params.pose = pred.pose;
    params.betas = pred.betas;
    params.trans = pred.trans;
    PredictionGeometry g;
    g.joints3d = regress_joints(forward(params, model), model.joint_regressor);
    g.joints2d = project_normalized(g.joints3d, ctx);
    g.root_depth = g.joints3d(model.root_joint, 2);
    return g;
}

PersonTarget person_target(const PersonAnnotation& person, const LossContext& ctx) {
    const BodyModelDef& model = require_model(ctx);
    PersonTarget t;
    t.box = normalize_box(person.box, ctx.image_hr);
    t.depth = person.depth;
    t.params = person.params.value_or(SmplParams::zero(model.joint_count()));
    if (person.joints) {
        t.joints3d = *person.joints;
    } else if (person.params) {
        t.joints3d = regress_joints(forward(*person.params, model), model.joint_regressor);
    } else {
        throw Error(Errc::invalid_annotation, "person needs GT joints or SMPL parameters for losses");
    }
    if (t.joints3d.rows() != model.output_joint_count()) {
        throw Error(Errc::dimension_mismatch, "GT joint count does not match the joint regressor");
    }
    t.joints2d = project_normalized(t.joints3d, ctx);
    return t;
}

Eigen::MatrixXd matching_cost_matrix(std::span<const Prediction> preds,
                                     std::span<const PredictionGeometry> geoms,
                                     std::span<const PersonTarget> targets, const LossWeights& w) {
    if (preds.size() != geoms.size()) {
        throw Error(Errc::dimension_mismatch, "one geometry per prediction expected");
    }
    Eigen::MatrixXd cost(preds.size(), targets.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (std::size_t j = 0; j < targets.size(); ++j) {
            cost(i, j) = w.box * loss_box(preds[i].box, targets[j].box) -
                         w.det * preds[i].confidence +
                         w.j2d * l1_loss(geoms[i].joints2d, targets[j].joints2d);
        }
    }
    return cost;
}

MatchResult hungarian(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());  // predictions
    const int m = static_cast<int>(cost.cols());  // ground truth
    MatchResult res;
    if (m == 0) return res;
    if (m > n) throw Error(Errc::infeasible, "more ground-truth persons than predictions");
    if (!cost.allFinite()) throw Error(Errc::invalid_argument, "cost matrix must be finite");

    // Shortest augmenting paths with potentials; GT are the rows here.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(m + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> owner(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= m; ++i) {
        owner[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = owner[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(j - 1, i0 - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const int j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    res.gt_to_pred.assign(m, -1);
    for (int j = 1; j <= n; ++j)
        if (owner[j] != 0) res.gt_to_pred[owner[j] - 1] = j - 1;
    for (int g = 0; g < m; ++g) res.cost += cost(res.gt_to_pred[g], g);
    return res;
}

LossBreakdown total_loss(std::span<const Prediction> preds, std::span<const PredictionGeometry> geoms,
                         std::span<const PersonTarget> targets, const MatchResult& match,
                         const ScaleMap& pred_map, const ScaleMap& gt_map, const LossWeights& w,
                         const LossContext& ctx, const FocalParams& fp) {
    validate(w);
    if (preds.size() != geoms.size()) {
        throw Error(Errc::dimension_mismatch, "one geometry per prediction expected");
    }
    if (match.gt_to_pred.size() != targets.size()) {
        throw Error(Errc::dimension_mismatch, "match does not cover every target");
    }
    LossBreakdown out;
    LossTerms& t = out.terms;
    t.map = loss_map(pred_map, gt_map, fp);

    std::vector<char> matched(preds.size(), 0);
    const double f = ctx.camera.focal;
    const double f_gt = ctx.gt_focal > 0.0 ? ctx.gt_focal : f;
    for (std::size_t g = 0; g < targets.size(); ++g) {
        const int i = match.gt_to_pred[g];
        if (i < 0 || i >= static_cast<int>(preds.size()) || matched[i]) {
            throw Error(Errc::invalid_argument, "match is not an injection into predictions");
        }
        matched[i] = 1;
        const Prediction& p = preds[i];
        const PersonTarget& tg = targets[g];
        PersonLoss pl;
        pl.gt = static_cast<int>(g);
        pl.pred = i;
        const double d = std::max(geoms[i].root_depth, kMinProjectionDepth);
        pl.depth = loss_depth(d, tg.depth, f, f_gt);
        pl.pose = l1_loss(p.pose, tg.params.pose);
        pl.shape = l1_loss(std::span<const double>(p.betas.data(), p.betas.size()),
                           std::span<const double>(tg.params.betas.data(), tg.params.betas.size()));
        pl.j3d = l1_loss(geoms[i].joints3d, tg.joints3d);
        pl.j2d = l1_loss(geoms[i].joints2d, tg.joints2d);
        pl.box = loss_box(p.box, tg.box);
        out.persons.push_back(pl);
    }
    if (!out.persons.empty()) {
        const double m = static_cast<double>(out.persons.size());
        for (const auto& pl : out.persons) {
            t.depth += pl.depth / m;
            t.pose += pl.pose / m;
            t.shape += pl.shape / m;
            t.j3d += pl.j3d / m;
            t.j2d += pl.j2d / m;
            t.box += pl.box / m;
        }
    }
    if (!preds.empty()) {
        for (std::size_t i = 0; i < preds.size(); ++i)
            t.det += focal_loss(preds[i].confidence, matched[i] ? 1.0 : 0.0, fp);
        t.det /= static_cast<double>(preds.size());
    }

    LossTerms& wt = out.weighted;
    wt.map = w.map * t.map;
    wt.depth = w.depth * t.depth;
    wt.pose = w.pose * t.pose;
    wt.shape = w.shape * t.shape;
    wt.j3d = w.j3d * t.j3d;
    wt.j2d = w.j2d * t.j2d;
    wt.box = w.box * t.box;
    wt.det = w.det * t.det;
    out.total = wt.map + wt.depth + wt.pose + wt.shape + wt.j3d + wt.j2d + wt.box + wt.det;
    return out;
}

GradCheck grad_check(const std::function<double(const Eigen::VectorXd&)>& fn,
                     const Eigen::VectorXd& analytic, const Eigen::VectorXd& point, double step) {
    if (analytic.size() != point.size()) {
        throw Error(Errc::dimension_mismatch, "gradient and point differ in size");
    }
    GradCheck out;
    out.analytic = analytic;
    out.numeric.resize(point.size());
    for (Eigen::Index i = 0; i < point.size(); ++i) {
        Eigen::VectorXd hi = point;
        Eigen::VectorXd lo = point;
        hi[i] += step;
        lo[i] -= step;
        out.numeric[i] = (fn(hi) - fn(lo)) / (2.0 * step);
    }
    const double scale = std::max(out.numeric.lpNorm<Eigen::Infinity>(), 1e-8);
    out.max_rel_deviation = (out.analytic - out.numeric).lpNorm<Eigen::Infinity>() / scale;
    return out;
}

}  // namespace satkit
