#include "satkit/metrics.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "satkit/error.hpp"
#include "satkit/match_loss.hpp"

namespace satkit {

namespace {

constexpr double kMm = 1000.0;

void require_same_count(const Points& a, const Points& b) {
    if (a.rows() != b.rows()) {
        throw Error(Errc::dimension_mismatch, "point counts differ: " + std::to_string(a.rows()) +
                                                  " vs " + std::to_string(b.rows()));
    }
}

}  // namespace

double mean_distance_mm(const Points& a, const Points& b) {
    require_same_count(a, b);
    if (a.rows() == 0) return 0.0;
    return (a - b).rowwise().norm().mean() * kMm;
}

double mpjpe(const Points& pred, const Points& gt, int root) {
    require_same_count(pred, gt);
    if (root < 0 || root >= pred.rows()) throw Error(Errc::invalid_argument, "root index out of range");
    Points p = pred.rowwise() - pred.row(root);
    Points g = gt.rowwise() - gt.row(root);
    return mean_distance_mm(p, g);
}

double mve(const Points& pred_verts, const Points& gt_verts, const Eigen::Vector3d& pred_root,
           const Eigen::Vector3d& gt_root) {
    require_same_count(pred_verts, gt_verts);
    Points p = pred_verts.rowwise() - pred_root.transpose();
    Points g = gt_verts.rowwise() - gt_root.transpose();
    return mean_distance_mm(p, g);
}

std::vector<double> joint_errors_mm(const Points& pred, const Points& gt, int root) {
    require_same_count(pred, gt);
    if (root < 0 || root >= pred.rows()) throw Error(Errc::invalid_argument, "root index out of range");
    std::vector<double> out(pred.rows());
    for (Eigen::Index j = 0; j < pred.rows(); ++j)
        out[j] = ((pred.row(j) - pred.row(root)) - (gt.row(j) - gt.row(root))).norm() * kMm;
    return out;
}

Points Similarity::apply(const Points& pts) const {
    Points out = (scale * (pts * rotation.transpose())).rowwise() + translation.transpose();
    return out;
}

Similarity procrustes(const Points& pred, const Points& gt) {
    require_same_count(pred, gt);
    if (pred.rows() < 3) throw Error(Errc::degenerate_geometry, "need at least 3 points");
    const Eigen::RowVector3d mp = pred.colwise().mean();
    const Eigen::RowVector3d mg = gt.colwise().mean();
    const Points p = pred.rowwise() - mp;
    const Points g = gt.rowwise() - mg;

    Eigen::JacobiSVD<Eigen::MatrixXd> spread(p, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = spread.singularValues();
    if (sv[0] <= 0.0 || sv[1] <= 1e-12 * sv[0]) {
        throw Error(Errc::degenerate_geometry, "points are collinear");
    }

    // Cross-covariance gt^T pred; R = U diag(1, 1, det) V^T.
    const Eigen::Matrix3d cov = g.transpose() * p;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) fix(2, 2) = -1.0;
    Similarity s;
    s.rotation = svd.matrixU() * fix * svd.matrixV().transpose();
    const double var = p.squaredNorm();
    s.scale = (svd.singularValues().asDiagonal() * fix).trace() / var;
    s.translation = mg.transpose() - s.scale * s.rotation * mp.transpose();
    return s;
}

Points procrustes_align(const Points& pred, const Points& gt) { return procrustes(pred, gt).apply(pred); }

double pa_mpjpe(const Points& pred, const Points& gt) {
    return mean_distance_mm(procrustes_align(pred, gt), gt);
}

double pck(std::span<const double> errors_mm, double threshold_mm) {
    if (errors_mm.empty()) return 0.0;
    int hits = 0;
    for (double e : errors_mm) hits += e < threshold_mm ? 1 : 0;
    return static_cast<double>(hits) / errors_mm.size();
}

double f1_score(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

DetectionResult detection_prf(std::span<const Points2> pred_joints2d,
                              std::span<const Points2> gt_joints2d, double threshold_px) {
    DetectionResult r;
    const int n = static_cast<int>(pred_joints2d.size());
    const int m = static_cast<int>(gt_joints2d.size());
    if (n > 0 && m > 0) {
        Eigen::MatrixXd dist(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                if (pred_joints2d[i].rows() != gt_joints2d[j].rows()) {
                    throw Error(Errc::dimension_mismatch, "2D joint counts differ");
                }
                dist(i, j) = (pred_joints2d[i] - gt_joints2d[j]).rowwise().norm().mean();
            }
        // Hungarian wants no more columns than rows.
        const bool transpose = m > n;
        const MatchResult match = hungarian(transpose ? Eigen::MatrixXd(dist.transpose()) : dist);
        for (std::size_t c = 0; c < match.gt_to_pred.size(); ++c) {
            const int row = match.gt_to_pred[c];
            const int pred = transpose ? static_cast<int>(c) : row;
            const int gt = transpose ? row : static_cast<int>(c);
            if (dist(pred, gt) < threshold_px) r.matches.emplace_back(gt, pred);
        }
    }
    r.tp = static_cast<int>(r.matches.size());
    r.fp = n - r.tp;
    r.fn = m - r.tp;
    if (n == 0 && m == 0) {
        r.precision = r.recall = 1.0;
    } else {
        r.precision = n > 0 ? static_cast<double>(r.tp) / n : 0.0;
        r.recall = m > 0 ? static_cast<double>(r.tp) / m : 0.0;
    }
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

NormalizedErrors normalized_errors(double mve_mm, double mpjpe_mm, double f1) {
    if (!(f1 > 0.0)) throw Error(Errc::undefined_metric, "normalized errors need F1 > 0");
    return {mve_mm / f1, mpjpe_mm / f1};
}

ScaleBinnedMve scale_binned_mve(std::span<const double> errors, std::span<const double> scales,
                                std::span<const double> edges) {
    if (errors.size() != scales.size()) {
        throw Error(Errc::dimension_mismatch, "one scale per error expected");
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!(edges[i] > 0.0 && edges[i] < 1.0) || (i > 0 && edges[i] <= edges[i - 1])) {
            throw Error(Errc::invalid_argument, "bin edges must be increasing inside (0, 1)");
        }
    }
    ScaleBinnedMve out;
    double lo = 0.0;
    for (std::size_t i = 0; i <= edges.size(); ++i) {
        const double hi = i < edges.size() ? edges[i] : 1.0;
        out.bins.push_back({lo, hi, 0, std::nullopt});
        lo = hi;
    }
    std::vector<double> sums(out.bins.size(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < errors.size(); ++k) {
        std::size_t b = 0;
        while (b < edges.size() && scales[k] >= edges[b]) ++b;
        sums[b] += errors[k];
        out.bins[b].count += 1;
        total += errors[k];
    }
    for (std::size_t b = 0; b < out.bins.size(); ++b)
        if (out.bins[b].count > 0) out.bins[b].mean = sums[b] / out.bins[b].count;
    if (!errors.empty()) out.average = total / errors.size();
    return out;
}

}  // namespace satkit
