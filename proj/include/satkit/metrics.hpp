#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "satkit/body_model.hpp"

namespace satkit {

// Root-aligned mean per-joint / per-vertex error in millimeters (inputs in
// meters).
double mpjpe(const Points& pred, const Points& gt, int root);
double mve(const Points& pred_verts, const Points& gt_verts, const Eigen::Vector3d& pred_root,
           const Eigen::Vector3d& gt_root);

struct Similarity {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    double scale = 1.0;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Points apply(const Points& pts) const;
};

// Least-squares similarity taking pred onto gt.
Similarity procrustes(const Points& pred, const Points& gt);
Points procrustes_align(const Points& pred, const Points& gt);

double mean_distance_mm(const Points& a, const Points& b);
double pa_mpjpe(const Points& pred, const Points& gt);

// Per-joint root-aligned errors in millimeters.
std::vector<double> joint_errors_mm(const Points& pred, const Points& gt, int root);

// Fraction of errors strictly below the threshold.
double pck(std::span<const double> errors_mm, double threshold_mm);

struct DetectionResult {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<std::pair<int, int>> matches;  // (gt, pred) true positives
};

double f1_score(double precision, double recall);

// Hungarian match on mean 2D joint distance; pairs under the pixel threshold
// count as true positives.
DetectionResult detection_prf(std::span<const Points2> pred_joints2d,
                              std::span<const Points2> gt_joints2d, double threshold_px);

struct NormalizedErrors {
    double nmve = 0.0;
    double nmje = 0.0;
};

NormalizedErrors normalized_errors(double mve, double mpjpe, double f1);

struct ScaleBin {
    double lo = 0.0;
    double hi = 1.0;
    int count = 0;
    std::optional<double> mean;  // absent when the bin is empty
};

struct ScaleBinnedMve {
    std::vector<ScaleBin> bins;
    std::optional<double> average;
};

inline const std::vector<double> kDefaultScaleEdges = {0.3, 0.5, 0.7};

// Bins [0, e0), [e0, e1), ..., [e_last, 1].
ScaleBinnedMve scale_binned_mve(std::span<const double> errors, std::span<const double> scales,
                                std::span<const double> edges);

}  // namespace satkit
