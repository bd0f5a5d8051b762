#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "satkit/body_model.hpp"
#include "satkit/geometry.hpp"
#include "satkit/network.hpp"
#include "satkit/scale_map.hpp"
#include "satkit/scene.hpp"

namespace satkit {

struct LossWeights {
    double map = 4.0;
    double depth = 0.5;
    double pose = 5.0;
    double shape = 3.0;
    double j3d = 8.0;
    double j2d = 40.0;
    double box = 2.0;
    double det = 4.0;
};

void validate(const LossWeights& w);

struct FocalParams {
    double alpha = 0.25;
    double gamma = 2.0;
};

inline constexpr double kProbClamp = 1e-7;

// -alpha_t (1 - p_t)^gamma log p_t with p clamped to [eps, 1 - eps].
double focal_loss(double p, double y, const FocalParams& fp = {});
double focal_loss_grad(double p, double y, const FocalParams& fp = {});

// Mean focal loss on confidence over all patches plus mean L1 on scale over
// ground-truth person patches.
double loss_map(const ScaleMap& pred, const ScaleMap& gt, const FocalParams& fp = {});

// |1/d_gt - f / (f_gt d)|
double loss_depth(double d, double d_gt, double f, double f_gt);
double loss_depth_grad(double d, double d_gt, double f, double f_gt);

// Mean absolute difference.
double l1_loss(std::span<const double> pred, std::span<const double> gt);
Eigen::VectorXd l1_loss_grad(std::span<const double> pred, std::span<const double> gt);
double l1_loss(const Points& pred, const Points& gt);
double l1_loss(const Points2& pred, const Points2& gt);

// Mean corner L1 plus (1 - GIoU); both boxes normalized.
double loss_box(const CenterBox& pred, const BBox& gt);
// Gradient with respect to (cx, cy, w, h).
Eigen::Vector4d loss_box_grad(const CenterBox& pred, const BBox& gt);

// Everything the losses need about one query.
struct PredictionGeometry {
    Points joints3d;  // camera space, meters
    Points2 joints2d;  // projected, divided by the longest high-res side
    double root_depth = 0.0;
};

struct PersonTarget {
    BBox box;  // normalized
    double depth = 1.0;
    SmplParams params;
    Points joints3d;
    Points2 joints2d;
};

struct LossContext {
    const BodyModelDef* model = nullptr;
    Camera camera;
    ImageDims image_hr;
    double gt_focal = 0.0;  // f~ of the capture camera
};

// Joints closer than this are moved onto this plane before projecting.
inline constexpr double kMinProjectionDepth = 1e-2;

Points2 project_normalized(const Points& joints3d, const LossContext& ctx);

PredictionGeometry prediction_geometry(const Prediction& pred, const LossContext& ctx);
// GT joints come from the annotation, else from forward() on the GT params.
PersonTarget person_target(const PersonAnnotation& person, const LossContext& ctx);

Eigen::MatrixXd matching_cost_matrix(std::span<const Prediction> preds,
                                     std::span<const PredictionGeometry> geoms,
                                     std::span<const PersonTarget> targets, const LossWeights& w);

struct MatchResult {
    std::vector<int> gt_to_pred;
    double cost = 0.0;
};

// Minimum-cost injective assignment of columns (GT) to rows (predictions).
MatchResult hungarian(const Eigen::MatrixXd& cost);

struct LossTerms {
    double map = 0.0;
    double depth = 0.0;
    double pose = 0.0;
    double shape = 0.0;
    double j3d = 0.0;
    double j2d = 0.0;
    double box = 0.0;
    double det = 0.0;
};

struct PersonLoss {
    int gt = 0;
    int pred = 0;
    double depth = 0.0;
    double pose = 0.0;
    double shape = 0.0;
    double j3d = 0.0;
    double j2d = 0.0;
    double box = 0.0;
};

struct LossBreakdown {
    LossTerms terms;     // unweighted, reduced
    LossTerms weighted;  // lambda * term
    double total = 0.0;
    std::vector<PersonLoss> persons;
};

LossBreakdown total_loss(std::span<const Prediction> preds, std::span<const PredictionGeometry> geoms,
                         std::span<const PersonTarget> targets, const MatchResult& match,
                         const ScaleMap& pred_map, const ScaleMap& gt_map, const LossWeights& w,
                         const LossContext& ctx, const FocalParams& fp = {});

struct GradCheck {
    double max_rel_deviation = 0.0;
    Eigen::VectorXd analytic;
    Eigen::VectorXd numeric;
};

// Central differences; deviation is ||analytic - numeric||_inf over
// max(||numeric||_inf, 1e-8).
GradCheck grad_check(const std::function<double(const Eigen::VectorXd&)>& fn,
                     const Eigen::VectorXd& analytic, const Eigen::VectorXd& point, double step);

}  // namespace satkit
