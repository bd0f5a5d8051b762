#pragma once

#include <optional>
#include <string>
#include <vector>

#include "satkit/body_model.hpp"
#include "satkit/match_loss.hpp"
#include "satkit/metrics.hpp"
#include "satkit/network.hpp"
#include "satkit/scale_map.hpp"
#include "satkit/scene.hpp"
#include "satkit/token_engine.hpp"

namespace satkit {

struct RunConfig {
    Thresholds thresholds;
    ArchConfig arch;
    LossWeights loss_weights;
    FocalParams focal;
    std::vector<double> bin_edges = kDefaultScaleEdges;
    std::uint64_t seed = 0;
    bool pool_twice = false;
    CostModel cost;
    double pck_threshold_mm = 150.0;
    double tp_threshold_px = 50.0;
    std::optional<std::string> body_model;  // path to a model JSON; mini model otherwise

    int pool_levels() const { return pool_twice ? 2 : 1; }
};

void validate(const RunConfig& cfg);

// High-res pixels from the scene, or a deterministic rendering of the person
// boxes over a textured background when the scene carries none.
FloatImage scene_image(const Scene& scene, std::uint64_t seed);

ScaleMap gt_scale_map(const Scene& scene);

struct EvalReport {
    int persons_gt = 0;
    int predictions = 0;
    DetectionResult detection;
    std::optional<double> mve;
    std::optional<double> pa_mve;
    std::optional<double> mpjpe;
    std::optional<double> pa_mpjpe;
    std::optional<double> nmve;
    std::optional<double> nmje;
    std::optional<double> pck;
    ScaleBinnedMve scale_bins;
};

// Scores predictions (already filtered) against the scene's GT persons.
EvalReport evaluate(const Scene& scene, std::span<const Prediction> preds, const BodyModelDef& model,
                    const RunConfig& cfg);

// Fixed-width table: detection block, then errors, then MVE per scale range.
std::string format_report_table(const EvalReport& report);

struct SceneLoss {
    MatchResult match;
    LossBreakdown breakdown;
};

// Matches all predictions against GT persons and evaluates the full loss.
SceneLoss scene_loss(const Scene& scene, const ForwardResult& fwd, const BodyModelDef& model,
                     const RunConfig& cfg);

}  // namespace satkit
