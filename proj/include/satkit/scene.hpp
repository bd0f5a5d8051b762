#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "satkit/body_model.hpp"
#include "satkit/geometry.hpp"

namespace satkit {

struct PersonAnnotation {
    BBox box;            // high-res pixels
    double depth = 1.0;  // root depth, meters
    std::optional<SmplParams> params;
    std::optional<Points> joints;  // GT 3D joints in camera space, meters
};

// Interleaved 8-bit RGB, row-major.
struct RgbImage {
    ImageDims dims;
    std::vector<std::uint8_t> data;
};

struct Scene {
    std::string name;
    ImageDims image;     // low-res
    ImageDims image_hr;  // exactly 2x low-res
    int patch_size = 14;
    double fov_deg = 60.0;
    std::optional<double> gt_focal;  // focal of the capture camera, defaults to ours
    std::vector<PersonAnnotation> persons;
    std::optional<RgbImage> pixels;  // high-res pixels, optional

    Camera camera() const { return Camera::from_fov(image_hr, fov_deg); }
};

// Checks geometry preconditions: dims, box validity, positive depths,
// parameter shapes against a body model if supplied.
void validate(const Scene& scene, const BodyModelDef* model = nullptr);

struct SyntheticSceneOptions {
    ImageDims image{644, 364};
    int patch_size = 14;
    int min_persons = 1;
    int max_persons = 8;
    double min_scale = 0.05;
    double max_scale = 0.9;
    bool with_params = true;
};

// Random persons with consistent box, depth and SMPL parameters.
Scene make_synthetic_scene(std::uint64_t seed, const SyntheticSceneOptions& opts,
                           const BodyModelDef& model);

}  // namespace satkit
