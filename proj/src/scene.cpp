#include "satkit/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "satkit/error.hpp"
#include "satkit/rng.hpp"

namespace satkit {

void validate(const Scene& scene, const BodyModelDef* model) {
    validate_resolution_pair(scene.image, scene.image_hr);
    if (scene.patch_size < 1) throw Error(Errc::invalid_argument, "patch_size must be >= 1");
    if (!(scene.fov_deg > 0.0 && scene.fov_deg < 180.0)) {
        throw Error(Errc::invalid_argument, "fov_deg must lie in (0, 180)");
    }
    if (scene.gt_focal && !(*scene.gt_focal > 0.0)) {
        throw Error(Errc::invalid_argument, "gt_focal must be positive");
    }
    for (std::size_t i = 0; i < scene.persons.size(); ++i) {
        const auto& p = scene.persons[i];
        const std::string where = "persons[" + std::to_string(i) + "]";
        if (!p.box.valid()) throw Error(Errc::invalid_annotation, where + ".bbox: invalid box");
        if (!(p.depth > 0.0) || !std::isfinite(p.depth)) {
            throw Error(Errc::invalid_annotation, where + ".depth: must be positive");
        }
        if (model && p.params) {
            if (p.params->pose.rows() != model->joint_count()) {
                throw Error(Errc::dimension_mismatch, where + ".pose: joint count mismatch");
            }
        }
        if (model && p.joints && p.joints->rows() != model->output_joint_count()) {
            throw Error(Errc::dimension_mismatch, where + ".joints: joint count mismatch");
        }
    }
    if (scene.pixels) {
        const auto& px = *scene.pixels;
        if (!(px.dims == scene.image_hr) ||
            px.data.size() != static_cast<std::size_t>(px.dims.width) * px.dims.height * 3) {
            throw Error(Errc::dimension_mismatch, "pixels must be high-res RGB");
        }
    }
}

Scene make_synthetic_scene(std::uint64_t seed, const SyntheticSceneOptions& opts,
                           const BodyModelDef& model) {
    validate_dims(opts.image);
    Rng rng(seed);
    Scene scene;
    scene.name = "synthetic-" + std::to_string(seed);
    scene.image = opts.image;
    scene.image_hr = {2 * opts.image.width, 2 * opts.image.height};
    scene.patch_size = opts.patch_size;
    const Camera cam = scene.camera();
    const double s_hr = scene.image_hr.longest_side();

    // Rest-pose extent sets the depth that yields a requested scale.
    const Points rest = forward(SmplParams::zero(model.joint_count()), model);
    const Eigen::RowVector3d span = rest.colwise().maxCoeff() - rest.colwise().minCoeff();
    const double extent = std::hypot(span.x(), span.y());

    const int count = rng.uniform_int(opts.min_persons, opts.max_persons);
    for (int k = 0; k < count; ++k) {
        const double target = rng.uniform(opts.min_scale, opts.max_scale);
        const double depth = std::max(1.5, cam.focal * extent / (target * s_hr));
        SmplParams params = SmplParams::zero(model.joint_count());
        for (int j = 1; j < model.joint_count(); ++j)
            for (int a = 0; a < 3; ++a) params.pose(j, a) = rng.normal(0.0, 0.15);
        params.pose(0, 1) = rng.uniform(-0.6, 0.6);
        for (int b = 0; b < kShapeCoeffs; ++b) params.betas[b] = rng.normal(0.0, 1.0);
        const Vec2 center(rng.uniform(0.1, 0.9) * scene.image_hr.width,
                          rng.uniform(0.15, 0.85) * scene.image_hr.height);
        const Eigen::Vector3d root_rest = rest_joints(params.betas, model).row(model.root_joint);
        params.trans = unproject(center, depth, cam) - root_rest;

        const Points verts = forward(params, model);
        const Points joints = regress_joints(verts, model.joint_regressor);
        BBox box{INFINITY, INFINITY, -INFINITY, -INFINITY};
        for (Eigen::Index v = 0; v < verts.rows(); ++v) {
            const Vec2 uv = project(verts.row(v).transpose(), cam);
            box.x_min = std::min(box.x_min, uv.x());
            box.y_min = std::min(box.y_min, uv.y());
            box.x_max = std::max(box.x_max, uv.x());
            box.y_max = std::max(box.y_max, uv.y());
        }
        PersonAnnotation person;
        person.box = box;
        person.depth = joints(model.root_joint, 2);
        if (opts.with_params) {
            person.params = params;
            person.joints = joints;
        }
        scene.persons.push_back(std::move(person));
    }
    return scene;
}

}  // namespace satkit
