#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "satkit/body_model.hpp"
#include "satkit/error.hpp"
#include "satkit/geometry.hpp"
#include "satkit/match_loss.hpp"
#include "satkit/metrics.hpp"
#include "satkit/network.hpp"
#include "satkit/pipeline.hpp"
#include "satkit/scale_map.hpp"
#include "satkit/serialize.hpp"
#include "satkit/token_engine.hpp"

namespace py = pybind11;
using namespace satkit;

namespace {

using Box4 = std::array<double, 4>;
using ClassArray = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

BBox to_box(const Box4& b) { return {b[0], b[1], b[2], b[3]}; }

ClassGrid to_grid(const ClassArray& classes) {
    ClassGrid g(static_cast<int>(classes.rows()), static_cast<int>(classes.cols()));
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            const int v = classes(r, c);
            if (v > 2) throw Error(Errc::invalid_argument, "classes must be 0 (background), 1 (small) or 2 (large)");
            g.at(r, c) = static_cast<PatchClass>(v);
        }
    return g;
}

py::dict counts_dict(const TokenCounts& k) {
    py::dict d;
    d["k_lr"] = k.k_lr;
    d["k_b"] = k.k_b;
    d["k_b_pooled"] = k.k_b_pooled;
    d["pooled_groups"] = k.pooled_groups;
    d["remainder"] = k.remainder;
    d["k_small"] = k.k_small;
    d["k_large"] = k.k_large;
    d["k_hr"] = k.k_hr;
    d["k_sa"] = k.k_sa;
    return d;
}

RunConfig config_from_text(const std::string& text) {
    return text.empty() ? RunConfig{} : run_config_from_json(parse_json_text(text, "<config>"));
}

}  // namespace

PYBIND11_MODULE(_satkit, m) {
    m.doc() = "Scale-adaptive token pipeline for multi-person mesh estimation";

    py::register_exception<Error>(m, "SatkitError", PyExc_ValueError);

    m.def("focal_from_fov", &focal_from_fov, py::arg("longest_side_hr"), py::arg("fov_deg") = 60.0);
    m.def(
        "project",
        [](const Vec3& point, double focal, double pu, double pv) {
            return project(point, Camera{focal, pu, pv, 60.0});
        },
        py::arg("point"), py::arg("focal"), py::arg("pu"), py::arg("pv"));
    m.def(
        "person_scale", [](const Box4& box, double s_hr) { return person_scale(to_box(box), s_hr); },
        py::arg("box"), py::arg("longest_side_hr"));
    m.def("iou", [](const Box4& a, const Box4& b) { return iou(to_box(a), to_box(b)); });
    m.def("giou", [](const Box4& a, const Box4& b) { return giou(to_box(a), to_box(b)); });

    m.def(
        "partition",
        [](int width, int height, int patch) {
            const PatchGrid g = partition({width, height}, patch);
            return py::make_tuple(g.rows, g.cols);
        },
        py::arg("width"), py::arg("height"), py::arg("patch") = 14,
        "Patch grid (rows, cols) of a low-res image.");

    m.def(
        "build_gt_scale_map",
        [](int width, int height, const RowMat& boxes, const Eigen::VectorXd& depths, int patch) {
            if (boxes.rows() != depths.size() || (boxes.rows() > 0 && boxes.cols() != 4)) {
                throw Error(Errc::dimension_mismatch, "boxes must be N x 4 with one depth each");
            }
            std::vector<PersonAnnotation> persons(boxes.rows());
            for (Eigen::Index i = 0; i < boxes.rows(); ++i) {
                persons[i].box = {boxes(i, 0), boxes(i, 1), boxes(i, 2), boxes(i, 3)};
                persons[i].depth = depths[i];
            }
            const PatchGrid grid = partition({width, height}, patch);
            const ScaleMap map = build_gt_scale_map(grid, persons, 2.0 * std::max(width, height));
            RowMat c(map.rows, map.cols), s(map.rows, map.cols);
            for (int r = 0; r < map.rows; ++r)
                for (int k = 0; k < map.cols; ++k) {
                    c(r, k) = map.at(r, k).c;
                    s(r, k) = map.at(r, k).s;
                }
            return py::make_tuple(c, s);
        },
        py::arg("width"), py::arg("height"), py::arg("boxes"), py::arg("depths"), py::arg("patch") = 14,
        "GT (c, s) maps for a low-res image of width x height; boxes in high-res pixels.");

    m.def(
        "classify",
        [](const RowMat& c, const RowMat& s, double alpha_c, double alpha_s) {
            if (c.rows() != s.rows() || c.cols() != s.cols()) throw Error(Errc::dimension_mismatch, "c and s differ in shape");
            const Thresholds th{alpha_c, alpha_s, 0.5};
            validate(th);
            ClassArray out(c.rows(), c.cols());
            for (Eigen::Index r = 0; r < c.rows(); ++r)
                for (Eigen::Index k = 0; k < c.cols(); ++k)
                    out(r, k) = static_cast<std::uint8_t>(classify(ScaleEntry{c(r, k), s(r, k)}, th));
            return out;
        },
        py::arg("c"), py::arg("s"), py::arg("alpha_c") = 0.3, py::arg("alpha_s") = 0.5,
        "Classes per patch: 0 background, 1 small, 2 large.");

    m.def(
        "token_counts", [](const ClassArray& classes, int pool_levels) {
            return counts_dict(assemble(to_grid(classes), pool_levels).counts);
        },
        py::arg("classes"), py::arg("pool_levels") = 1);
    m.def(
        "assemble",
        [](const ClassArray& classes, int pool_levels) {
            const TokenLayout l = assemble(to_grid(classes), pool_levels);
            py::list records;
            for (const auto& r : l.records) {
                py::dict d;
                d["provenance"] = provenance_name(r.provenance);
                d["sources"] = r.sources;
                d["center"] = py::make_tuple(r.cx, r.cy);
                d["extent"] = py::make_tuple(r.ex, r.ey);
                records.append(d);
            }
            return py::make_tuple(records, counts_dict(l.counts));
        },
        py::arg("classes"), py::arg("pool_levels") = 1);

    m.def(
        "attention_cost",
        [](std::int64_t k, int d_model, int mlp_ratio) {
            CostModel cm;
            cm.d_model = d_model;
            cm.mlp_ratio = mlp_ratio;
            return attention_cost(k, cm);
        },
        py::arg("k"), py::arg("d_model") = 768, py::arg("mlp_ratio") = 4);

    m.def(
        "focal_loss", [](double p, double y, double alpha, double gamma) { return focal_loss(p, y, {alpha, gamma}); },
        py::arg("p"), py::arg("y"), py::arg("alpha") = 0.25, py::arg("gamma") = 2.0);
    m.def("loss_depth", &loss_depth, py::arg("d"), py::arg("d_gt"), py::arg("f"), py::arg("f_gt"));
    m.def(
        "loss_box",
        [](const Box4& pred_center, const Box4& gt) {
            return loss_box(CenterBox{pred_center[0], pred_center[1], pred_center[2], pred_center[3]}, to_box(gt));
        },
        py::arg("pred_center"), py::arg("gt"), "pred as (cx, cy, w, h), gt as corners; both normalized.");
    m.def(
        "hungarian",
        [](const Eigen::MatrixXd& cost) {
            const MatchResult r = hungarian(cost);
            return py::make_tuple(r.gt_to_pred, r.cost);
        },
        py::arg("cost"), "Rows are predictions, columns ground truth; returns (gt_to_pred, total cost).");

    m.def("procrustes_align", &procrustes_align, py::arg("pred"), py::arg("gt"));
    m.def("mpjpe", &mpjpe, py::arg("pred"), py::arg("gt"), py::arg("root") = 0);
    m.def("pa_mpjpe", &pa_mpjpe, py::arg("pred"), py::arg("gt"));
    m.def(
        "pck", [](const std::vector<double>& errors, double th) { return pck(errors, th); },
        py::arg("errors_mm"), py::arg("threshold_mm") = 150.0);
    m.def(
        "normalized_errors",
        [](double mve, double mpjpe_mm, double f1) {
            const NormalizedErrors n = normalized_errors(mve, mpjpe_mm, f1);
            return py::make_tuple(n.nmve, n.nmje);
        },
        py::arg("mve"), py::arg("mpjpe"), py::arg("f1"));

    py::class_<BodyModelDef>(m, "BodyModel")
        .def_property_readonly("template_vertices", [](const BodyModelDef& b) { return b.template_vertices; })
        .def_property_readonly("parents", [](const BodyModelDef& b) { return b.parents; })
        .def_property_readonly("skin_weights", [](const BodyModelDef& b) { return b.skin_weights; })
        .def_property_readonly("joint_regressor", [](const BodyModelDef& b) { return b.joint_regressor; })
        .def_property_readonly("joint_count", &BodyModelDef::joint_count)
        .def_property_readonly("vertex_count", &BodyModelDef::vertex_count)
        .def(
            "forward",
            [](const BodyModelDef& b, const Points& pose, const Eigen::VectorXd& betas, const Eigen::Vector3d& trans) {
                return forward(SmplParams{pose, betas, trans}, b);
            },
            py::arg("pose"), py::arg("betas"), py::arg("trans"))
        .def(
            "joints",
            [](const BodyModelDef& b, const Points& vertices) { return regress_joints(vertices, b.joint_regressor); },
            py::arg("vertices"));
    m.def("make_mini_model", &make_mini_model, py::arg("seed") = 0, py::arg("vertices_per_joint") = 8);

    m.def(
        "forward_scene",
        [](const std::string& scene_json, const std::string& config_json, std::uint64_t seed, bool gt_scale_map_mode) {
            RunConfig cfg = config_from_text(config_json);
            cfg.seed = seed;
            cfg.arch.seed = seed;
            const BodyModelDef model = make_mini_model(0);
            cfg.arch.joints = model.joint_count();
            validate(cfg);
            const Scene scene = scene_from_json(parse_json_text(scene_json, "<scene>"));
            validate(scene, &model);
            ForwardResult fwd;
            {
                py::gil_scoped_release release;
                const NetworkWeights w = init_weights(cfg.arch);
                const ImagePair images = make_image_pair(scene_image(scene, cfg.seed));
                const ScaleMap gt = gt_scale_map(scene);
                ForwardOptions fo;
                fo.thresholds = cfg.thresholds;
                fo.source = gt_scale_map_mode ? ScaleSource::ground_truth : ScaleSource::predicted;
                fo.gt_map = &gt;
                fo.pool_levels = cfg.pool_levels();
                fwd = full_forward(images, cfg.arch, w, fo);
            }
            const PredictionSet set{scene.name, fwd.predictions, fwd.valid};
            return py::make_tuple(dump(to_json(set)), counts_dict(fwd.layout.counts));
        },
        py::arg("scene_json"), py::arg("config_json") = "", py::arg("seed") = 0, py::arg("gt_scale_map") = false,
        "Runs the seeded network on a scene; returns (prediction-set JSON text, token counts).");

    m.def(
        "evaluate_scene",
        [](const std::string& scene_json, const std::string& predictions_json, const std::string& config_json) {
            const RunConfig cfg = config_from_text(config_json);
            const BodyModelDef model = make_mini_model(0);
            const Scene scene = scene_from_json(parse_json_text(scene_json, "<scene>"));
            const PredictionSet set = prediction_set_from_json(parse_json_text(predictions_json, "<predictions>"));
            std::vector<Prediction> kept;
            for (int i : set.valid) kept.push_back(set.predictions.at(i));
            return dump(to_json(evaluate(scene, kept, model, cfg)));
        },
        py::arg("scene_json"), py::arg("predictions_json"), py::arg("config_json") = "",
        "Evaluation report JSON text for the valid predictions.");
}
