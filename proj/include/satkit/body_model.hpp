#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace satkit {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

inline constexpr int kShapeCoeffs = 10;

// Parametric body: template mesh, shape blendshapes, kinematic tree with
// linear blend skinning, and an output joint regressor.
struct BodyModelDef {
    Points template_vertices;      // V x 3, meters
    Eigen::MatrixXd shape_dirs;    // 3V x 10, row 3v+k is coordinate k of vertex v
    std::vector<int> parents;      // parents[0] == -1, parents[j] < j
    Eigen::MatrixXd rest_regressor;  // J x V, rest-pose joint locations
    Eigen::MatrixXd skin_weights;    // V x J, rows sum to 1
    Eigen::MatrixXd joint_regressor;  // J_out x V, rows sum to 1
    std::vector<std::array<int, 3>> faces;  // optional, for mesh export
    int root_joint = 0;

    int vertex_count() const { return static_cast<int>(template_vertices.rows()); }
    int joint_count() const { return static_cast<int>(parents.size()); }
    int output_joint_count() const { return static_cast<int>(joint_regressor.rows()); }
};

// Throws invalid_argument describing the first violated invariant.
void validate(const BodyModelDef& model);

struct SmplParams {
    Points pose;             // J x 3 axis-angle, radians
    Eigen::VectorXd betas;   // 10
    Eigen::Vector3d trans = Eigen::Vector3d::Zero();

    static SmplParams zero(int joints);
};

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis_angle);

Points forward(const SmplParams& params, const BodyModelDef& model);

// Rest-pose joints of the shaped template (before posing).
Points rest_joints(const Eigen::VectorXd& betas, const BodyModelDef& model);

Points regress_joints(const Points& vertices, const Eigen::MatrixXd& regressor);

// Desk-scale stand-in for SMPL: 24 joints on the SMPL kinematic tree with a
// handful of vertices per joint.
BodyModelDef make_mini_model(std::uint64_t seed, int vertices_per_joint = 8);

}  // namespace satkit
