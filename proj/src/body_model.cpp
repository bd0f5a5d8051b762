#include "satkit/body_model.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "satkit/error.hpp"
#include "satkit/rng.hpp"

namespace satkit {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr double kSmallAngle = 1e-8;

void check_rows_sum_to_one(const Eigen::MatrixXd& m, const char* what) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (std::abs(m.row(r).sum() - 1.0) > kRowSumTol) {
            throw Error(Errc::invalid_argument,
                        std::string(what) + " row " + std::to_string(r) + " does not sum to 1");
        }
    }
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
    Eigen::Matrix3d k;
    k << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return k;
}

}  // namespace

void validate(const BodyModelDef& model) {
    const Eigen::Index v = model.template_vertices.rows();
    const Eigen::Index j = static_cast<Eigen::Index>(model.parents.size());
    if (v < 1 || j < 1) throw Error(Errc::invalid_argument, "body model has no vertices or joints");
    if (model.shape_dirs.rows() != 3 * v || model.shape_dirs.cols() != kShapeCoeffs) {
        throw Error(Errc::dimension_mismatch, "shape_dirs must be 3V x 10");
    }
    if (model.rest_regressor.rows() != j || model.rest_regressor.cols() != v) {
        throw Error(Errc::dimension_mismatch, "rest regressor must be J x V");
    }
    if (model.skin_weights.rows() != v || model.skin_weights.cols() != j) {
        throw Error(Errc::dimension_mismatch, "skinning weights must be V x J");
    }
    if (model.joint_regressor.cols() != v || model.joint_regressor.rows() < 1) {
        throw Error(Errc::dimension_mismatch, "joint regressor must be J_out x V");
    }
    if (model.parents.front() != -1) {
        throw Error(Errc::invalid_argument, "joint 0 must be the single root");
    }
    for (Eigen::Index i = 1; i < j; ++i) {
        const int p = model.parents[i];
        // parent < child rules out cycles and further roots
        if (p < 0 || p >= i) {
            throw Error(Errc::invalid_argument,
                        "parent of joint " + std::to_string(i) + " must precede it");
        }
    }
    if (model.root_joint < 0 || model.root_joint >= model.joint_regressor.rows()) {
        throw Error(Errc::invalid_argument, "root joint index out of range");
    }
    check_rows_sum_to_one(model.skin_weights, "skinning weights");
    check_rows_sum_to_one(model.joint_regressor, "joint regressor");
    check_rows_sum_to_one(model.rest_regressor, "rest regressor");
    for (const auto& f : model.faces)
        for (int idx : f)
            if (idx < 0 || idx >= v) throw Error(Errc::invalid_argument, "face index out of range");
}

SmplParams SmplParams::zero(int joints) {
    SmplParams p;
    p.pose = Points::Zero(joints, 3);
    p.betas = Eigen::VectorXd::Zero(kShapeCoeffs);
    return p;
}

Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis_angle) {
    const double angle = axis_angle.norm();
    const Eigen::Matrix3d k = skew(axis_angle);
    if (angle < kSmallAngle) {
        return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
    }
    const double s = std::sin(angle) / angle;
    const double c = (1.0 - std::cos(angle)) / (angle * angle);
    return Eigen::Matrix3d::Identity() + s * k + c * k * k;
}

namespace {

Points shaped_template(const Eigen::VectorXd& betas, const BodyModelDef& model) {
    if (betas.size() != kShapeCoeffs) {
        throw Error(Errc::dimension_mismatch, "expected 10 shape coefficients");
    }
    Eigen::VectorXd offsets = model.shape_dirs * betas;
    Points out = model.template_vertices;
    out += Eigen::Map<const Points>(offsets.data(), out.rows(), 3);
    return out;
}

}  // namespace

Points rest_joints(const Eigen::VectorXd& betas, const BodyModelDef& model) {
    return model.rest_regressor * shaped_template(betas, model);
}

Points forward(const SmplParams& params, const BodyModelDef& model) {
    const int nj = model.joint_count();
    if (params.pose.rows() != nj) {
        throw Error(Errc::dimension_mismatch, "pose must have one axis-angle per joint");
    }
    if (!params.pose.allFinite() || !params.betas.allFinite() || !params.trans.allFinite()) {
        throw Error(Errc::invalid_argument, "non-finite body parameters");
    }
    const Points shaped = shaped_template(params.betas, model);
    const Points joints = model.rest_regressor * shaped;

    // Global rigid transform per joint along the kinematic chain, stored as
    // the rotation R_j and the offset D_j = G_j - J_j of the joint position.
    const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
    std::vector<Eigen::Matrix3d> rot(nj);
    std::vector<Eigen::Vector3d> offset(nj);
    for (int j = 0; j < nj; ++j) {
        const Eigen::Matrix3d local = rodrigues(params.pose.row(j).transpose());
        const int p = model.parents[j];
        if (p < 0) {
            rot[j] = local;
            offset[j] = Eigen::Vector3d::Zero();
        } else {
            rot[j] = rot[p] * local;
            const Eigen::Vector3d bone = (joints.row(j) - joints.row(p)).transpose();
            offset[j] = (rot[p] - eye) * bone + offset[p];
        }
    }
    // Skinning transform A_j(x) = R_j (x - J_j) + J_j + D_j, accumulated as a
    // displacement of x.
    Points out(shaped.rows(), 3);
    for (Eigen::Index v = 0; v < shaped.rows(); ++v) {
        const Eigen::Vector3d x = shaped.row(v).transpose();
        Eigen::Vector3d disp = Eigen::Vector3d::Zero();
        for (int j = 0; j < nj; ++j) {
            const double w = model.skin_weights(v, j);
            if (w == 0.0) continue;
            disp += w * ((rot[j] - eye) * (x - joints.row(j).transpose()) + offset[j]);
        }
        out.row(v) = (x + disp + params.trans).transpose();
    }
    return out;
}

Points regress_joints(const Points& vertices, const Eigen::MatrixXd& regressor) {
    if (regressor.cols() != vertices.rows()) {
        throw Error(Errc::dimension_mismatch, "regressor columns must match vertex count");
    }
    return regressor * vertices;
}

BodyModelDef make_mini_model(std::uint64_t seed, int vertices_per_joint) {
    if (vertices_per_joint < 1) {
        throw Error(Errc::invalid_argument, "need at least one vertex per joint");
    }
    // SMPL kinematic tree and a rough rest skeleton (meters, y down).
    static const int kParents[24] = {-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8,
                                     9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21};
    static const double kJoints[24][3] = {
        {0.00, 0.00, 0.00},   {0.09, 0.08, 0.00},   {-0.09, 0.08, 0.00},  {0.00, -0.10, 0.00},
        {0.10, 0.46, 0.00},   {-0.10, 0.46, 0.00},  {0.00, -0.23, 0.00},  {0.10, 0.86, 0.00},
        {-0.10, 0.86, 0.00},  {0.00, -0.28, 0.00},  {0.11, 0.92, -0.10},  {-0.11, 0.92, -0.10},
        {0.00, -0.48, 0.00},  {0.08, -0.40, 0.00},  {-0.08, -0.40, 0.00}, {0.00, -0.56, 0.00},
        {0.18, -0.42, 0.00},  {-0.18, -0.42, 0.00}, {0.44, -0.42, 0.00},  {-0.44, -0.42, 0.00},
        {0.69, -0.42, 0.00},  {-0.69, -0.42, 0.00}, {0.77, -0.42, 0.00},  {-0.77, -0.42, 0.00}};
    constexpr int nj = 24;
    const int nv = nj * vertices_per_joint;

    Rng rng(seed);
    BodyModelDef m;
    m.parents.assign(kParents, kParents + nj);
    m.template_vertices = Points::Zero(nv, 3);
    m.skin_weights = Eigen::MatrixXd::Zero(nv, nj);
    m.rest_regressor = Eigen::MatrixXd::Zero(nj, nv);

    for (int j = 0; j < nj; ++j) {
        const Eigen::Vector3d center(kJoints[j][0], kJoints[j][1], kJoints[j][2]);
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        std::vector<Eigen::Vector3d> local(vertices_per_joint);
        for (auto& off : local) {
            off = Eigen::Vector3d(rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.04),
                                  rng.uniform(-0.04, 0.04));
            mean += off;
        }
        mean /= vertices_per_joint;
        for (int k = 0; k < vertices_per_joint; ++k) {
            const int v = j * vertices_per_joint + k;
            // Zero-mean offsets keep each rest joint at its cluster centroid.
            m.template_vertices.row(v) = (center + local[k] - mean).transpose();
            const int p = m.parents[j];
            const double own = p < 0 ? 1.0 : rng.uniform(0.6, 1.0);
            m.skin_weights(v, j) = own;
            if (p >= 0) m.skin_weights(v, p) = 1.0 - own;
            m.rest_regressor(j, v) = 1.0 / vertices_per_joint;
        }
    }
    m.shape_dirs.resize(3 * nv, kShapeCoeffs);
    for (int r = 0; r < 3 * nv; ++r)
        for (int c = 0; c < kShapeCoeffs; ++c) m.shape_dirs(r, c) = rng.normal(0.0, 0.005);
    m.joint_regressor = m.rest_regressor;
    m.root_joint = 0;
    return m;
}

}  // namespace satkit
