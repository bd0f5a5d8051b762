#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "satkit/body_model.hpp"
#include "satkit/geometry.hpp"
#include "satkit/scale_map.hpp"
#include "satkit/token_engine.hpp"

namespace satkit {

// Token features are rows.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ArchConfig {
    int d_model = 32;
    int heads = 4;
    int mlp_ratio = 4;
    int n_lr = 1;
    int n_hr = 1;
    int n_sa = 2;
    int n_dec = 2;
    int queries = 8;
    int patch = 14;
    int scale_hidden = 32;
    int joints = 24;
    int channels = 3;
    std::uint64_t seed = 0;
};

void validate(const ArchConfig& cfg);

// Full-size layer layout: 3/3/9 encoder layers, 6 decoder layers, 50
// queries, 14 px patches.
ArchConfig full_scale_config();

struct FloatImage {
    ImageDims dims;
    int channels = 3;
    std::vector<double> values;  // row-major, interleaved channels

    FloatImage() = default;
    FloatImage(ImageDims dims, int channels)
        : dims(dims), channels(channels),
          values(static_cast<std::size_t>(dims.width) * dims.height * channels, 0.0) {}

    double at(int x, int y, int ch) const {
        if (x < 0 || y < 0 || x >= dims.width || y >= dims.height) return 0.0;
        return values[(static_cast<std::size_t>(y) * dims.width + x) * channels + ch];
    }
    double& at(int x, int y, int ch) {
        return values[(static_cast<std::size_t>(y) * dims.width + x) * channels + ch];
    }
};

struct ImagePair {
    FloatImage lr;
    FloatImage hr;
};

// 2x2 box-filter downsample of the high-res image.
ImagePair make_image_pair(FloatImage hr);

struct Linear {
    Mat w;  // in x out
    Mat b;  // 1 x out

    Mat operator()(const Mat& x) const;
};

struct LayerNorm {
    Mat gamma;  // 1 x d
    Mat beta;

    Mat operator()(const Mat& x) const;
};

struct Attention {
    Linear q, k, v, o;
};

struct EncoderBlock {
    LayerNorm ln1, ln2;
    Attention attn;
    Linear fc1, fc2;
};

// Two-layer perceptron with a ReLU in between.
struct Mlp {
    Linear l1, l2;

    Mat operator()(const Mat& x) const;
};

struct DecoderLayer {
    LayerNorm ln_self, ln_cross, ln_mlp;
    Attention self_attn, cross_attn;
    Linear fc1, fc2;
    Mlp box_head, pose_head, shape_head;
};

struct NetworkWeights {
    Linear patch_embed;                  // P*P*C -> d
    std::vector<EncoderBlock> shallow;   // shared by the low-res and high-res passes
    std::vector<EncoderBlock> adaptive;  // N_sa blocks over the mixed token set
    LayerNorm scale_norm;
    Mlp scale_head;                      // d -> hidden -> 2
    Mat query_content;                   // n x d
    Mat anchor_logits;                   // n x 4, inverse-sigmoid of (cx, cy, w, h)
    Mat mean_pose;                       // 1 x 3J
    Mat mean_shape;                      // 1 x 10
    std::vector<DecoderLayer> decoder;
    LayerNorm out_norm;
    Mlp trans_head;  // d -> d -> 3
    Linear conf_head;  // d -> 1
};

// Seeded scheme: linear weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases
// zero, LayerNorm gamma one and beta zero, query content N(0, 1), anchors
// logit(U(0.2, 0.8)), residual head outputs scaled by 0.1.
NetworkWeights init_weights(const ArchConfig& cfg);

// Walks every tensor with a stable dotted name.
void visit_tensors(NetworkWeights& w, const std::function<void(const std::string&, Mat&)>& fn);
void visit_tensors(const NetworkWeights& w,
                   const std::function<void(const std::string&, const Mat&)>& fn);

// 4-D sinusoidal encoding of (cx, cy, ex, ey), d/4 channels each.
Mat positional_encoding(double cx, double cy, double ex, double ey, int d);

// One feature per record: linear patch projection of the record's region
// (resampled to P x P) plus the positional encoding of its center and extent.
Mat embed_patches(const ImagePair& images, const TokenLayout& layout, int patch,
                  const NetworkWeights& w);

struct AttentionTrace {
    std::vector<Mat> weights;  // per layer and head, queries x keys
};

Mat multi_head_attention(const Mat& query_in, const Mat& key_in, const Mat& value_in,
                         const Attention& attn, int heads, AttentionTrace* trace = nullptr);

Mat encoder_forward(const Mat& tokens, std::span<const EncoderBlock> blocks, int heads,
                    AttentionTrace* trace = nullptr);

ScaleMap scale_head(const Mat& lr_tokens, int rows, int cols, const NetworkWeights& w);

struct Prediction {
    Points pose;            // J x 3
    Eigen::VectorXd betas;  // 10
    Eigen::Vector3d trans = Eigen::Vector3d::Zero();
    CenterBox box;          // normalized
    double confidence = 0.0;
};

struct QueryState {
    Mat embedding;  // n x d
    Mat anchors;    // n x 4 in (0, 1)
    Mat pose;       // n x 3J
    Mat shape;      // n x 10
};

struct DecoderOutput {
    std::vector<QueryState> layers;  // initial state first, then one per layer
    std::vector<Prediction> predictions;
};

// Inverse-sigmoid with inputs clamped to [1e-4, 1 - 1e-4].
double inverse_sigmoid(double x);
double sigmoid(double x);

DecoderOutput decoder_forward(const Mat& memory, const NetworkWeights& w, const ArchConfig& cfg);

std::vector<int> filter_predictions(std::span<const Prediction> preds, double alpha_d);

enum class ScaleSource { predicted, ground_truth, all_large };

struct ForwardOptions {
    Thresholds thresholds;
    ScaleSource source = ScaleSource::predicted;
    const ScaleMap* gt_map = nullptr;  // required for ground_truth
    int pool_levels = 1;
};

struct ForwardResult {
    std::vector<Prediction> predictions;  // all queries
    std::vector<int> valid;               // indices surviving alpha_d
    ScaleMap predicted_map;
    ClassGrid classes;
    TokenLayout layout;
};

ForwardResult full_forward(const ImagePair& images, const ArchConfig& cfg,
                           const NetworkWeights& w, const ForwardOptions& opts);

// Uniform low-res pipeline: N_lr + N_sa encoder layers over every low-res
// patch, then the decoder.
DecoderOutput baseline_forward(const ImagePair& images, const ArchConfig& cfg,
                               const NetworkWeights& w);

}  // namespace satkit
