#include "satkit/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "satkit/error.hpp"
#include "satkit/rng.hpp"

namespace satkit {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kAnchorClamp = 1e-4;
constexpr double kPeTemperature = 10000.0;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

void softmax_rows(Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double mx = m.row(r).maxCoeff();
        m.row(r) = (m.row(r).array() - mx).exp();
        m.row(r) /= m.row(r).sum();
    }
}

void check_finite(const Mat& m, const char* what) {
    if (!m.allFinite()) throw Error(Errc::non_finite, std::string(what) + " contains non-finite values");
}

}  // namespace

void validate(const ArchConfig& cfg) {
    auto positive = [](int v) { return v >= 1; };
    if (!positive(cfg.d_model) || !positive(cfg.heads) || !positive(cfg.mlp_ratio) ||
        !positive(cfg.queries) || !positive(cfg.patch) || !positive(cfg.scale_hidden) ||
        !positive(cfg.joints) || !positive(cfg.channels)) {
        throw Error(Errc::invalid_argument, "architecture sizes must be positive");
    }
    if (cfg.n_lr < 0 || cfg.n_sa < 0 || cfg.n_dec < 1) {
        throw Error(Errc::invalid_argument, "layer counts must be non-negative, n_dec >= 1");
    }
    if (cfg.n_lr != cfg.n_hr) {
        throw Error(Errc::invalid_argument, "n_hr must equal n_lr for feature alignment");
    }
    if (cfg.d_model % cfg.heads != 0) {
        throw Error(Errc::invalid_argument, "d_model must be divisible by the head count");
    }
    if (cfg.d_model % 8 != 0) {
        throw Error(Errc::invalid_argument, "d_model must be a multiple of 8 for the 4-D positional encoding");
    }
}

ArchConfig full_scale_config() {
    ArchConfig cfg;
    cfg.n_lr = 3;
    cfg.n_hr = 3;
    cfg.n_sa = 9;
    cfg.n_dec = 6;
    cfg.queries = 50;
    cfg.patch = 14;
    return cfg;
}

ImagePair make_image_pair(FloatImage hr) {
    if (hr.dims.width % 2 != 0 || hr.dims.height % 2 != 0) {
        throw Error(Errc::invalid_argument, "high-res image dims must be even");
    }
    FloatImage lr({hr.dims.width / 2, hr.dims.height / 2}, hr.channels);
    for (int y = 0; y < lr.dims.height; ++y)
        for (int x = 0; x < lr.dims.width; ++x)
            for (int ch = 0; ch < hr.channels; ++ch)
                lr.at(x, y, ch) = 0.25 * (hr.at(2 * x, 2 * y, ch) + hr.at(2 * x + 1, 2 * y, ch) +
                                          hr.at(2 * x, 2 * y + 1, ch) +
                                          hr.at(2 * x + 1, 2 * y + 1, ch));
    return {std::move(lr), std::move(hr)};
}

Mat Linear::operator()(const Mat& x) const {
    if (x.cols() != w.rows()) throw Error(Errc::dimension_mismatch, "linear input width mismatch");
    Mat y = x * w;
    y.rowwise() += b.row(0);
    return y;
}

Mat LayerNorm::operator()(const Mat& x) const {
    Mat y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        const double inv = 1.0 / std::sqrt(var + kLnEps);
        y.row(r) = ((x.row(r).array() - mean) * inv * gamma.row(0).array() + beta.row(0).array())
                       .matrix();
    }
    return y;
}

Mat Mlp::operator()(const Mat& x) const {
    Mat h = l1(x);
    h = h.cwiseMax(0.0);
    return l2(h);
}

namespace {

// Shapes of every tensor for a config.
NetworkWeights allocate(const ArchConfig& cfg) {
    const int d = cfg.d_model;
    const int hidden = cfg.mlp_ratio * d;
    auto linear = [](int in, int out) { return Linear{Mat::Zero(in, out), Mat::Zero(1, out)}; };
    auto norm = [](int n) { return LayerNorm{Mat::Ones(1, n), Mat::Zero(1, n)}; };
    auto attention = [&]() { return Attention{linear(d, d), linear(d, d), linear(d, d), linear(d, d)}; };
    auto block = [&]() {
        return EncoderBlock{norm(d), norm(d), attention(), linear(d, hidden), linear(hidden, d)};
    };
    auto mlp = [&](int in, int mid, int out) { return Mlp{linear(in, mid), linear(mid, out)}; };

    NetworkWeights w;
    w.patch_embed = linear(cfg.patch * cfg.patch * cfg.channels, d);
    for (int i = 0; i < cfg.n_lr; ++i) w.shallow.push_back(block());
    for (int i = 0; i < cfg.n_sa; ++i) w.adaptive.push_back(block());
    w.scale_norm = norm(d);
    w.scale_head = mlp(d, cfg.scale_hidden, 2);
    w.query_content = Mat::Zero(cfg.queries, d);
    w.anchor_logits = Mat::Zero(cfg.queries, 4);
    w.mean_pose = Mat::Zero(1, 3 * cfg.joints);
    w.mean_shape = Mat::Zero(1, kShapeCoeffs);
    for (int i = 0; i < cfg.n_dec; ++i) {
        w.decoder.push_back(DecoderLayer{norm(d), norm(d), norm(d), attention(), attention(),
                                         linear(d, hidden), linear(hidden, d), mlp(d, d, 4),
                                         mlp(d, d, 3 * cfg.joints), mlp(d, d, kShapeCoeffs)});
    }
    w.out_norm = norm(d);
    w.trans_head = mlp(d, d, 3);
    w.conf_head = linear(d, 1);
    return w;
}

template <class W, class Fn>
void visit_impl(W& w, Fn&& fn) {
    auto linear = [&](const std::string& p, auto& l) {
        fn(p + ".w", l.w);
        fn(p + ".b", l.b);
    };
    auto norm = [&](const std::string& p, auto& n) {
        fn(p + ".gamma", n.gamma);
        fn(p + ".beta", n.beta);
    };
    auto attention = [&](const std::string& p, auto& a) {
        linear(p + ".q", a.q);
        linear(p + ".k", a.k);
        linear(p + ".v", a.v);
        linear(p + ".o", a.o);
    };
    auto mlp = [&](const std::string& p, auto& m) {
        linear(p + ".l1", m.l1);
        linear(p + ".l2", m.l2);
    };
    auto block = [&](const std::string& p, auto& b) {
        norm(p + ".ln1", b.ln1);
        norm(p + ".ln2", b.ln2);
        attention(p + ".attn", b.attn);
        linear(p + ".fc1", b.fc1);
        linear(p + ".fc2", b.fc2);
    };
    linear("patch_embed", w.patch_embed);
    for (std::size_t i = 0; i < w.shallow.size(); ++i) block("shallow." + std::to_string(i), w.shallow[i]);
    for (std::size_t i = 0; i < w.adaptive.size(); ++i)
        block("adaptive." + std::to_string(i), w.adaptive[i]);
    norm("scale_norm", w.scale_norm);
    mlp("scale_head", w.scale_head);
    fn(std::string("query_content"), w.query_content);
    fn(std::string("anchor_logits"), w.anchor_logits);
    fn(std::string("mean_pose"), w.mean_pose);
    fn(std::string("mean_shape"), w.mean_shape);
    for (std::size_t i = 0; i < w.decoder.size(); ++i) {
        const std::string p = "decoder." + std::to_string(i);
        auto& l = w.decoder[i];
        norm(p + ".ln_self", l.ln_self);
        norm(p + ".ln_cross", l.ln_cross);
        norm(p + ".ln_mlp", l.ln_mlp);
        attention(p + ".self_attn", l.self_attn);
        attention(p + ".cross_attn", l.cross_attn);
        linear(p + ".fc1", l.fc1);
        linear(p + ".fc2", l.fc2);
        mlp(p + ".box_head", l.box_head);
        mlp(p + ".pose_head", l.pose_head);
        mlp(p + ".shape_head", l.shape_head);
    }
    norm("out_norm", w.out_norm);
    mlp("trans_head", w.trans_head);
    linear("conf_head", w.conf_head);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void visit_tensors(NetworkWeights& w, const std::function<void(const std::string&, Mat&)>& fn) {
    visit_impl(w, fn);
}

void visit_tensors(const NetworkWeights& w,
                   const std::function<void(const std::string&, const Mat&)>& fn) {
    visit_impl(w, fn);
}

NetworkWeights init_weights(const ArchConfig& cfg) {
    validate(cfg);
    NetworkWeights w = allocate(cfg);
    Rng rng(cfg.seed);
    visit_tensors(w, [&](const std::string& name, Mat& t) {
        if (name == "query_content") {
            for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
        } else if (name == "anchor_logits") {
            for (Eigen::Index i = 0; i < t.size(); ++i)
                t.data()[i] = inverse_sigmoid(rng.uniform(0.2, 0.8));
        } else if (ends_with(name, ".w")) {
            const double a = 1.0 / std::sqrt(static_cast<double>(t.rows()));
            const bool residual_out = ends_with(name, "_head.l2.w") && name.rfind("decoder.", 0) == 0;
            const double gain = residual_out ? 0.1 : 1.0;
            for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = gain * rng.uniform(-a, a);
        }
    });
    // Untrained scale outputs start centered on the default scale threshold.
    w.scale_head.l2.b(0, 1) = 0.5;
    return w;
}

Mat positional_encoding(double cx, double cy, double ex, double ey, int d) {
    const int per = d / 4;
    Mat out(1, d);
    const double coords[4] = {cx, cy, ex, ey};
    for (int k = 0; k < 4; ++k) {
        for (int i = 0; i < per / 2; ++i) {
            const double freq =
                2.0 * std::numbers::pi / std::pow(kPeTemperature, 2.0 * i / static_cast<double>(per));
            out(0, k * per + 2 * i) = std::sin(coords[k] * freq);
            out(0, k * per + 2 * i + 1) = std::cos(coords[k] * freq);
        }
    }
    return out;
}

Mat embed_patches(const ImagePair& images, const TokenLayout& layout, int patch,
                  const NetworkWeights& w) {
    const int channels = images.lr.channels;
    const int in = patch * patch * channels;
    if (w.patch_embed.w.rows() != in) {
        throw Error(Errc::dimension_mismatch, "patch embedding does not match patch size/channels");
    }
    const PatchGrid grid = partition(images.lr.dims, patch);
    if (grid.rows != layout.rows || grid.cols != layout.cols) {
        throw Error(Errc::dimension_mismatch, "token layout does not match the image grid");
    }
    if (images.hr.dims.width != 2 * images.lr.dims.width ||
        images.hr.dims.height != 2 * images.lr.dims.height || images.hr.channels != channels) {
        throw Error(Errc::dimension_mismatch, "high-res image must be 2x the low-res image");
    }
    const int d = static_cast<int>(w.patch_embed.w.cols());
    Mat pixels(layout.size(), in);
    Mat pos(layout.size(), d);
    const int hr_cols = 2 * layout.cols;
    for (int t = 0; t < layout.size(); ++t) {
        const TokenRecord& rec = layout.records[t];
        if (rec.provenance == Provenance::high_res) {
            const int idx = rec.sources.front();
            const int x0 = (idx % hr_cols) * patch;
            const int y0 = (idx / hr_cols) * patch;
            for (int py = 0; py < patch; ++py)
                for (int px = 0; px < patch; ++px)
                    for (int ch = 0; ch < channels; ++ch)
                        pixels(t, (py * patch + px) * channels + ch) = images.hr.at(x0 + px, y0 + py, ch);
        } else {
            int r0 = layout.rows, c0 = layout.cols, r1 = -1;
            for (int idx : rec.sources) {
                r0 = std::min(r0, idx / layout.cols);
                c0 = std::min(c0, idx % layout.cols);
                r1 = std::max(r1, idx / layout.cols);
            }
            const int span = r1 - r0 + 1;  // square regions: 1, 2 or 4 cells
            const double norm = 1.0 / (span * span);
            for (int py = 0; py < patch; ++py)
                for (int px = 0; px < patch; ++px)
                    for (int ch = 0; ch < channels; ++ch) {
                        double acc = 0.0;
                        for (int sy = 0; sy < span; ++sy)
                            for (int sx = 0; sx < span; ++sx)
                                acc += images.lr.at(c0 * patch + px * span + sx,
                                                    r0 * patch + py * span + sy, ch);
                        pixels(t, (py * patch + px) * channels + ch) = acc * norm;
                    }
        }
        pos.row(t) = positional_encoding(rec.cx, rec.cy, rec.ex, rec.ey, d);
    }
    return w.patch_embed(pixels) + pos;
}

Mat multi_head_attention(const Mat& query_in, const Mat& key_in, const Mat& value_in,
                         const Attention& attn, int heads, AttentionTrace* trace) {
    const Mat q = attn.q(query_in);
    const Mat k = attn.k(key_in);
    const Mat v = attn.v(value_in);
    const int d = static_cast<int>(q.cols());
    const int dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Mat mixed(q.rows(), d);
    for (int h = 0; h < heads; ++h) {
        Mat scores = (q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose()) * scale;
        softmax_rows(scores);
        mixed.middleCols(h * dh, dh) = scores * v.middleCols(h * dh, dh);
        if (trace) trace->weights.push_back(std::move(scores));
    }
    return attn.o(mixed);
}

Mat encoder_forward(const Mat& tokens, std::span<const EncoderBlock> blocks, int heads,
                    AttentionTrace* trace) {
    if (tokens.rows() < 1) throw Error(Errc::invalid_argument, "encoder needs at least one token");
    check_finite(tokens, "encoder input");
    Mat x = tokens;
    for (const EncoderBlock& b : blocks) {
        const Mat h = b.ln1(x);
        x += multi_head_attention(h, h, h, b.attn, heads, trace);
        Mat m = b.fc1(b.ln2(x));
        m = m.unaryExpr([](double v) { return gelu(v); });
        x += b.fc2(m);
    }
    return x;
}

ScaleMap scale_head(const Mat& lr_tokens, int rows, int cols, const NetworkWeights& w) {
    if (lr_tokens.rows() != static_cast<Eigen::Index>(rows) * cols) {
        throw Error(Errc::dimension_mismatch, "scale head expects one token per low-res patch");
    }
    const Mat out = w.scale_head(w.scale_norm(lr_tokens));
    ScaleMap map(rows, cols);
    for (int i = 0; i < map.count(); ++i) {
        map.entries[i].c = sigmoid(out(i, 0));
        map.entries[i].s = std::clamp(out(i, 1), 0.0, 1.0);
    }
    return map;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double inverse_sigmoid(double x) {
    const double c = std::clamp(x, kAnchorClamp, 1.0 - kAnchorClamp);
    return std::log(c / (1.0 - c));
}

namespace {

Mat anchors_from_logits(const Mat& logits) { return logits.unaryExpr([](double v) { return sigmoid(v); }); }

Mat anchor_encoding(const Mat& anchors, int d) {
    Mat out(anchors.rows(), d);
    for (Eigen::Index i = 0; i < anchors.rows(); ++i)
        out.row(i) = positional_encoding(anchors(i, 0), anchors(i, 1), anchors(i, 2), anchors(i, 3), d);
    return out;
}

}  // namespace

DecoderOutput decoder_forward(const Mat& memory, const NetworkWeights& w, const ArchConfig& cfg) {
    if (memory.rows() < 1) throw Error(Errc::invalid_argument, "decoder needs at least one memory token");
    check_finite(memory, "decoder memory");
    const int n = static_cast<int>(w.query_content.rows());
    const int d = cfg.d_model;
    const double lo = inverse_sigmoid(0.0);
    const double hi = inverse_sigmoid(1.0);

    Mat x = w.query_content;
    Mat logits = w.anchor_logits.cwiseMax(lo).cwiseMin(hi);
    Mat pose = w.mean_pose.replicate(n, 1);
    Mat shape = w.mean_shape.replicate(n, 1);

    DecoderOutput out;
    out.layers.push_back({x, anchors_from_logits(logits), pose, shape});
    for (const DecoderLayer& layer : w.decoder) {
        const Mat qpos = anchor_encoding(anchors_from_logits(logits), d);
        Mat h = layer.ln_self(x);
        const Mat qk = h + qpos;
        x += multi_head_attention(qk, qk, h, layer.self_attn, cfg.heads);
        h = layer.ln_cross(x);
        x += multi_head_attention(h + qpos, memory, memory, layer.cross_attn, cfg.heads);
        Mat m = layer.fc1(layer.ln_mlp(x));
        m = m.unaryExpr([](double v) { return gelu(v); });
        x += layer.fc2(m);

        // Residual refinement in inverse-sigmoid space, kept inside the clamp.
        logits = (logits + layer.box_head(x)).cwiseMax(lo).cwiseMin(hi);
        pose += layer.pose_head(x);
        shape += layer.shape_head(x);
        check_finite(x, "decoder state");
        out.layers.push_back({x, anchors_from_logits(logits), pose, shape});
    }

    const Mat final_embed = w.out_norm(x);
    const Mat trans = w.trans_head(final_embed);
    const Mat conf = w.conf_head(final_embed);
    const Mat anchors = anchors_from_logits(logits);
    for (int i = 0; i < n; ++i) {
        Prediction p;
        p.pose = Points(cfg.joints, 3);
        for (int j = 0; j < cfg.joints; ++j)
            for (int k = 0; k < 3; ++k) p.pose(j, k) = pose(i, 3 * j + k);
        p.betas = shape.row(i).transpose();
        p.trans = {trans(i, 0), trans(i, 1), std::exp(std::clamp(trans(i, 2), -5.0, 5.0))};
        p.box = {anchors(i, 0), anchors(i, 1), anchors(i, 2), anchors(i, 3)};
        p.confidence = sigmoid(conf(i, 0));
        out.predictions.push_back(std::move(p));
    }
    return out;
}

std::vector<int> filter_predictions(std::span<const Prediction> preds, double alpha_d) {
    std::vector<int> keep;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i].confidence >= alpha_d) keep.push_back(static_cast<int>(i));
    return keep;
}

namespace {

TokenLayout high_res_layout(int rows, int cols) {
    return assemble(ClassGrid(rows, cols, PatchClass::small));
}

Mat shallow_low_res(const ImagePair& images, const ArchConfig& cfg, const NetworkWeights& w,
                    int rows, int cols) {
    return encoder_forward(embed_patches(images, uniform_layout(rows, cols), cfg.patch, w), w.shallow,
                           cfg.heads);
}

}  // namespace

ForwardResult full_forward(const ImagePair& images, const ArchConfig& cfg, const NetworkWeights& w,
                           const ForwardOptions& opts) {
    validate(cfg);
    validate(opts.thresholds);
    validate_resolution_pair(images.lr.dims, images.hr.dims);
    const PatchGrid grid = partition(images.lr.dims, cfg.patch);

    ForwardResult res;
    const Mat lr_tokens = shallow_low_res(images, cfg, w, grid.rows, grid.cols);
    res.predicted_map = scale_head(lr_tokens, grid.rows, grid.cols, w);

    switch (opts.source) {
        case ScaleSource::predicted:
            res.classes = classify(res.predicted_map, opts.thresholds);
            break;
        case ScaleSource::ground_truth:
            if (!opts.gt_map || opts.gt_map->rows != grid.rows || opts.gt_map->cols != grid.cols) {
                throw Error(Errc::dimension_mismatch, "ground-truth scale map missing or wrong size");
            }
            res.classes = classify(*opts.gt_map, opts.thresholds);
            break;
        case ScaleSource::all_large:
            res.classes = ClassGrid(grid.rows, grid.cols, PatchClass::large);
            break;
    }
    res.layout = assemble(res.classes, opts.pool_levels);

    Mat hr_tokens;
    if (res.layout.counts.k_hr > 0) {
        // The shallow pass sees the whole high-res image; only selected tokens survive.
        hr_tokens = encoder_forward(
            embed_patches(images, high_res_layout(grid.rows, grid.cols), cfg.patch, w), w.shallow,
            cfg.heads);
    }

    Mat tokens(res.layout.size(), cfg.d_model);
    for (int t = 0; t < res.layout.size(); ++t) {
        const TokenRecord& rec = res.layout.records[t];
        switch (rec.provenance) {
            case Provenance::pooled_background: {
                Mat acc = Mat::Zero(1, cfg.d_model);
                for (int idx : rec.sources) acc += lr_tokens.row(idx);
                tokens.row(t) = acc / static_cast<double>(rec.sources.size());
                break;
            }
            case Provenance::high_res:
                tokens.row(t) = hr_tokens.row(rec.sources.front());
                break;
            default:
                tokens.row(t) = lr_tokens.row(rec.sources.front());
        }
    }
    const Mat memory = encoder_forward(tokens, w.adaptive, cfg.heads);
    DecoderOutput dec = decoder_forward(memory, w, cfg);
    res.predictions = std::move(dec.predictions);
    res.valid = filter_predictions(res.predictions, opts.thresholds.alpha_d);
    return res;
}

DecoderOutput baseline_forward(const ImagePair& images, const ArchConfig& cfg,
                               const NetworkWeights& w) {
    validate(cfg);
    const PatchGrid grid = partition(images.lr.dims, cfg.patch);
    const Mat lr_tokens = shallow_low_res(images, cfg, w, grid.rows, grid.cols);
    const Mat memory = encoder_forward(lr_tokens, w.adaptive, cfg.heads);
    return decoder_forward(memory, w, cfg);
}

}  // namespace satkit
