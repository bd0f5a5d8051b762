#include "satkit/token_engine.hpp"

#include <algorithm>
#include <cmath>

#include "satkit/error.hpp"

namespace satkit {

PatchGrid partition(const ImageDims& dims, int patch) {
    validate_dims(dims);
    if (patch < 1) throw Error(Errc::invalid_argument, "patch size must be >= 1");
    PatchGrid grid;
    grid.patch = patch;
    grid.image = dims;
    grid.rows = (dims.height + patch - 1) / patch;
    grid.cols = (dims.width + patch - 1) / patch;
    return grid;
}

const char* class_name(PatchClass cls) {
    switch (cls) {
        case PatchClass::background: return "background";
        case PatchClass::small: return "small";
        case PatchClass::large: return "large";
    }
    return "?";
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::pooled_background: return "pooled_background";
        case Provenance::unpooled_background: return "unpooled_background";
        case Provenance::large_low_res: return "large_low_res";
        case Provenance::high_res: return "high_res";
    }
    return "?";
}

std::vector<Cell> expand_small(const ClassGrid& classes) {
    // Collected per high-res row, giving row-major output.
    std::vector<Cell> out;
    for (int r = 0; r < classes.rows; ++r) {
        for (int dr = 0; dr < 2; ++dr) {
            for (int c = 0; c < classes.cols; ++c) {
                if (classes.at(r, c) != PatchClass::small) continue;
                out.push_back({2 * r + dr, 2 * c});
                out.push_back({2 * r + dr, 2 * c + 1});
            }
        }
    }
    return out;
}

namespace {

bool block_is_background(const ClassGrid& classes, int r, int c) {
    return classes.at(r, c) == PatchClass::background &&
           classes.at(r, c + 1) == PatchClass::background &&
           classes.at(r + 1, c) == PatchClass::background &&
           classes.at(r + 1, c + 1) == PatchClass::background;
}

}  // namespace

BackgroundPooling pool_background(const ClassGrid& classes, int levels) {
    if (levels < 1 || levels > 2) {
        throw Error(Errc::invalid_argument, "pooling levels must be 1 or 2");
    }
    const int br = classes.rows / 2;
    const int bc = classes.cols / 2;
    // Level-1 mask over aligned 2x2 blocks.
    std::vector<char> pooled(static_cast<std::size_t>(br) * bc, 0);
    for (int r = 0; r < br; ++r)
        for (int c = 0; c < bc; ++c)
            pooled[r * bc + c] = block_is_background(classes, 2 * r, 2 * c) ? 1 : 0;

    auto block_cells = [&](int r, int c, std::vector<int>& into) {
        into.push_back((2 * r) * classes.cols + 2 * c);
        into.push_back((2 * r) * classes.cols + 2 * c + 1);
        into.push_back((2 * r + 1) * classes.cols + 2 * c);
        into.push_back((2 * r + 1) * classes.cols + 2 * c + 1);
    };

    // Block indices consumed by a level-2 group.
    std::vector<char> merged(pooled.size(), 0);
    BackgroundPooling out;
    std::vector<std::pair<int, std::vector<int>>> keyed;  // (anchor index, cells)

    if (levels == 2) {
        for (int r = 0; r + 1 < br; r += 2) {
            for (int c = 0; c + 1 < bc; c += 2) {
                if (pooled[r * bc + c] && pooled[r * bc + c + 1] && pooled[(r + 1) * bc + c] &&
                    pooled[(r + 1) * bc + c + 1]) {
                    std::vector<int> cells;
                    for (int dr = 0; dr < 2; ++dr)
                        for (int dc = 0; dc < 2; ++dc) {
                            block_cells(r + dr, c + dc, cells);
                            merged[(r + dr) * bc + c + dc] = 1;
                        }
                    std::sort(cells.begin(), cells.end());
                    keyed.emplace_back(cells.front(), std::move(cells));
                }
            }
        }
    }
    for (int r = 0; r < br; ++r) {
        for (int c = 0; c < bc; ++c) {
            if (!pooled[r * bc + c] || merged[r * bc + c]) continue;
            std::vector<int> cells;
            block_cells(r, c, cells);
            keyed.emplace_back(cells.front(), std::move(cells));
        }
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [anchor, cells] : keyed) out.groups.push_back(std::move(cells));

    for (int r = 0; r < classes.rows; ++r) {
        for (int c = 0; c < classes.cols; ++c) {
            if (classes.at(r, c) != PatchClass::background) continue;
            const int pr = r / 2;
            const int pc = c / 2;
            const bool in_block = pr < br && pc < bc && pooled[pr * bc + pc];
            if (!in_block) out.remainder.push_back(r * classes.cols + c);
        }
    }
    return out;
}

namespace {

TokenRecord low_res_record(Provenance p, int index, int rows, int cols) {
    const int r = index / cols;
    const int c = index % cols;
    TokenRecord rec;
    rec.provenance = p;
    rec.sources = {index};
    rec.cx = (c + 0.5) / cols;
    rec.cy = (r + 0.5) / rows;
    rec.ex = 1.0 / cols;
    rec.ey = 1.0 / rows;
    return rec;
}

}  // namespace

TokenLayout assemble(const ClassGrid& classes, int pool_levels) {
    TokenLayout layout;
    layout.rows = classes.rows;
    layout.cols = classes.cols;
    const int rows = classes.rows;
    const int cols = classes.cols;

    const BackgroundPooling pooling = pool_background(classes, pool_levels);
    for (const auto& group : pooling.groups) {
        TokenRecord rec;
        rec.provenance = Provenance::pooled_background;
        rec.sources = group;
        double sx = 0.0, sy = 0.0;
        int min_r = rows, max_r = -1, min_c = cols, max_c = -1;
        for (int idx : group) {
            const int r = idx / cols;
            const int c = idx % cols;
            sx += (c + 0.5) / cols;
            sy += (r + 0.5) / rows;
            min_r = std::min(min_r, r);
            max_r = std::max(max_r, r);
            min_c = std::min(min_c, c);
            max_c = std::max(max_c, c);
        }
        rec.cx = sx / group.size();
        rec.cy = sy / group.size();
        rec.ex = static_cast<double>(max_c - min_c + 1) / cols;
        rec.ey = static_cast<double>(max_r - min_r + 1) / rows;
        layout.records.push_back(std::move(rec));
    }
    for (int idx : pooling.remainder)
        layout.records.push_back(low_res_record(Provenance::unpooled_background, idx, rows, cols));

    int k_small = 0;
    int k_large = 0;
    for (int idx = 0; idx < classes.count(); ++idx) {
        if (classes.cells[idx] == PatchClass::large) {
            layout.records.push_back(low_res_record(Provenance::large_low_res, idx, rows, cols));
            ++k_large;
        } else if (classes.cells[idx] == PatchClass::small) {
            ++k_small;
        }
    }

    const int hr_cols = 2 * cols;
    for (const Cell& hr : expand_small(classes)) {
        TokenRecord rec;
        rec.provenance = Provenance::high_res;
        rec.sources = {hr.row * hr_cols + hr.col};
        rec.cx = (hr.col + 0.5) / hr_cols;
        rec.cy = (hr.row + 0.5) / (2 * rows);
        rec.ex = 0.5 / cols;
        rec.ey = 0.5 / rows;
        layout.records.push_back(std::move(rec));
    }

    TokenCounts& k = layout.counts;
    k.k_lr = classes.count();
    k.pooled_groups = static_cast<int>(pooling.groups.size());
    k.remainder = static_cast<int>(pooling.remainder.size());
    k.k_b = k.remainder;
    for (const auto& g : pooling.groups) k.k_b += static_cast<int>(g.size());
    k.k_b_pooled = k.pooled_groups + k.remainder;
    k.k_small = k_small;
    k.k_large = k_large;
    k.k_hr = 4 * k_small;
    k.k_sa = layout.size();
    return layout;
}

TokenLayout uniform_layout(int rows, int cols) {
    return assemble(ClassGrid(rows, cols, PatchClass::large));
}

std::vector<int> covered_cells(const TokenLayout& layout) {
    std::vector<int> out;
    const int hr_cols = 2 * layout.cols;
    for (const auto& rec : layout.records) {
        if (rec.provenance == Provenance::high_res) {
            const int hr = rec.sources.front();
            out.push_back((hr / hr_cols / 2) * layout.cols + (hr % hr_cols) / 2);
        } else {
            out.insert(out.end(), rec.sources.begin(), rec.sources.end());
        }
    }
    return out;
}

double attention_cost(std::int64_t k, const CostModel& cm) {
    if (k < 1) throw Error(Errc::invalid_argument, "token count must be >= 1");
    const double kd = static_cast<double>(k);
    const double d = cm.d_model;
    return 4.0 * kd * d * d + 2.0 * kd * kd * d + 2.0 * cm.mlp_ratio * kd * d * d;
}

PipelineCost pipeline_cost(const TokenCounts& counts, const CostModel& cm) {
    PipelineCost out;
    const std::int64_t k_lr = counts.k_lr;
    const std::int64_t k_hr_full = 4 * k_lr;
    out.uniform_lr = (cm.n_lr + cm.n_sa) * attention_cost(k_lr, cm);
    out.uniform_hr = (cm.n_lr + cm.n_sa) * attention_cost(k_hr_full, cm);
    out.scale_adaptive = cm.n_lr * attention_cost(k_lr, cm) +
                         cm.n_hr * attention_cost(k_hr_full, cm) +
                         cm.n_sa * attention_cost(std::max<std::int64_t>(counts.k_sa, 1), cm);
    return out;
}

}  // namespace satkit
