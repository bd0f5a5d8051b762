#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "satkit/grid.hpp"

namespace satkit {

// High-res children of every Small cell, row-major over the 2x grid.
std::vector<Cell> expand_small(const ClassGrid& classes);

struct BackgroundPooling {
    // Low-res indices; 4 per group at level 1, 16 per group at level 2.
    std::vector<std::vector<int>> groups;
    std::vector<int> remainder;
};

// Pools aligned 2x2 blocks of Background cells anchored at even (row, col).
// levels = 2 repeats the pooling once more over fully pooled 2x2 blocks of
// level-1 groups.
BackgroundPooling pool_background(const ClassGrid& classes, int levels = 1);

enum class Provenance : std::uint8_t {
    pooled_background,
    unpooled_background,
    large_low_res,
    high_res
};

const char* provenance_name(Provenance p);

struct TokenRecord {
    Provenance provenance = Provenance::large_low_res;
    // Low-res linear indices, except for high_res records which hold one
    // linear index into the 2x grid (row * 2 * cols + col).
    std::vector<int> sources;
    double cx = 0.0;  // normalized over the padded image
    double cy = 0.0;
    double ex = 0.0;  // normalized extent
    double ey = 0.0;
};

struct TokenCounts {
    int k_lr = 0;
    int k_b = 0;
    int k_b_pooled = 0;  // k'_b: pooled groups plus ungroupable remainder
    int pooled_groups = 0;
    int remainder = 0;
    int k_small = 0;
    int k_large = 0;
    int k_hr = 0;
    int k_sa = 0;

    bool operator==(const TokenCounts&) const = default;
};

struct TokenLayout {
    int rows = 0;  // low-res grid
    int cols = 0;
    std::vector<TokenRecord> records;
    TokenCounts counts;

    int size() const { return static_cast<int>(records.size()); }
};

// Ordered scale-adaptive token sequence: pooled background, unpooled
// background, large low-res, then high-res; each group row-major.
TokenLayout assemble(const ClassGrid& classes, int pool_levels = 1);

// Plain low-res or high-res tokenization of a rows x cols grid.
TokenLayout uniform_layout(int rows, int cols);

// Low-res cells accounted for by each record; high-res records map to their
// parent cell. Used for coverage audits.
std::vector<int> covered_cells(const TokenLayout& layout);

struct CostModel {
    int d_model = 768;
    int n_lr = 3;
    int n_hr = 3;
    int n_sa = 9;
    int mlp_ratio = 4;
};

// Multiply-adds of one encoder layer over k tokens:
// 4 k d^2 (projections) + 2 k^2 d (scores, mixing) + 2 r k d^2 (MLP).
double attention_cost(std::int64_t k, const CostModel& cm);
inline double attention_cost(const TokenLayout& layout, const CostModel& cm) {
    return attention_cost(layout.size(), cm);
}

struct PipelineCost {
    double uniform_lr = 0.0;
    double uniform_hr = 0.0;
    double scale_adaptive = 0.0;
};

// Uniform schemes run n_lr + n_sa layers at one resolution. The scale
// adaptive scheme charges n_lr layers at k_lr, n_hr layers over the full
// high-res grid (4 k_lr), and n_sa layers at k_sa.
PipelineCost pipeline_cost(const TokenCounts& counts, const CostModel& cm);

}  // namespace satkit
