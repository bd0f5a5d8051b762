#include "satkit/scale_map.hpp"

#include <algorithm>
#include <cmath>

#include "satkit/error.hpp"

namespace satkit {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void validate(const Thresholds& th) {
    if (!in_unit(th.alpha_c) || !in_unit(th.alpha_s) || !in_unit(th.alpha_d)) {
        throw Error(Errc::invalid_argument, "thresholds must lie in [0, 1]");
    }
}

void validate(const ScaleMap& map) {
    if (map.rows < 0 || map.cols < 0 || static_cast<int>(map.entries.size()) != map.count()) {
        throw Error(Errc::dimension_mismatch, "scale map entry count does not match its grid");
    }
    for (const auto& e : map.entries) {
        if (!in_unit(e.c) || !in_unit(e.s)) {
            throw Error(Errc::invalid_argument, "scale map values must lie in [0, 1]");
        }
    }
}

ScaleMap build_gt_scale_map(const PatchGrid& grid, std::span<const PersonAnnotation> persons,
                            double longest_side_hr) {
    ScaleMap map(grid.rows, grid.cols);
    const double hr_w = 2.0 * grid.image.width;
    const double hr_h = 2.0 * grid.image.height;
    const double cell = 2.0 * grid.patch;

    struct Candidate {
        BBox clipped;
        double depth;
        double scale;
    };
    std::vector<Candidate> cands;
    cands.reserve(persons.size());
    for (const auto& p : persons) {
        if (!p.box.valid()) throw Error(Errc::invalid_annotation, "invalid person box");
        if (!(p.depth > 0.0) || !std::isfinite(p.depth)) {
            throw Error(Errc::invalid_annotation, "person depth must be positive");
        }
        const BBox clipped{std::clamp(p.box.x_min, 0.0, hr_w), std::clamp(p.box.y_min, 0.0, hr_h),
                           std::clamp(p.box.x_max, 0.0, hr_w), std::clamp(p.box.y_max, 0.0, hr_h)};
        cands.push_back({clipped, p.depth, person_scale(p.box, longest_side_hr)});
    }

    std::vector<double> depth(map.entries.size(), INFINITY);
    for (const auto& cand : cands) {
        const BBox& b = cand.clipped;
        if (b.width() <= 0.0 || b.height() <= 0.0) continue;
        const int c0 = std::max(0, static_cast<int>(std::floor(b.x_min / cell)));
        const int c1 = std::min(grid.cols - 1, static_cast<int>(std::ceil(b.x_max / cell)) - 1);
        const int r0 = std::max(0, static_cast<int>(std::floor(b.y_min / cell)));
        const int r1 = std::min(grid.rows - 1, static_cast<int>(std::ceil(b.y_max / cell)) - 1);
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                const BBox rect{c * cell, r * cell, (c + 1) * cell, (r + 1) * cell};
                if (intersection_area(rect, b) <= 0.0) continue;
                const int idx = r * grid.cols + c;
                ScaleEntry& e = map.entries[idx];
                const bool nearer = cand.depth < depth[idx];
                const bool tie_larger = cand.depth == depth[idx] && cand.scale > e.s;
                if (nearer || tie_larger) {
                    depth[idx] = cand.depth;
                    e = {1.0, cand.scale};
                }
            }
        }
    }
    return map;
}

PatchClass classify(const ScaleEntry& entry, const Thresholds& th) {
    if (entry.c < th.alpha_c) return PatchClass::background;
    return entry.s < th.alpha_s ? PatchClass::small : PatchClass::large;
}

ClassGrid classify(const ScaleMap& map, const Thresholds& th) {
    ClassGrid out(map.rows, map.cols);
    for (int i = 0; i < map.count(); ++i) out.cells[i] = classify(map.entries[i], th);
    return out;
}

}  // namespace satkit
