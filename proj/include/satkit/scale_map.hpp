#pragma once

#include <span>
#include <vector>

#include "satkit/grid.hpp"
#include "satkit/scene.hpp"

namespace satkit {

struct ScaleEntry {
    double c = 0.0;
    double s = 0.0;
    bool operator==(const ScaleEntry&) const = default;
};

struct ScaleMap {
    int rows = 0;
    int cols = 0;
    std::vector<ScaleEntry> entries;  // row-major

    ScaleMap() = default;
    ScaleMap(int rows, int cols)
        : rows(rows), cols(cols), entries(static_cast<std::size_t>(rows) * cols) {}

    int count() const { return rows * cols; }
    const ScaleEntry& at(int row, int col) const { return entries[row * cols + col]; }
    ScaleEntry& at(int row, int col) { return entries[row * cols + col]; }
    bool operator==(const ScaleMap&) const = default;
};

struct Thresholds {
    double alpha_c = 0.3;
    double alpha_s = 0.5;
    double alpha_d = 0.5;
};

void validate(const Thresholds& th);
void validate(const ScaleMap& map);

// c = 1 where the patch's high-res rectangle overlaps a person box with
// positive area (boxes clipped to the image); s is the scale of the nearest
// overlapping person, larger s on equal depth.
ScaleMap build_gt_scale_map(const PatchGrid& grid, std::span<const PersonAnnotation> persons,
                            double longest_side_hr);

// Background iff c < alpha_c, else Small iff s < alpha_s, else Large.
PatchClass classify(const ScaleEntry& entry, const Thresholds& th);
ClassGrid classify(const ScaleMap& map, const Thresholds& th);

}  // namespace satkit
