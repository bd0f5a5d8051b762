#pragma once

#include <cstdint>
#include <vector>

#include "satkit/geometry.hpp"

namespace satkit {

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell&) const = default;
    auto operator<=>(const Cell&) const = default;
};

// Regular P x P tiling of the low-res image, padded up to patch multiples.
struct PatchGrid {
    int rows = 0;
    int cols = 0;
    int patch = 1;
    ImageDims image;  // unpadded low-res dims

    int count() const { return rows * cols; }
    ImageDims padded() const { return {cols * patch, rows * patch}; }
    int index(int row, int col) const { return row * cols + col; }
    Cell cell(int index) const { return {index / cols, index % cols}; }

    bool operator==(const PatchGrid&) const = default;
};

PatchGrid partition(const ImageDims& dims, int patch);

enum class PatchClass : std::uint8_t { background, small, large };

const char* class_name(PatchClass cls);

struct ClassGrid {
    int rows = 0;
    int cols = 0;
    std::vector<PatchClass> cells;  // row-major

    ClassGrid() = default;
    ClassGrid(int rows, int cols, PatchClass fill = PatchClass::background)
        : rows(rows), cols(cols), cells(static_cast<std::size_t>(rows) * cols, fill) {}

    int count() const { return rows * cols; }
    PatchClass at(int row, int col) const { return cells[row * cols + col]; }
    PatchClass& at(int row, int col) { return cells[row * cols + col]; }
};

}  // namespace satkit
