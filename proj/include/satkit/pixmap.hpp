#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "satkit/geometry.hpp"
#include "satkit/scale_map.hpp"
#include "satkit/token_engine.hpp"

namespace satkit {

struct Pixmap {
    ImageDims dims;
    std::vector<std::uint8_t> rgb;  // interleaved, row-major

    Pixmap() = default;
    Pixmap(ImageDims dims, std::array<std::uint8_t, 3> fill);

    void set(int x, int y, std::array<std::uint8_t, 3> color);
    std::array<std::uint8_t, 3> get(int x, int y) const;
};

// Binary P6.
std::string encode_ppm(const Pixmap& img);
void write_ppm(const std::string& path, const Pixmap& img);

// Scale color map: rose at scale 0 through blue at scale 1.
std::array<std::uint8_t, 3> scale_color(double s);

// White where c < alpha_c, scale colors elsewhere; one block per patch at
// high-res size (2P pixels).
Pixmap render_scale_map(const ScaleMap& map, const ImageDims& image_hr, int patch, double alpha_c);

// Token rectangles at their native size over greyed background regions.
Pixmap render_token_layout(const TokenLayout& layout, const ImageDims& image_hr, int patch);

}  // namespace satkit
