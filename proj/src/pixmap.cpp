#include "satkit/pixmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "satkit/error.hpp"

namespace satkit {

namespace {

constexpr std::array<std::uint8_t, 3> kWhite{255, 255, 255};
constexpr std::array<std::uint8_t, 3> kRose{236, 112, 148};
constexpr std::array<std::uint8_t, 3> kBlue{52, 92, 214};
constexpr std::array<std::uint8_t, 3> kOutline{40, 40, 40};

void fill_rect(Pixmap& img, int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> c) {
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, img.dims.width);
    y1 = std::min(y1, img.dims.height);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) img.set(x, y, c);
}

void outline_rect(Pixmap& img, int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> c) {
    fill_rect(img, x0, y0, x1, y0 + 1, c);
    fill_rect(img, x0, y1 - 1, x1, y1, c);
    fill_rect(img, x0, y0, x0 + 1, y1, c);
    fill_rect(img, x1 - 1, y0, x1, y1, c);
}

}  // namespace

Pixmap::Pixmap(ImageDims d, std::array<std::uint8_t, 3> fill) : dims(d) {
    validate_dims(d);
    rgb.resize(static_cast<std::size_t>(d.width) * d.height * 3);
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = fill[0];
        rgb[i + 1] = fill[1];
        rgb[i + 2] = fill[2];
    }
}

void Pixmap::set(int x, int y, std::array<std::uint8_t, 3> c) {
    const std::size_t i = (static_cast<std::size_t>(y) * dims.width + x) * 3;
    rgb[i] = c[0];
    rgb[i + 1] = c[1];
    rgb[i + 2] = c[2];
}

std::array<std::uint8_t, 3> Pixmap::get(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * dims.width + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

std::string encode_ppm(const Pixmap& img) {
    std::string out = "P6\n" + std::to_string(img.dims.width) + " " +
                      std::to_string(img.dims.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
    return out;
}

void write_ppm(const std::string& path, const Pixmap& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io, "cannot open " + path + " for writing");
    const std::string bytes = encode_ppm(img);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(Errc::io, "failed writing " + path);
}

std::array<std::uint8_t, 3> scale_color(double s) {
    const double t = std::clamp(s, 0.0, 1.0);
    std::array<std::uint8_t, 3> c{};
    for (int k = 0; k < 3; ++k)
        c[k] = static_cast<std::uint8_t>(std::lround(kRose[k] + t * (kBlue[k] - kRose[k])));
    return c;
}

Pixmap render_scale_map(const ScaleMap& map, const ImageDims& image_hr, int patch, double alpha_c) {
    Pixmap img(image_hr, kWhite);
    const int cell = 2 * patch;
    for (int r = 0; r < map.rows; ++r)
        for (int c = 0; c < map.cols; ++c) {
            const ScaleEntry& e = map.at(r, c);
            if (e.c < alpha_c) continue;
            fill_rect(img, c * cell, r * cell, (c + 1) * cell, (r + 1) * cell, scale_color(e.s));
        }
    return img;
}

Pixmap render_token_layout(const TokenLayout& layout, const ImageDims& image_hr, int patch) {
    Pixmap img(image_hr, kWhite);
    const double w = static_cast<double>(layout.cols) * 2 * patch;
    const double h = static_cast<double>(layout.rows) * 2 * patch;
    for (const TokenRecord& rec : layout.records) {
        const int x0 = static_cast<int>(std::lround((rec.cx - rec.ex / 2) * w));
        const int y0 = static_cast<int>(std::lround((rec.cy - rec.ey / 2) * h));
        const int x1 = static_cast<int>(std::lround((rec.cx + rec.ex / 2) * w));
        const int y1 = static_cast<int>(std::lround((rec.cy + rec.ey / 2) * h));
        std::array<std::uint8_t, 3> fill{};
        switch (rec.provenance) {
            case Provenance::pooled_background: fill = {200, 200, 200}; break;
            case Provenance::unpooled_background: fill = {225, 225, 225}; break;
            case Provenance::large_low_res: fill = kBlue; break;
            case Provenance::high_res: fill = kRose; break;
        }
        fill_rect(img, x0, y0, x1, y1, fill);
        outline_rect(img, x0, y0, x1, y1, kOutline);
    }
    return img;
}

}  // namespace satkit
