#include "satkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "satkit/error.hpp"

namespace satkit {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::invalid_argument: return "invalid-argument";
        case Errc::invalid_annotation: return "invalid-annotation";
        case Errc::dimension_mismatch: return "dimension-mismatch";
        case Errc::behind_camera: return "behind-camera";
        case Errc::infeasible: return "infeasible";
        case Errc::degenerate_geometry: return "degenerate-geometry";
        case Errc::undefined_metric: return "undefined-metric";
        case Errc::non_finite: return "non-finite";
        case Errc::parse: return "parse";
        case Errc::schema: return "schema";
        case Errc::io: return "io";
    }
    return "unknown";
}

void validate_dims(const ImageDims& dims) {
    if (dims.width < 1 || dims.height < 1) {
        throw Error(Errc::invalid_argument, "image dims must be >= 1, got " +
                                                std::to_string(dims.width) + "x" +
                                                std::to_string(dims.height));
    }
}

void validate_resolution_pair(const ImageDims& lr, const ImageDims& hr) {
    validate_dims(lr);
    validate_dims(hr);
    if (hr.width != 2 * lr.width || hr.height != 2 * lr.height) {
        throw Error(Errc::invalid_argument, "high-res dims must be exactly 2x low-res dims");
    }
}

double focal_from_fov(double longest_side_hr, double fov_deg) {
    if (!(longest_side_hr > 0.0)) {
        throw Error(Errc::invalid_argument, "longest image side must be positive");
    }
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
        throw Error(Errc::invalid_argument, "field of view must lie in (0, 180) degrees");
    }
    const double half = fov_deg * std::numbers::pi / 360.0;
    return longest_side_hr / (2.0 * std::tan(half));
}

Camera Camera::from_fov(const ImageDims& hr, double fov_deg) {
    validate_dims(hr);
    Camera cam;
    cam.focal = focal_from_fov(hr.longest_side(), fov_deg);
    cam.pu = hr.width / 2.0;
    cam.pv = hr.height / 2.0;
    cam.fov_deg = fov_deg;
    return cam;
}

Vec2 project(const Vec3& point, const Camera& camera) {
    if (!(point.z() > 0.0)) {
        throw Error(Errc::behind_camera, "cannot project a point with z <= 0");
    }
    return {camera.focal * point.x() / point.z() + camera.pu,
            camera.focal * point.y() / point.z() + camera.pv};
}

Vec3 unproject(const Vec2& pixel, double depth, const Camera& camera) {
    return {(pixel.x() - camera.pu) * depth / camera.focal,
            (pixel.y() - camera.pv) * depth / camera.focal, depth};
}

double BBox::diagonal() const { return std::hypot(width(), height()); }

bool BBox::valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_max >= x_min && y_max >= y_min;
}

CenterBox to_center(const BBox& box) {
    return {(box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0, box.width(),
            box.height()};
}

BBox to_corner(const CenterBox& box) {
    return {box.cx - box.w / 2.0, box.cy - box.h / 2.0, box.cx + box.w / 2.0,
            box.cy + box.h / 2.0};
}

BBox normalize_box(const BBox& box, const ImageDims& dims) {
    const double w = dims.width;
    const double h = dims.height;
    return {box.x_min / w, box.y_min / h, box.x_max / w, box.y_max / h};
}

BBox denormalize_box(const BBox& box, const ImageDims& dims) {
    const double w = dims.width;
    const double h = dims.height;
    return {box.x_min * w, box.y_min * h, box.x_max * w, box.y_max * h};
}

double person_scale(const BBox& box, double longest_side_hr) {
    if (!box.valid()) throw Error(Errc::invalid_argument, "invalid bounding box");
    if (!(longest_side_hr > 0.0)) {
        throw Error(Errc::invalid_argument, "longest image side must be positive");
    }
    return std::min(box.diagonal() / longest_side_hr, 1.0);
}

double intersection_area(const BBox& a, const BBox& b) {
    const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

double iou(const BBox& a, const BBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

double giou(const BBox& a, const BBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    const BBox hull{std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min),
                    std::max(a.x_max, b.x_max), std::max(a.y_max, b.y_max)};
    const double enclosure = hull.area();
    if (enclosure <= 0.0) return 0.0;
    const double overlap = uni > 0.0 ? inter / uni : 0.0;
    return overlap - (enclosure - uni) / enclosure;
}

}  // namespace satkit
