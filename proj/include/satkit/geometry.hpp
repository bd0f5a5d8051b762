#pragma once

#include <Eigen/Core>

namespace satkit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

struct ImageDims {
    int width = 0;
    int height = 0;

    int longest_side() const { return width > height ? width : height; }
    bool operator==(const ImageDims&) const = default;
};

// Throws unless both sides are >= 1.
void validate_dims(const ImageDims& dims);

// Throws unless hr is exactly twice lr along both axes.
void validate_resolution_pair(const ImageDims& lr, const ImageDims& hr);

double focal_from_fov(double longest_side_hr, double fov_deg);

// Pinhole camera in high-res pixel coordinates.
struct Camera {
    double focal = 1.0;
    double pu = 0.0;
    double pv = 0.0;
    double fov_deg = 60.0;

    // Principal point at the image center, focal from the field of view.
    static Camera from_fov(const ImageDims& hr, double fov_deg = 60.0);
};

Vec2 project(const Vec3& point, const Camera& camera);
Vec3 unproject(const Vec2& pixel, double depth, const Camera& camera);

// Axis-aligned box in corner form.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    double diagonal() const;
    bool valid() const;

    bool operator==(const BBox&) const = default;
};

// Normalized center-size box, the decoder's anchor representation.
struct CenterBox {
    double cx = 0.5;
    double cy = 0.5;
    double w = 0.0;
    double h = 0.0;
};

CenterBox to_center(const BBox& box);
BBox to_corner(const CenterBox& box);

// Pixel box -> unit square, dividing x by width and y by height.
BBox normalize_box(const BBox& box, const ImageDims& dims);
BBox denormalize_box(const BBox& box, const ImageDims& dims);

double person_scale(const BBox& box, double longest_side_hr);

double intersection_area(const BBox& a, const BBox& b);
double iou(const BBox& a, const BBox& b);
double giou(const BBox& a, const BBox& b);

}  // namespace satkit
