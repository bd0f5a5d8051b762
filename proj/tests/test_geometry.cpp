#include <doctest.h>

#include <cmath>

#include "satkit/error.hpp"
#include "satkit/geometry.hpp"
#include "satkit/rng.hpp"

using namespace satkit;

TEST_CASE("focal length from field of view") {
    CHECK(std::abs(focal_from_fov(1288, 60) - 1115.44) <= 0.01);
    CHECK(focal_from_fov(2, 90) == doctest::Approx(1.0));
    CHECK(std::abs(focal_from_fov(644, 60) - 557.72) <= 0.01);
    CHECK(focal_from_fov(644, 60) == doctest::Approx(focal_from_fov(1288, 60) / 2));
    CHECK_THROWS_AS(focal_from_fov(0, 60), Error);
    CHECK_THROWS_AS(focal_from_fov(100, 180), Error);
    CHECK_THROWS_AS(focal_from_fov(100, 0), Error);
}

TEST_CASE("projection") {
    Camera cam{100.0, 50.0, 50.0, 60.0};
    const Vec2 a = project({0.0, 0.0, 3.0}, cam);
    CHECK(a.x() == 50.0);
    CHECK(a.y() == 50.0);
    const Vec2 b = project({1.0, 2.0, 2.0}, cam);
    CHECK(b.x() == doctest::Approx(100.0));
    CHECK(b.y() == doctest::Approx(150.0));
    const Vec2 c = project({1.0, 2.0, 4.0}, cam);
    CHECK(c.x() - 50.0 == doctest::Approx((b.x() - 50.0) / 2));
    CHECK(c.y() - 50.0 == doctest::Approx((b.y() - 50.0) / 2));
    CHECK_THROWS_AS(project({1.0, 1.0, 0.0}, cam), Error);
    CHECK_THROWS_AS(project({1.0, 1.0, -1.0}, cam), Error);
    try {
        project({0, 0, -1}, cam);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::behind_camera);
    }
    const Vec3 back = unproject(b, 2.0, cam);
    CHECK((back - Vec3(1, 2, 2)).norm() < 1e-12);
}

TEST_CASE("camera from field of view") {
    const Camera cam = Camera::from_fov({1288, 728});
    CHECK(cam.pu == 644.0);
    CHECK(cam.pv == 364.0);
    CHECK(cam.focal == focal_from_fov(1288, 60));
}

TEST_CASE("person scale") {
    CHECK(person_scale({0, 0, 0, 644}, 1288) == doctest::Approx(0.5));
    CHECK(person_scale({0, 0, 0, 2000}, 1288) == 1.0);
    CHECK(person_scale({0, 0, 300, 400}, 1288) == doctest::Approx(500.0 / 1288.0));
    CHECK_THROWS_AS(person_scale({0, 0, 10, 10}, 0), Error);
}

TEST_CASE("iou and giou") {
    const BBox a{0, 0, 1, 1};
    CHECK(iou(a, a) == 1.0);
    CHECK(giou(a, a) == 1.0);
    const BBox b{2, 2, 3, 3};
    CHECK(iou(a, b) == 0.0);
    CHECK(giou(a, b) == doctest::Approx(-7.0 / 9.0));
    CHECK(iou({0, 0, 2, 2}, {1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("giou properties on random boxes") {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        auto box = [&] {
            const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
            return BBox{x, y, x + rng.uniform(0.01, 1), y + rng.uniform(0.01, 1)};
        };
        const BBox p = box(), q = box();
        const double g = giou(p, q);
        CHECK(g <= iou(p, q) + 1e-12);
        CHECK(g >= -1.0 - 1e-12);
        CHECK(g <= 1.0 + 1e-12);
        CHECK(g == doctest::Approx(giou(q, p)));
        CHECK(iou(p, q) == doctest::Approx(iou(q, p)));
    }
}

TEST_CASE("box conversions round-trip") {
    const ImageDims dims{1288, 728};
    const BBox b{10, 20, 300, 500};
    const BBox n = normalize_box(b, dims);
    CHECK(n.x_max == doctest::Approx(300.0 / 1288));
    const BBox back = denormalize_box(n, dims);
    CHECK(back.x_min == doctest::Approx(10));
    CHECK(back.y_max == doctest::Approx(500));
    const CenterBox c = to_center(b);
    CHECK(c.cx == 155.0);
    CHECK(c.h == 480.0);
    CHECK(to_corner(c) == b);
}

TEST_CASE("dimension validation") {
    CHECK_NOTHROW(validate_resolution_pair({644, 364}, {1288, 728}));
    CHECK_THROWS_AS(validate_resolution_pair({644, 364}, {1288, 729}), Error);
    CHECK_THROWS_AS(validate_dims({0, 10}), Error);
}
