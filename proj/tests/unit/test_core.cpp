#include <doctest.h>

#include <random>

#include <arrowscore/core.hpp>
#include <arrowscore/error.hpp>
#include <arrowscore/image.hpp>

using namespace arrowscore;

TEST_CASE("face geometry") {
    const TargetFaceSpec spec;
    CHECK(spec.shaft_radius_mm() == 2.25);
    for (int i = 0; i < spec.ring_count; ++i) {
        CHECK(spec.boundary_radius_mm(i) == (i + 1) * 20.0);
        if (i > 0) CHECK(spec.boundary_radius_mm(i) > spec.boundary_radius_mm(i - 1));
    }
    CHECK(spec.color_boundary_radius_mm(BoundaryId::YellowRed) == 40.0);
    CHECK(spec.color_boundary_radius_mm(BoundaryId::RedBlue) == 80.0);
    CHECK(spec.color_boundary_radius_mm(BoundaryId::BlueBlack) == 120.0);
    CHECK(spec.color_boundary_radius_mm(BoundaryId::BlackWhite) == 160.0);
    CHECK_NOTHROW(spec.validate());

    TargetFaceSpec bad;
    bad.face_radius_mm = 190.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("boundary names round trip") {
    for (BoundaryId id : kAllBoundaries) CHECK(boundary_from_name(boundary_name(id)) == id);
    CHECK_FALSE(boundary_from_name("green_purple").has_value());
}

TEST_CASE("canonical frame") {
    const CanonicalFrame frame;
    CHECK(frame.size_px() == 2048);
    CHECK(frame.mm_per_px() == 0.1953125);
    CHECK(frame.mm_per_px() * frame.size_px() == 400.0);
    CHECK(frame.center() == 1024.0);
    CHECK_THROWS_AS(CanonicalFrame(63), Error);
    CHECK_THROWS_AS(CanonicalFrame(65), Error);
    CHECK_THROWS_AS(CanonicalFrame(62), Error);
    CHECK_NOTHROW(CanonicalFrame(64));
}

TEST_CASE("px_to_mm examples") {
    const PointMm center = px_to_mm({256.0, 256.0}, 512);
    CHECK(center.x == 0.0);
    CHECK(center.y == 0.0);
    CHECK(px_to_mm({256.0 + 15.0, 256.0}, 512).x == 11.71875);
    CHECK(px_to_mm({1024.0, 1025.0}, 2048).y == 0.1953125);
    CHECK_THROWS_AS(px_to_mm({std::nan(""), 0.0}, 512), Error);
    CHECK_THROWS_AS(px_to_mm({0.0, 0.0}, 0), Error);
}

TEST_CASE("px_to_mm is linear and inverts mm_to_px") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-100.0, 2200.0);
    for (int i = 0; i < 1000; ++i) {
        for (int frame : {512, 2048, 640}) {
            const PointPx a{u(rng), u(rng)};
            const PointPx b{u(rng), u(rng)};
            const PointPx c{frame / 2.0, frame / 2.0};
            const PointMm lhs{px_to_mm(a, frame).x + px_to_mm(b, frame).x - px_to_mm(c, frame).x,
                              px_to_mm(a, frame).y + px_to_mm(b, frame).y - px_to_mm(c, frame).y};
            const PointMm rhs = px_to_mm({a.x + b.x - c.x, a.y + b.y - c.y}, frame);
            CHECK(lhs.x == doctest::Approx(rhs.x).epsilon(1e-12));
            CHECK(lhs.y == doctest::Approx(rhs.y).epsilon(1e-12));
            const PointPx back = mm_to_px(px_to_mm(a, frame), frame);
            CHECK(std::abs(back.x - a.x) <= 1e-9);
            CHECK(std::abs(back.y - a.y) <= 1e-9);
        }
    }
}

TEST_CASE("ring outer radius") {
    CHECK(ring_outer_radius_mm(10) == 20.0);
    CHECK(ring_outer_radius_mm(1) == 200.0);
    CHECK(ring_outer_radius_mm(3) == 160.0);
    for (int s = 2; s <= 10; ++s) CHECK(ring_outer_radius_mm(s) < ring_outer_radius_mm(s - 1));
    CHECK_THROWS_AS(ring_outer_radius_mm(0), Error);
    CHECK_THROWS_AS(ring_outer_radius_mm(11), Error);
}

TEST_CASE("error kinds have stable names") {
    CHECK(to_string(ErrorKind::InvalidInput) == "invalid-input");
    CHECK(to_string(ErrorKind::InsufficientData) == "insufficient-data");
    CHECK(to_string(ErrorKind::FitFailure) == "fit-failure");
    CHECK(to_string(ErrorKind::RectificationFailure) == "rectification-failure");
    CHECK(to_string(ErrorKind::NumericFailure) == "numeric-failure");
}

TEST_CASE("bilinear sampling follows the pixel-center convention") {
    RgbImage img(2, 1);
    img(0, 0) = {0, 0, 0};
    img(1, 0) = {200, 100, 50};
    CHECK(sample_bilinear(img, 0.5, 0.5) == Rgb{0, 0, 0});
    CHECK(sample_bilinear(img, 1.5, 0.5) == Rgb{200, 100, 50});
    CHECK(sample_bilinear(img, 1.0, 0.5) == Rgb{100, 50, 25});
    CHECK(sample_bilinear(img, 0.1, 0.5) == Rgb{0, 0, 0});
    CHECK(sample_bilinear(img, 2.0, 0.5) == Rgb{255, 255, 255});
    CHECK(sample_bilinear(img, -0.01, 0.5, Rgb{1, 2, 3}) == Rgb{1, 2, 3});
}

TEST_CASE("rotate90 maps (x, y) to (h - 1 - y, x)") {
    RgbImage img(3, 2);
    img(2, 0) = {9, 9, 9};
    const RgbImage r = rotate90_cw(img);
    CHECK(r.width() == 2);
    CHECK(r.height() == 3);
    CHECK(r(1, 2) == Rgb{9, 9, 9});
    CHECK(rotate90_cw(rotate90_cw(rotate90_cw(rotate90_cw(img)))) == img);
}
