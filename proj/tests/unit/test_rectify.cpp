#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>
#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <arrowscore/error.hpp>
#include <arrowscore/rectify.hpp>
#include <arrowscore/synth.hpp>

using namespace arrowscore;
using namespace arrowscore::rectify;

namespace {

/// CIE definition with the exact rational constants and the tabulated D65 white.
Lab cie_lab(Rgb c) {
    auto lin = [](double v) {
        v /= 255.0;
        return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
    };
    const double r = lin(c[0]), g = lin(c[1]), b = lin(c[2]);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double xn = 0.95047, zn = 1.08883;
    auto f = [](double t) {
        constexpr double eps = 216.0 / 24389.0, kappa = 24389.0 / 27.0;
        return t > eps ? std::cbrt(t) : (kappa * t + 16.0) / 116.0;
    };
    const double fx = f(x / xn), fy = f(y), fz = f(z / zn);
    return {static_cast<float>(116.0 * fy - 16.0), static_cast<float>(500.0 * (fx - fy)),
            static_cast<float>(200.0 * (fy - fz))};
}

/// OpenCV's float conversion; it interpolates the gamma curve, so it is only
/// good to a few tenths.
Lab opencv_lab(Rgb c) {
    cv::Mat src(1, 1, CV_32FC3, cv::Scalar(c[0] / 255.0, c[1] / 255.0, c[2] / 255.0));
    cv::Mat dst;
    cv::cvtColor(src, dst, cv::COLOR_RGB2Lab);
    const auto v = dst.at<cv::Vec3f>(0, 0);
    return {v[0], v[1], v[2]};
}

Mask disc_mask(int size, double cx, double cy, double a, double b, double phi = 0.0) {
    Mask m(size, size, 0);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            const double u = dx * std::cos(phi) + dy * std::sin(phi);
            const double v = -dx * std::sin(phi) + dy * std::cos(phi);
            m(x, y) = (u * u) / (a * a) + (v * v) / (b * b) <= 1.0 ? 1 : 0;
        }
    }
    return m;
}

EllipseCandidate circle(BoundaryId id, double cx, double cy, double r, double conf = 1.0) {
    return {id, Ellipse{cx, cy, r, r, 0.0}, conf};
}

EllipseSet concentric(const std::vector<double>& radii, double cx = 500.0, double cy = 500.0) {
    std::vector<EllipseCandidate> c;
    for (std::size_t i = 0; i < radii.size(); ++i) c.push_back(circle(kAllBoundaries[i], cx, cy, radii[i]));
    return select_nested_ellipses(c);
}

double disc_iou(const Mask& mask, double center, double r_px) {
    std::size_t inter = 0, uni = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const bool truth = std::hypot(x + 0.5 - center, y + 0.5 - center) <= r_px;
            const bool got = mask(x, y) != 0;
            inter += truth && got;
            uni += truth || got;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

double mean_abs_diff_on_disc(const RgbImage& a, const RgbImage& b, double radius_px) {
    const double c = a.width() / 2.0;
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            if (std::hypot(x + 0.5 - c, y + 0.5 - c) > radius_px) continue;
            for (int k = 0; k < 3; ++k) sum += std::abs(int(a(x, y)[k]) - int(b(x, y)[k]));
            n += 3;
        }
    }
    return sum / n;
}

RgbImage scaled(const RgbImage& img, double factor) {
    RgbImage out = img;
    for (Rgb& p : out.grid().values()) {
        for (auto& ch : p) ch = static_cast<std::uint8_t>(std::lround(ch * factor));
    }
    return out;
}

}  // namespace

TEST_CASE("rgb_to_lab reference points") {
    const Lab white = srgb_to_lab({255, 255, 255});
    CHECK(white.l == doctest::Approx(100.0).epsilon(1e-4));
    CHECK(std::abs(white.a) < 0.5);
    CHECK(std::abs(white.b) < 0.5);
    const Lab black = srgb_to_lab({0, 0, 0});
    CHECK(black.l == 0.0f);
    CHECK(black.a == 0.0f);
    CHECK(black.b == 0.0f);
    const Lab gray = srgb_to_lab({119, 119, 119});
    CHECK(std::abs(gray.a) < 0.01);
    CHECK(std::abs(gray.b) < 0.01);
    CHECK(gray.l == doctest::Approx(50.0344).epsilon(1e-5));
    CHECK_THROWS_AS(rgb_to_lab(RgbImage{}), Error);
}

TEST_CASE("rgb_to_lab agrees with an independent colorimetry implementation") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> c(0, 255);
    for (int i = 0; i < 2000; ++i) {
        const Rgb px{static_cast<std::uint8_t>(c(rng)), static_cast<std::uint8_t>(c(rng)),
                     static_cast<std::uint8_t>(c(rng))};
        const Lab got = srgb_to_lab(px);
        const Lab want = cie_lab(px);
        CHECK(std::abs(got.l - want.l) < 0.01);
        CHECK(std::abs(got.a - want.a) < 0.01);
        CHECK(std::abs(got.b - want.b) < 0.01);
        const Lab approx = opencv_lab(px);
        CHECK(std::abs(got.l - approx.l) < 0.5);
        CHECK(std::abs(got.a - approx.a) < 0.5);
        CHECK(std::abs(got.b - approx.b) < 0.5);
    }
}

TEST_CASE("synthetic pigments classify as their bands") {
    const ColorThresholdConfig cfg;
    LabImage lab(5, 1);
    lab(0, 0) = srgb_to_lab(synth::palette::kYellow);
    lab(1, 0) = srgb_to_lab(synth::palette::kRed);
    lab(2, 0) = srgb_to_lab(synth::palette::kBlue);
    lab(3, 0) = srgb_to_lab(synth::palette::kBlack);
    lab(4, 0) = srgb_to_lab(synth::palette::kWhite);
    const auto classes = classify_colors(lab, cfg, 0.0);
    CHECK(classes(0, 0) == ColorClass::Yellow);
    CHECK(classes(1, 0) == ColorClass::Red);
    CHECK(classes(2, 0) == ColorClass::Blue);
    CHECK(classes(3, 0) == ColorClass::Black);
    CHECK(classes(4, 0) == ColorClass::White);
}

TEST_CASE("band masks on a rendered face") {
    const CanonicalFrame frame(1024);
    const RgbImage face = synth::render_canonical_target(TargetFaceSpec{}, frame);
    const double px_per_mm = 1.0 / frame.mm_per_px();
    for (double brightness : {1.0, 0.5}) {
        CAPTURE(brightness);
        const auto masks = extract_band_masks(rgb_to_lab(scaled(face, brightness)), ColorThresholdConfig{});
        REQUIRE(masks.size() == 4);
        const double radii[] = {40.0, 80.0, 120.0, 160.0};
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(masks[k].boundary == kAllBoundaries[k]);
            CHECK(disc_iou(masks[k].mask, frame.center(), radii[k] * px_per_mm) >= 0.95);
        }
    }
}

TEST_CASE("all-white image gives empty masks") {
    const RgbImage white(200, 150);
    for (const auto& m : extract_band_masks(rgb_to_lab(white), ColorThresholdConfig{})) {
        CHECK(count_foreground(m.mask) == 0);
    }
}

TEST_CASE("morphology removes speckle and fills pinholes") {
    Mask m(20, 20, 0);
    for (int y = 5; y < 15; ++y) {
        for (int x = 5; x < 15; ++x) m(x, y) = 1;
    }
    m(1, 1) = 1;    // speckle
    m(10, 10) = 0;  // pinhole
    const Mask cleaned = morph_close(morph_open(m));
    CHECK(cleaned(1, 1) == 0);
    CHECK(cleaned(10, 10) == 1);
    CHECK(count_foreground(cleaned) == 100);

    Mask two(30, 10, 0);
    for (int x = 0; x < 5; ++x) two(x, 0) = 1;
    for (int x = 10; x < 30; ++x) two(x, 5) = 1;
    CHECK(count_foreground(largest_component(two)) == 20);
}

TEST_CASE("fit_boundary_ellipse on analytic rasters") {
    SUBCASE("circle") {
        const auto fit = fit_boundary_ellipse({BoundaryId::RedBlue, disc_mask(300, 150.0, 150.0, 100.0, 100.0)});
        CHECK(std::abs(fit.ellipse.a - fit.ellipse.b) < 0.5);
        CHECK(std::hypot(fit.ellipse.cx - 150.0, fit.ellipse.cy - 150.0) < 0.5);
        CHECK(fit.confidence > 0.9);
        CHECK(fit.confidence <= 1.0);
    }
    SUBCASE("axis-aligned ellipse") {
        const auto fit = fit_boundary_ellipse({BoundaryId::RedBlue, disc_mask(300, 150.0, 150.0, 120.0, 80.0)});
        CHECK(std::abs(fit.ellipse.a - 120.0) < 1.0);
        CHECK(std::abs(fit.ellipse.b - 80.0) < 1.0);
        CHECK(std::min(fit.ellipse.phi, kPi - fit.ellipse.phi) < 0.01);
    }
    SUBCASE("rotated ellipse") {
        const auto fit = fit_boundary_ellipse({BoundaryId::RedBlue, disc_mask(300, 140.0, 160.0, 110.0, 60.0, 0.6)});
        CHECK(std::abs(fit.ellipse.a - 110.0) < 1.0);
        CHECK(std::abs(fit.ellipse.b - 60.0) < 1.0);
        CHECK(std::abs(fit.ellipse.phi - 0.6) < 0.01);
    }
    SUBCASE("too few pixels") {
        Mask m(20, 20, 0);
        for (int i = 0; i < 30; ++i) m(i % 6, i / 6) = 1;
        try {
            fit_boundary_ellipse({BoundaryId::YellowRed, m});
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InsufficientData);
        }
    }
}

TEST_CASE("direct conic fit recovers exact samples") {
    const Ellipse truth{50.0, -20.0, 40.0, 15.0, 1.1};
    std::vector<PointPx> pts;
    for (int i = 0; i < 12; ++i) pts.push_back(truth.point_at(2.0 * kPi * i / 12.0));
    const Conic c = fit_conic_direct(pts);
    CHECK(4.0 * c.a * c.c - c.b * c.b == doctest::Approx(1.0).epsilon(1e-6));
    const Ellipse e = conic_to_ellipse(c);
    CHECK(e.cx == doctest::Approx(50.0));
    CHECK(e.cy == doctest::Approx(-20.0));
    CHECK(e.a == doctest::Approx(40.0));
    CHECK(e.b == doctest::Approx(15.0));
    CHECK(e.phi == doctest::Approx(1.1));
    for (const auto& p : pts) CHECK(c.sampson_distance(p.x, p.y) < 1e-6);
}

TEST_CASE("nested selection") {
    SUBCASE("four concentric circles") {
        const EllipseSet set = concentric({100, 200, 300, 400});
        CHECK(set.selected.size() == 4);
    }
    SUBCASE("displaced blue_black") {
        std::vector<EllipseCandidate> c = {circle(BoundaryId::YellowRed, 500, 500, 100),
                                           circle(BoundaryId::RedBlue, 500, 500, 200),
                                           circle(BoundaryId::BlueBlack, 650, 500, 300),
                                           circle(BoundaryId::BlackWhite, 500, 500, 400)};
        const EllipseSet set = select_nested_ellipses(c);
        CHECK(set.selected == std::vector<BoundaryId>{BoundaryId::YellowRed, BoundaryId::RedBlue,
                                                      BoundaryId::BlackWhite});
    }
    SUBCASE("radius ratio outside tolerance") {
        std::vector<EllipseCandidate> c = {circle(BoundaryId::YellowRed, 500, 500, 100),
                                           circle(BoundaryId::RedBlue, 500, 500, 260),
                                           circle(BoundaryId::BlueBlack, 500, 500, 300)};
        const EllipseSet set = select_nested_ellipses(c);
        CHECK(set.selected == std::vector<BoundaryId>{BoundaryId::YellowRed, BoundaryId::BlueBlack});
    }
    SUBCASE("single candidate") {
        std::vector<EllipseCandidate> c = {circle(BoundaryId::YellowRed, 0, 0, 10)};
        try {
            select_nested_ellipses(c);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::RectificationFailure);
        }
    }
}

TEST_CASE("nested selection output always nests") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    std::uniform_real_distribution<double> conf(0.3, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<EllipseCandidate> c;
        for (int k = 0; k < 4; ++k) {
            const double r = 100.0 * (k + 1);
            const double spread = trial % 2 == 0 ? 10.0 : 80.0;
            Ellipse e{500 + spread * jitter(rng), 500 + spread * jitter(rng),
                      r * (1.0 + 0.1 * std::abs(jitter(rng))), 0.0, 0.0};
            e.b = e.a * (1.0 - 0.1 * std::abs(jitter(rng)));
            e.phi = std::abs(jitter(rng)) * 3.0;
            c.push_back({kAllBoundaries[k], e, conf(rng)});
        }
        try {
            const EllipseSet set = select_nested_ellipses(c);
            REQUIRE(set.selected.size() >= 2);
            for (std::size_t i = 0; i + 1 < set.selected.size(); ++i) {
                CHECK(ellipse_nested(set.at(set.selected[i]).ellipse, set.at(set.selected[i + 1]).ellipse));
            }
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::RectificationFailure);
        }
    }
}

TEST_CASE("radial warp on concentric circles") {
    const CanonicalFrame frame(2048);
    SUBCASE("constant radii") {
        const WarpMap warp = build_radial_warp(concentric({100, 200, 300, 400}), frame);
        CHECK(warp.n_angles() == 720);
        CHECK(warp.center_src().x == doctest::Approx(500.0));
        CHECK(warp.center_src().y == doctest::Approx(500.0));
        for (int k = 0; k < warp.n_angles(); ++k) {
            for (int b = 0; b < 4; ++b) CHECK(warp.radius(k, b) == doctest::Approx(100.0 * (b + 1)).epsilon(1e-9));
        }
    }
    SUBCASE("interpolation between knots") {
        const WarpMap warp = build_radial_warp(concentric({100, 210, 300, 400}), frame);
        for (double angle : {0.0, 1.0, 2.5, -2.0}) CHECK(warp.normalized_radius(angle, 60.0) == doctest::Approx(155.0));
    }
    SUBCASE("extrapolation from two boundaries") {
        const WarpMap warp = build_radial_warp(concentric({100, 200}), frame);
        CHECK(warp.normalized_radius(0.3, 200.0) == doctest::Approx(500.0));
        CHECK(warp.normalized_radius(0.3, 20.0) == doctest::Approx(50.0));
    }
    SUBCASE("map_point") {
        const WarpMap warp = build_radial_warp(concentric({100, 200, 300, 400}), frame);
        const PointPx c = map_point(warp, warp.center_src());
        CHECK(c.x == doctest::Approx(1024.0).epsilon(1e-12));
        CHECK(c.y == doctest::Approx(1024.0).epsilon(1e-12));
        const PointPx on_yellow = map_point(warp, {600.0, 500.0});
        CHECK(on_yellow.x - 1024.0 == doctest::Approx(40.0 / frame.mm_per_px()));
        CHECK(on_yellow.y == doctest::Approx(1024.0));
    }
}

TEST_CASE("warp rejects non-monotone radii") {
    std::vector<double> knots = {40.0, 80.0};
    std::vector<double> radii(180 * 2, 1.0);
    CHECK_THROWS_AS(WarpMap(Eigen::Matrix3d::Identity(), knots, radii, 180, CanonicalFrame{}), Error);
    std::vector<double> ok(180 * 2);
    for (int k = 0; k < 180; ++k) {
        ok[2 * k] = 1.0;
        ok[2 * k + 1] = 2.0;
    }
    CHECK_NOTHROW(WarpMap(Eigen::Matrix3d::Identity(), knots, ok, 180, CanonicalFrame{}));
    CHECK_THROWS_AS(WarpMap(Eigen::Matrix3d::Identity(), knots, std::vector<double>(179 * 2, 1.0), 179, CanonicalFrame{}), Error);
}

TEST_CASE("warp under perspective: knot exactness and inversion") {
    const CanonicalFrame frame(2048);
    const auto sc = synth::generate_case(4, 0, 30.0, TargetFaceSpec{}, frame);
    // Exact boundary conics projected through the known homography.
    const Eigen::Matrix3d hinv = sc.homography.inverse();
    std::vector<EllipseCandidate> candidates;
    for (BoundaryId id : kAllBoundaries) {
        const double r = TargetFaceSpec{}.color_boundary_radius_mm(id) / frame.mm_per_px();
        Eigen::Matrix3d circle_conic;
        const double c = frame.center();
        circle_conic << 1, 0, -c, 0, 1, -c, -c, -c, 2 * c * c - r * r;
        const Eigen::Matrix3d img = hinv.transpose() * circle_conic * hinv;
        Conic q{img(0, 0), 2 * img(0, 1), img(1, 1), 2 * img(0, 2), 2 * img(1, 2), img(2, 2)};
        candidates.push_back({id, conic_to_ellipse(q), 1.0});
    }
    const WarpMap warp = build_radial_warp(select_nested_ellipses(candidates), frame);
    const double knots[] = {40.0, 80.0, 120.0, 160.0};
    for (int k = 0; k < warp.n_angles(); k += 7) {
        const double angle = 2.0 * kPi * k / warp.n_angles();
        for (int b = 0; b < 4; ++b) {
            const double rho = warp.radius(k, b);
            const PointPx src = warp.from_normalized({rho * std::cos(angle), rho * std::sin(angle)});
            const PointPx can = map_point(warp, src);
            const double r_px = std::hypot(can.x - frame.center(), can.y - frame.center());
            CHECK(std::abs(r_px - knots[b] / frame.mm_per_px()) <= 0.25);
        }
    }
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(150.0, 1900.0);
    for (int i = 0; i < 500; ++i) {
        const PointPx p{u(rng), u(rng)};
        const PointPx back = map_point(warp, warp.canonical_to_source(p));
        CHECK(std::hypot(back.x - p.x, back.y - p.y) <= 0.5);
    }
    // With exact conics the recovered frame differs from the truth only by the camera roll.
    const std::vector<PointMm> probes = {{0, 0}, {100, 0}, {-30, 70}, {150, -90}};
    const double cr = std::cos(sc.roll_rad), sr = std::sin(sc.roll_rad);
    for (const PointMm& p : probes) {
        const PointPx src = synth::apply_homography(sc.homography, mm_to_px(p, frame.size_px()));
        const PointPx got = map_point(warp, src);
        const PointPx want = mm_to_px({cr * p.x - sr * p.y, sr * p.x + cr * p.y}, frame.size_px());
        CHECK(std::hypot(got.x - want.x, got.y - want.y) < 1e-6);
    }
}

TEST_CASE("identity rectification of a canonical face") {
    const RgbImage face = synth::render_canonical_target();
    const RectifyResult result = rectify_photo(face);
    CHECK(result.ellipses.selected.size() == 4);
    CHECK(result.canonical.width() == 2048);
    CHECK(mean_abs_diff_on_disc(result.canonical, face, 200.0 / 0.1953125) <= 3.0);
}

TEST_CASE("rectification is equivariant to 90 degree rotations") {
    const auto sc = synth::generate_case(8, 6, 20.0, TargetFaceSpec{}, CanonicalFrame(1024));
    RectifyOptions options;
    options.canonical_size_px = 1024;
    const RgbImage a = rectify_photo(sc.image, options).canonical;
    const RgbImage b = rectify_photo(rotate90_cw(sc.image), options).canonical;
    CHECK(mean_abs_diff_on_disc(rotate90_cw(a), b, 190.0 / (400.0 / 1024)) <= 3.0);
}

TEST_CASE("all-white photo fails rectification") {
    try {
        rectify_photo(RgbImage(300, 300));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RectificationFailure);
    }
}
