#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <arrowscore/decode.hpp>
#include <arrowscore/error.hpp>
#include <arrowscore/heatmap.hpp>

#include "../support/oracles.hpp"

using namespace arrowscore;
using namespace arrowscore::heatmap;

namespace {

HeatTarget single_pixel_target(double y, bool masked) {
    HeatTarget t;
    t.values = Grid<double>(1, 1, y);
    t.offsets = OffsetField(1, 1);
    t.mask = Grid<std::uint8_t>(1, 1, masked ? 1 : 0);
    return t;
}

std::vector<PointPx> random_points(std::uint64_t seed, int count, double size, double min_sep) {
    std::mt19937_64 rng(seed);
    std::vector<PointPx> out;
    for (const auto& [x, y] : oracle::separated_points(rng, count, size, 0.0, min_sep)) out.push_back({x, y});
    return out;
}

}  // namespace

TEST_CASE("render_target examples") {
    const LossParams params;
    SUBCASE("center pixel is one") {
        const auto t = render_target(std::vector<PointPx>{{10.5, 20.5}}, 40, 30, params);
        CHECK(t.values(10, 20) == 1.0);
        CHECK(t.positives() == 1);
        CHECK(t.width() == 30);
        CHECK(t.height() == 40);
    }
    SUBCASE("value one sigma away") {
        const std::vector<PointPx> p = {{32.5 - params.sigma_px, 32.5}};
        const auto t = render_target(p, 64, 64, params);
        CHECK(t.values(32, 32) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
        CHECK(std::exp(-0.5) == doctest::Approx(0.60653).epsilon(1e-5));
    }
    SUBCASE("hard cutoff at four sigma") {
        const auto t = render_target(std::vector<PointPx>{{0.5, 0.5}}, 1, 64, params);
        const int inside = static_cast<int>(std::floor(4.0 * params.sigma_px));
        CHECK(t.values(inside, 0) > 0.0);
        CHECK(t.values(inside + 1, 0) == 0.0);
    }
    SUBCASE("overlap is the element-wise max") {
        const std::vector<PointPx> a = {{20.3, 21.7}};
        const std::vector<PointPx> b = {{22.3, 21.7}};
        const std::vector<PointPx> both = {a[0], b[0]};
        const auto ta = render_target(a, 48, 48, params);
        const auto tb = render_target(b, 48, 48, params);
        const auto tab = render_target(both, 48, 48, params);
        for (std::size_t i = 0; i < tab.values.size(); ++i) {
            CHECK(tab.values[i] == std::max(ta.values[i], tb.values[i]));
        }
    }
    SUBCASE("offsets point to the nearest center, earlier point on ties") {
        const std::vector<PointPx> p = {{10.5, 10.5}, {14.5, 10.5}};
        const auto t = render_target(p, 21, 25, params);
        CHECK(t.mask(12, 10) == 1);
        CHECK(t.offsets.dx(12, 10) == doctest::Approx(-2.0));
        CHECK(t.offsets.dy(12, 10) == doctest::Approx(0.0));
        CHECK(t.offsets.dx(13, 10) == doctest::Approx(1.0));
    }
    SUBCASE("out of bounds") {
        CHECK_THROWS_AS(render_target(std::vector<PointPx>{{30.0, 5.0}}, 10, 30, params), Error);
        CHECK_THROWS_AS(render_target(std::vector<PointPx>{{-0.1, 5.0}}, 10, 30, params), Error);
    }
}

TEST_CASE("render_target invariants") {
    const LossParams params;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto pts = random_points(seed, 8, 64.0, 1.0);
        const auto t = render_target(pts, 64, 64, params);
        std::set<std::pair<int, int>> centers;
        for (const auto& p : pts) centers.insert({static_cast<int>(p.x), static_cast<int>(p.y)});
        std::set<std::pair<int, int>> positives;
        for (int y = 0; y < 64; ++y) {
            for (int x = 0; x < 64; ++x) {
                const double v = t.values(x, y);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                if (v >= LossParams::kPositiveThreshold) positives.insert({x, y});
                if (t.mask(x, y)) {
                    bool near = false;
                    for (const auto& p : pts) near = near || std::hypot(x + 0.5 - p.x, y + 0.5 - p.y) <= params.mask_radius_px;
                    CHECK(near);
                }
            }
        }
        CHECK(positives == centers);
    }
}

TEST_CASE("render_target is equivariant to 90 degree rotation") {
    const LossParams params;
    const int n = 48;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto pts = random_points(seed + 100, 4, n, 3.0);
        std::vector<PointPx> rotated;
        for (const auto& p : pts) rotated.push_back({n - p.y, p.x});
        const auto a = render_target(pts, n, n, params);
        const auto b = render_target(rotated, n, n, params);
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                const int rx = n - 1 - y, ry = x;
                CHECK(b.values(rx, ry) == doctest::Approx(a.values(x, y)).epsilon(1e-12));
                CHECK(b.mask(rx, ry) == a.mask(x, y));
                if (a.mask(x, y)) {
                    CHECK(b.offsets.dx(rx, ry) == doctest::Approx(-a.offsets.dy(x, y)).epsilon(1e-9));
                    CHECK(b.offsets.dy(rx, ry) == doctest::Approx(a.offsets.dx(x, y)).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("focal loss scalar examples") {
    const LossParams params;
    const double reference = 0.0477364015196532836;
    SUBCASE("positive pixel at one half") {
        HeatTensor z(1, 1, 0.0);
        CHECK(focal_loss(z, single_pixel_target(1.0, false), params).loss == doctest::Approx(reference).epsilon(1e-12));
    }
    SUBCASE("negative pixel at one half, N clamped") {
        HeatTensor z(1, 1, 0.0);
        CHECK(focal_loss(z, single_pixel_target(0.0, false), params).loss == doctest::Approx(reference).epsilon(1e-12));
    }
    SUBCASE("perfect positive") {
        auto t = render_target(std::vector<PointPx>{{3.5, 3.5}}, 8, 8, params);
        HeatTensor z(8, 8, -30.0);
        z.logits(3, 3) = 30.0;
        const auto r = focal_loss(z, t, params);
        CHECK(r.loss < 1e-9);
        CHECK(r.loss >= 0.0);
    }
    SUBCASE("shape mismatch") {
        HeatTensor z(2, 1, 0.0);
        CHECK_THROWS_AS(focal_loss(z, single_pixel_target(1.0, false), params), Error);
    }
}

TEST_CASE("focal loss agrees with the direct definition") {
    const LossParams params;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto f = random_fixture(seed, 16, 3, params);
        std::vector<double> z(f.tensor.logits.values()), y(f.target.values.values());
        const double want = oracle::focal_reference(z, y, params.alpha, params.beta);
        const double got = focal_loss(f.tensor, f.target, params).loss;
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
        CHECK(got >= 0.0);
    }
}

TEST_CASE("offset loss examples") {
    const LossParams params;
    auto with_offset = [](double dx, double dy) {
        HeatTensor z(1, 1, 0.0, true);
        z.offsets->dx(0, 0) = dx;
        z.offsets->dy(0, 0) = dy;
        return z;
    };
    const auto target = single_pixel_target(1.0, true);
    CHECK(offset_loss(with_offset(0.0, 0.0), target, params).loss == 0.0);
    CHECK(offset_loss(with_offset(0.5, 0.0), target, params).loss == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(offset_loss(with_offset(3.0, 0.0), target, params).loss == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(offset_loss(with_offset(3.0, 0.0), single_pixel_target(1.0, false), params).loss == 0.0);
    CHECK_THROWS_AS(offset_loss(HeatTensor(1, 1, 0.0), target, params), Error);
}

TEST_CASE("offset loss ignores predictions outside the mask") {
    const LossParams params;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 50.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto f = random_fixture(seed, 32, 2, params);
        const auto base = offset_loss(f.tensor, f.target, params);
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                if (f.target.mask(x, y)) continue;
                f.tensor.offsets->dx(x, y) = noise(rng);
                f.tensor.offsets->dy(x, y) = noise(rng);
            }
        }
        const auto fuzzed = offset_loss(f.tensor, f.target, params);
        CHECK(fuzzed.loss == base.loss);
        for (int y = 0; y < 32; ++y) {
            for (int x = 0; x < 32; ++x) {
                if (f.target.mask(x, y)) continue;
                CHECK(fuzzed.grad.dx(x, y) == 0.0);
                CHECK(fuzzed.grad.dy(x, y) == 0.0);
            }
        }
    }
}

TEST_CASE("total loss") {
    const LossParams params;
    SUBCASE("constructed 0.8 and 0.5 give 0.85") {
        // Bisect the positive logit until the focal term is 0.8.
        double lo = -10.0, hi = 10.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            HeatTensor z(1, 1, mid);
            (focal_loss(z, single_pixel_target(1.0, false), params).loss > 0.8 ? lo : hi) = mid;
        }
        HeatTensor z(1, 1, 0.5 * (lo + hi), true);
        z.offsets->dx(0, 0) = 1.5;  // smooth-L1 of 1.5 is 1.0, averaged over two channels
        const auto t = single_pixel_target(1.0, true);
        const auto r = total_loss(z, t, params);
        CHECK(r.heatmap_loss == doctest::Approx(0.8).epsilon(1e-12));
        REQUIRE(r.offset_loss.has_value());
        CHECK(*r.offset_loss == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(r.loss == doctest::Approx(0.85).epsilon(1e-12));
    }
    SUBCASE("offsets absent equals focal") {
        auto f = random_fixture(3, 16, 3, params);
        f.tensor.offsets.reset();
        const auto r = total_loss(f.tensor, f.target, params);
        CHECK(r.loss == focal_loss(f.tensor, f.target, params).loss);
        CHECK_FALSE(r.offset_loss.has_value());
        CHECK_FALSE(r.offset_grad.has_value());
    }
    SUBCASE("empty target with confident negatives") {
        HeatTarget t = render_target({}, 16, 16, params);
        HeatTensor z(16, 16, -30.0, true);
        CHECK(total_loss(z, t, params).loss < 1e-12);
    }
}

TEST_CASE("analytic gradients match finite differences") {
    const LossParams params;
    for (LossKind kind : {LossKind::Focal, LossKind::Offset, LossKind::Total}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto f = random_fixture(seed, 16, 3, params);
            const auto r = grad_check(make_loss_problem(kind, f.tensor, f.target, params), 1e-5, 200, seed);
            CHECK(r.entries_checked >= 200);
            CHECK(r.max_rel_error < 1e-4);
        }
    }
}

TEST_CASE("grad_check catches a wrong gradient") {
    const auto f = random_fixture(1, 16, 3);
    auto problem = make_loss_problem(LossKind::Focal, f.tensor, f.target);
    auto good = problem.gradient;
    problem.gradient = [good](std::span<const double> x) {
        auto g = good(x);
        for (double& v : g) v = v * 1.01 + 1e-3;
        return g;
    };
    CHECK(grad_check(problem).max_rel_error > 1e-4);
}

TEST_CASE("descent recovers the centers") {
    const LossParams params;
    const std::vector<PointPx> centers = {{12.3, 14.8}, {45.6, 20.2}, {30.1, 50.7}};
    const auto target = render_target(centers, 64, 64, params);
    const auto fit = fit_logits_by_descent(target, params, 500, 5.0);
    const auto dets = decode::decode(fit.tensor, decode::DecoderConfig{0.5, 15, 4.0, false});
    REQUIRE(dets.size() == 3);
    for (const auto& c : centers) {
        double best = 1e9;
        for (const auto& d : dets) best = std::min(best, std::hypot(d.x - c.x, d.y - c.y));
        CHECK(best <= 1.0);
    }
}

TEST_CASE("descent without centers stays near the initial bias") {
    const auto target = render_target({}, 32, 32, LossParams{});
    const auto fit = fit_logits_by_descent(target, LossParams{}, 500, 5.0);
    for (double z : fit.tensor.logits.values()) {
        CHECK(z <= kInitialLogitBias);
        CHECK(z > kInitialLogitBias - 0.5);
    }
    CHECK(decode::decode(fit.tensor).empty());
}

TEST_CASE("descent loss is monotone for small steps") {
    const LossParams params;
    const auto target = render_target(random_points(5, 3, 48.0, 15.0), 48, 48, params);
    for (double lr : {0.1, 0.5, 1.0}) {
        const auto fit = fit_logits_by_descent(target, params, 150, lr);
        REQUIRE(fit.losses.size() == 151);
        for (std::size_t i = 1; i < fit.losses.size(); ++i) {
            CHECK(fit.losses[i] <= fit.losses[i - 1] * (1.0 + 1e-12));
        }
    }
    CHECK_THROWS_AS(fit_logits_by_descent(target, params, 0, 1.0), Error);
}
