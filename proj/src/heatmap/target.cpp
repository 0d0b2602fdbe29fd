#include <arrowscore/heatmap.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace arrowscore::heatmap {

HeatTensor::HeatTensor(int width, int height, double fill, bool with_offsets)
    : logits(width, height, fill) {
    if (with_offsets) offsets.emplace(width, height);
}

std::size_t HeatTarget::positives() const {
    return static_cast<std::size_t>(
        std::count_if(values.values().begin(), values.values().end(),
                      [](double y) { return y >= LossParams::kPositiveThreshold; }));
}

void LossParams::validate() const {
    require(std::isfinite(alpha) && alpha >= 1.0, "alpha must be >= 1");
    require(std::isfinite(beta) && beta >= 0.0, "beta must be >= 0");
    require(std::isfinite(sigma_px) && sigma_px > 0.0, "sigma_px must be > 0");
    require(std::isfinite(mask_radius_px) && mask_radius_px > 0.0, "mask_radius_px must be > 0");
    require(std::isfinite(beta_off) && beta_off > 0.0, "beta_off must be > 0");
}

HeatTarget render_target(std::span<const PointPx> points, int height, int width,
                         const LossParams& params) {
    params.validate();
    require(width > 0 && height > 0, "render_target: empty grid");
    for (const auto& p : points) {
        require(std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.y >= 0.0 &&
                    p.x < width && p.y < height,
                "render_target: point outside the grid");
    }

    HeatTarget target;
    target.values = Grid<double>(width, height, 0.0);
    target.offsets = OffsetField(width, height);
    target.mask = Grid<std::uint8_t>(width, height, 0);

    const double cutoff = LossParams::kBlobRadiusFactor * params.sigma_px;
    const double two_sigma_sq = 2.0 * params.sigma_px * params.sigma_px;
    const double below_positive = std::nextafter(LossParams::kPositiveThreshold, 0.0);
    Grid<double> nearest(width, height, std::numeric_limits<double>::infinity());

    const auto clip = [](double v, int hi) {
        return std::clamp(static_cast<int>(std::floor(v)), 0, hi - 1);
    };
    for (const auto& p : points) {
        const double reach = std::max(cutoff, params.mask_radius_px);
        const int x0 = clip(p.x - reach, width), x1 = clip(p.x + reach, width);
        const int y0 = clip(p.y - reach, height), y1 = clip(p.y + reach, height);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = p.x - (x + 0.5);
                const double dy = p.y - (y + 0.5);
                const double d2 = dx * dx + dy * dy;
                if (d2 <= cutoff * cutoff) {
                    const double v = std::min(std::exp(-d2 / two_sigma_sq), below_positive);
                    target.values(x, y) = std::max(target.values(x, y), v);
                }
                if (d2 <= params.mask_radius_px * params.mask_radius_px && d2 < nearest(x, y)) {
                    nearest(x, y) = d2;
                    target.mask(x, y) = 1;
                    target.offsets.dx(x, y) = dx;
                    target.offsets.dy(x, y) = dy;
                }
            }
        }
    }
    for (const auto& p : points) {
        target.values(static_cast<int>(p.x), static_cast<int>(p.y)) = 1.0;
    }
    return target;
}

HeatTensor tensor_from_target(const HeatTarget& target, double clamp, bool with_offsets) {
    HeatTensor tensor(target.width(), target.height(), 0.0, with_offsets);
    for (std::size_t i = 0; i < target.values.size(); ++i) {
        const double y = target.values[i];
        double z;
        if (y <= 0.0) {
            z = -clamp;
        } else if (y >= 1.0) {
            z = clamp;
        } else {
            z = std::clamp(std::log(y / (1.0 - y)), -clamp, clamp);
        }
        tensor.logits[i] = z;
        if (with_offsets && target.mask[i]) {
            tensor.offsets->dx[i] = target.offsets.dx[i];
            tensor.offsets->dy[i] = target.offsets.dy[i];
        }
    }
    return tensor;
}

LossFixture random_fixture(std::uint64_t seed, int size, int centers, const LossParams& params) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> position(1.0, size - 1.0);
    std::uniform_real_distribution<double> logit(-4.0, 4.0);
    std::uniform_real_distribution<double> jitter(-3.0, 3.0);
    std::vector<PointPx> points;
    for (int i = 0; i < centers; ++i) points.push_back({position(rng), position(rng)});
    LossFixture fixture;
    fixture.target = render_target(points, size, size, params);
    fixture.tensor = HeatTensor(size, size, 0.0, true);
    for (std::size_t i = 0; i < fixture.tensor.logits.size(); ++i) {
        fixture.tensor.logits[i] = logit(rng);
        fixture.tensor.offsets->dx[i] = fixture.target.offsets.dx[i] + jitter(rng);
        fixture.tensor.offsets->dy[i] = fixture.target.offsets.dy[i] + jitter(rng);
    }
    return fixture;
}

}  // namespace arrowscore::heatmap
