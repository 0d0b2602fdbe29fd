#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <arrowscore/core.hpp>
#include <arrowscore/image.hpp>

namespace arrowscore::heatmap {

/// Two displacement channels, (dx, dy) per pixel.
struct OffsetField {
    Grid<double> dx;
    Grid<double> dy;

    OffsetField() = default;
    OffsetField(int width, int height) : dx(width, height, 0.0), dy(width, height, 0.0) {}
};

/// Logits (channel 0) plus optional offsets (channels 1, 2).
struct HeatTensor {
    Grid<double> logits;
    std::optional<OffsetField> offsets;

    HeatTensor() = default;
    HeatTensor(int width, int height, double fill = 0.0, bool with_offsets = false);

    int width() const { return logits.width(); }
    int height() const { return logits.height(); }
    int channels() const { return offsets ? 3 : 1; }
};

struct HeatTarget {
    Grid<double> values;       ///< Y in [0, 1]
    OffsetField offsets;       ///< nearest center minus pixel center
    Grid<std::uint8_t> mask;   ///< offset supervision mask

    int width() const { return values.width(); }
    int height() const { return values.height(); }
    std::size_t positives() const;
};

struct LossParams {
    double alpha = 3.86;
    double beta = 2.92;
    double sigma_px = 6.6;
    double mask_radius_px = 24.0;
    double beta_off = 1.0;

    static constexpr double kBlobRadiusFactor = 4.0;
    static constexpr double kOffsetWeight = 0.1;
    static constexpr double kPositiveThreshold = 0.99;

    void validate() const;
    bool operator==(const LossParams&) const = default;
};

/// Max-composited Gaussian blobs truncated at 4 sigma, the pixel holding
/// each center forced to 1 and every other pixel kept below the positive
/// threshold. Offsets point from each pixel center within
/// mask_radius_px to its nearest center (earlier points win ties).
HeatTarget render_target(std::span<const PointPx> points, int height, int width,
                         const LossParams& params = {});

/// Logits logit(Y) clamped to +-clamp, offsets copied inside the mask.
HeatTensor tensor_from_target(const HeatTarget& target, double clamp = 12.0,
                              bool with_offsets = true);

struct FocalLossResult {
    double loss = 0.0;
    Grid<double> grad;
};

struct OffsetLossResult {
    double loss = 0.0;
    OffsetField grad;
};

struct TotalLossResult {
    double loss = 0.0;
    double heatmap_loss = 0.0;
    std::optional<double> offset_loss;
    Grid<double> logit_grad;
    std::optional<OffsetField> offset_grad;
};

FocalLossResult focal_loss(const HeatTensor& tensor, const HeatTarget& target,
                           const LossParams& params = {});
OffsetLossResult offset_loss(const HeatTensor& tensor, const HeatTarget& target,
                             const LossParams& params = {});
TotalLossResult total_loss(const HeatTensor& tensor, const HeatTarget& target,
                           const LossParams& params = {});

// Loss values accumulated and returned in extended precision. The
// double-valued results above are these rounded.
long double focal_loss_value(const HeatTensor& tensor, const HeatTarget& target,
                             const LossParams& params = {});
long double offset_loss_value(const HeatTensor& tensor, const HeatTarget& target,
                              const LossParams& params = {});
long double total_loss_value(const HeatTensor& tensor, const HeatTarget& target,
                             const LossParams& params = {});

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

/// A scalar function of a flat parameter vector with its analytic gradient.
struct GradCheckProblem {
    std::vector<double> inputs;
    std::function<long double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t entries_checked = 0;
};

/// Central differences on `samples` distinct random entries (all entries
/// when there are fewer). Relative error per entry is
/// |g - g_fd| / max(|g|, |g_fd|, 1e-8).
GradCheckResult grad_check(const GradCheckProblem& problem, double epsilon = 1e-5,
                           std::size_t samples = 200, std::uint64_t seed = 0);

enum class LossKind { Focal, Offset, Total };

/// Flattens the tensor (logits, then dx, dy when the loss uses them).
GradCheckProblem make_loss_problem(LossKind kind, const HeatTensor& tensor,
                                   const HeatTarget& target, const LossParams& params = {});

struct LossFixture {
    HeatTensor tensor;
    HeatTarget target;
};

/// Random logits/offsets against a target rendered from `centers` random
/// points, seeded.
LossFixture random_fixture(std::uint64_t seed, int size = 16, int centers = 3,
                           const LossParams& params = {});

// ---------------------------------------------------------------------------
// Plain gradient descent on the logits
// ---------------------------------------------------------------------------

inline constexpr double kInitialLogitBias = -2.19;

struct DescentResult {
    HeatTensor tensor;
    std::vector<double> losses;  ///< total loss before each step, then the final value
};

/// Starts from logits = -2.19 and zero offsets and runs `steps` updates
/// x -= lr * dL/dx on total_loss. Throws NumericFailure on divergence.
DescentResult fit_logits_by_descent(const HeatTarget& target, const LossParams& params,
                                    int steps, double lr);

}  // namespace arrowscore::heatmap
