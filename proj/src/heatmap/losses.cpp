#include <arrowscore/heatmap.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace arrowscore::heatmap {
namespace {

// Numerical guard on the log arguments, not part of the loss itself.
const double kLogFloor = std::log(1e-12);

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log_sigmoid(double z) {
    return -(std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z))));
}

struct PixelTerm {
    double value;  ///< summand inside the focal sum (before the -1/N)
    double slope;  ///< d value / d z
};

PixelTerm focal_term(double z, double y, const LossParams& params) {
    const double p = sigmoid(z);
    const double q = sigmoid(-z);
    if (y >= LossParams::kPositiveThreshold) {
        const double raw = log_sigmoid(z);
        const bool clamped = raw < kLogFloor;
        const double log_p = clamped ? kLogFloor : raw;
        const double weight = std::pow(q, params.alpha);
        return {weight * log_p,
                weight * ((clamped ? 0.0 : q) - params.alpha * p * log_p)};
    }
    const double raw = log_sigmoid(-z);
    const bool clamped = raw < kLogFloor;
    const double log_q = clamped ? kLogFloor : raw;
    const double weight = std::pow(p, params.alpha) * std::pow(1.0 - y, params.beta);
    return {weight * log_q, weight * (params.alpha * q * log_q - (clamped ? 0.0 : p))};
}

void check_shapes(const HeatTensor& tensor, const HeatTarget& target) {
    require(tensor.logits.same_shape(target.values),
            "loss: tensor " + std::to_string(tensor.width()) + "x" + std::to_string(tensor.height()) +
                " does not match target " + std::to_string(target.width()) + "x" +
                std::to_string(target.height()));
    require(target.mask.same_shape(target.values) && target.offsets.dx.same_shape(target.values) &&
                target.offsets.dy.same_shape(target.values),
            "loss: inconsistent target channels");
}

void check_offsets(const HeatTensor& tensor, const HeatTarget& target) {
    check_shapes(tensor, target);
    require(tensor.offsets.has_value(), "offset loss: tensor has no offset channels");
}

double smooth_l1(double e, double beta) {
    const double a = std::abs(e);
    return a < beta ? 0.5 * e * e / beta : a - 0.5 * beta;
}

double smooth_l1_slope(double e, double beta) {
    if (std::abs(e) < beta) return e / beta;
    return e > 0.0 ? 1.0 : -1.0;
}

std::size_t mask_count(const HeatTarget& target) {
    return static_cast<std::size_t>(std::count_if(target.mask.values().begin(),
                                                  target.mask.values().end(),
                                                  [](auto m) { return m != 0; }));
}

long double positive_count(const HeatTarget& target) {
    return static_cast<long double>(std::max<std::size_t>(target.positives(), 1));
}

}  // namespace

long double focal_loss_value(const HeatTensor& tensor, const HeatTarget& target,
                             const LossParams& params) {
    check_shapes(tensor, target);
    long double total = 0.0L;
    for (int y = 0; y < tensor.height(); ++y) {
        long double row = 0.0L;
        for (int x = 0; x < tensor.width(); ++x) {
            row += focal_term(tensor.logits(x, y), target.values(x, y), params).value;
        }
        total += row;
    }
    return -total / positive_count(target);
}

FocalLossResult focal_loss(const HeatTensor& tensor, const HeatTarget& target,
                           const LossParams& params) {
    check_shapes(tensor, target);
    FocalLossResult result;
    result.grad = Grid<double>(tensor.width(), tensor.height(), 0.0);
    const long double n = positive_count(target);
    long double total = 0.0L;
    for (int y = 0; y < tensor.height(); ++y) {
        long double row = 0.0L;
        for (int x = 0; x < tensor.width(); ++x) {
            const PixelTerm t = focal_term(tensor.logits(x, y), target.values(x, y), params);
            row += t.value;
            result.grad(x, y) = static_cast<double>(-t.slope / n);
        }
        total += row;
    }
    result.loss = static_cast<double>(-total / n);
    return result;
}

long double offset_loss_value(const HeatTensor& tensor, const HeatTarget& target,
                              const LossParams& params) {
    check_offsets(tensor, target);
    const std::size_t masked = mask_count(target);
    if (masked == 0) return 0.0L;
    long double total = 0.0L;
    for (int y = 0; y < tensor.height(); ++y) {
        long double row = 0.0L;
        for (int x = 0; x < tensor.width(); ++x) {
            if (!target.mask(x, y)) continue;
            row += smooth_l1(tensor.offsets->dx(x, y) - target.offsets.dx(x, y), params.beta_off);
            row += smooth_l1(tensor.offsets->dy(x, y) - target.offsets.dy(x, y), params.beta_off);
        }
        total += row;
    }
    return total / static_cast<long double>(2 * masked);
}

OffsetLossResult offset_loss(const HeatTensor& tensor, const HeatTarget& target,
                             const LossParams& params) {
    check_offsets(tensor, target);
    OffsetLossResult result;
    result.grad = OffsetField(tensor.width(), tensor.height());
    const std::size_t masked = mask_count(target);
    if (masked == 0) return result;
    const double count = static_cast<double>(2 * masked);
    for (int y = 0; y < tensor.height(); ++y) {
        for (int x = 0; x < tensor.width(); ++x) {
            if (!target.mask(x, y)) continue;
            const double ex = tensor.offsets->dx(x, y) - target.offsets.dx(x, y);
            const double ey = tensor.offsets->dy(x, y) - target.offsets.dy(x, y);
            result.grad.dx(x, y) = smooth_l1_slope(ex, params.beta_off) / count;
            result.grad.dy(x, y) = smooth_l1_slope(ey, params.beta_off) / count;
        }
    }
    result.loss = static_cast<double>(offset_loss_value(tensor, target, params));
    return result;
}

long double total_loss_value(const HeatTensor& tensor, const HeatTarget& target,
                             const LossParams& params) {
    long double value = focal_loss_value(tensor, target, params);
    if (tensor.offsets) value += LossParams::kOffsetWeight * offset_loss_value(tensor, target, params);
    return value;
}

TotalLossResult total_loss(const HeatTensor& tensor, const HeatTarget& target,
                           const LossParams& params) {
    FocalLossResult focal = focal_loss(tensor, target, params);
    TotalLossResult result;
    result.heatmap_loss = focal.loss;
    result.logit_grad = std::move(focal.grad);
    if (tensor.offsets) {
        OffsetLossResult off = offset_loss(tensor, target, params);
        result.offset_loss = off.loss;
        for (auto& g : off.grad.dx.values()) g *= LossParams::kOffsetWeight;
        for (auto& g : off.grad.dy.values()) g *= LossParams::kOffsetWeight;
        result.offset_grad = std::move(off.grad);
    }
    result.loss = static_cast<double>(total_loss_value(tensor, target, params));
    return result;
}

// ---------------------------------------------------------------------------

GradCheckResult grad_check(const GradCheckProblem& problem, double epsilon, std::size_t samples,
                           std::uint64_t seed) {
    require(epsilon > 0.0, "grad_check: epsilon must be positive");
    const std::vector<double> analytic = problem.gradient(problem.inputs);
    require(analytic.size() == problem.inputs.size(), "grad_check: gradient size mismatch");

    std::vector<std::size_t> order(problem.inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(samples, order.size()));

    GradCheckResult result;
    std::vector<double> probe = problem.inputs;
    for (std::size_t i : order) {
        const double original = probe[i];
        probe[i] = original + epsilon;
        const long double plus = problem.value(probe);
        probe[i] = original - epsilon;
        const long double minus = problem.value(probe);
        probe[i] = original;
        const double numeric = static_cast<double>((plus - minus) / (2.0L * epsilon));
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        result.max_rel_error = std::max(result.max_rel_error, std::abs(analytic[i] - numeric) / denom);
        ++result.entries_checked;
    }
    return result;
}

GradCheckProblem make_loss_problem(LossKind kind, const HeatTensor& tensor,
                                   const HeatTarget& target, const LossParams& params) {
    check_shapes(tensor, target);
    const bool uses_logits = kind != LossKind::Offset;
    const bool uses_offsets = kind == LossKind::Offset || (kind == LossKind::Total && tensor.offsets);
    if (kind == LossKind::Offset) check_offsets(tensor, target);
    const std::size_t cells = tensor.logits.size();

    GradCheckProblem problem;
    if (uses_logits) {
        problem.inputs.insert(problem.inputs.end(), tensor.logits.values().begin(),
                              tensor.logits.values().end());
    }
    if (uses_offsets) {
        problem.inputs.insert(problem.inputs.end(), tensor.offsets->dx.values().begin(),
                              tensor.offsets->dx.values().end());
        problem.inputs.insert(problem.inputs.end(), tensor.offsets->dy.values().begin(),
                              tensor.offsets->dy.values().end());
    }

    auto unpack = [=](std::span<const double> flat) {
        HeatTensor t = tensor;
        std::size_t at = 0;
        if (uses_logits) {
            std::copy_n(flat.begin(), cells, t.logits.values().begin());
            at = cells;
        }
        if (uses_offsets) {
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at), cells, t.offsets->dx.values().begin());
            std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(at + cells), cells,
                        t.offsets->dy.values().begin());
        }
        return t;
    };

    problem.value = [=](std::span<const double> flat) -> long double {
        const HeatTensor t = unpack(flat);
        switch (kind) {
            case LossKind::Focal: return focal_loss_value(t, target, params);
            case LossKind::Offset: return offset_loss_value(t, target, params);
            case LossKind::Total: return total_loss_value(t, target, params);
        }
        return 0.0L;
    };
    problem.gradient = [=](std::span<const double> flat) {
        const HeatTensor t = unpack(flat);
        std::vector<double> grad;
        const auto append = [&grad](const Grid<double>& g) {
            grad.insert(grad.end(), g.values().begin(), g.values().end());
        };
        switch (kind) {
            case LossKind::Focal: append(focal_loss(t, target, params).grad); break;
            case LossKind::Offset: {
                const OffsetLossResult r = offset_loss(t, target, params);
                append(r.grad.dx);
                append(r.grad.dy);
                break;
            }
            case LossKind::Total: {
                const TotalLossResult r = total_loss(t, target, params);
                append(r.logit_grad);
                if (r.offset_grad) {
                    append(r.offset_grad->dx);
                    append(r.offset_grad->dy);
                }
                break;
            }
        }
        return grad;
    };
    return problem;
}

}  // namespace arrowscore::heatmap
