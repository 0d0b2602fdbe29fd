#include <arrowscore/heatmap.hpp>

#include <cmath>
#include <string>

namespace arrowscore::heatmap {

DescentResult fit_logits_by_descent(const HeatTarget& target, const LossParams& params, int steps,
                                    double lr) {
    require(steps >= 1, "descent needs at least one step");
    require(std::isfinite(lr) && lr > 0.0, "learning rate must be positive");
    params.validate();

    DescentResult result;
    result.tensor = HeatTensor(target.width(), target.height(), kInitialLogitBias, true);
    HeatTensor& tensor = result.tensor;
    for (int step = 0; step <= steps; ++step) {
        const TotalLossResult loss = total_loss(tensor, target, params);
        if (!std::isfinite(loss.loss)) {
            fail(ErrorKind::NumericFailure, "loss diverged at step " + std::to_string(step));
        }
        result.losses.push_back(loss.loss);
        if (step == steps) break;
        for (std::size_t i = 0; i < tensor.logits.size(); ++i) {
            tensor.logits[i] -= lr * loss.logit_grad[i];
        }
        for (std::size_t i = 0; i < tensor.logits.size(); ++i) {
            tensor.offsets->dx[i] -= lr * loss.offset_grad->dx[i];
            tensor.offsets->dy[i] -= lr * loss.offset_grad->dy[i];
        }
    }
    return result;
}

}  // namespace arrowscore::heatmap
