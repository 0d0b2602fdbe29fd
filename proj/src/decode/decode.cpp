#include <arrowscore/decode.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace arrowscore::decode {
namespace {

/// Sliding-window maximum along one line with a clipped window of
/// half-width r (monotone deque, O(n)).
void window_max(const double* in, double* out, int n, std::ptrdiff_t stride, int r) {
    std::deque<int> dq;
    int next = 0;
    for (int i = 0; i < n; ++i) {
        const int hi = std::min(n - 1, i + r);
        for (; next <= hi; ++next) {
            while (!dq.empty() && in[dq.back() * stride] <= in[next * stride]) dq.pop_back();
            dq.push_back(next);
        }
        while (dq.front() < i - r) dq.pop_front();
        out[i * stride] = in[dq.front() * stride];
    }
}

}  // namespace

void DecoderConfig::validate() const {
    require(std::isfinite(threshold) && threshold > 0.0 && threshold < 1.0,
            "decoder threshold must be in (0, 1)");
    require(nms_kernel >= 3 && nms_kernel % 2 == 1,
            "NMS kernel must be odd and >= 3, got " + std::to_string(nms_kernel));
    require(std::isfinite(separation_px) && separation_px >= 0.0, "separation_px must be >= 0");
}

Grid<double> sigmoid_map(const Grid<double>& logits) {
    Grid<double> probs(logits.width(), logits.height());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double z = logits[i];
        probs[i] = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    return probs;
}

std::vector<Peak> nms_peaks(const Grid<double>& probs, int kernel) {
    require(kernel >= 3 && kernel % 2 == 1,
            "NMS kernel must be odd and >= 3, got " + std::to_string(kernel));
    const int w = probs.width();
    const int h = probs.height();
    const int r = kernel / 2;
    Grid<double> rows(w, h), full(w, h);
    for (int y = 0; y < h; ++y) window_max(&probs(0, y), &rows(0, y), w, 1, r);
    for (int x = 0; x < w; ++x) window_max(&rows(x, 0), &full(x, 0), h, w, r);

    std::vector<Peak> peaks;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (probs(x, y) == full(x, y)) peaks.push_back({x, y, probs(x, y)});
        }
    }
    return peaks;
}

std::vector<Detection> decode_peaks(const std::vector<Peak>& peaks, const heatmap::HeatTensor& tensor,
                                    const DecoderConfig& config) {
    config.validate();
    if (config.use_offsets) {
        require(tensor.offsets.has_value(), "offsets absent: tensor has a single channel");
    }
    const double max_x = std::nextafter(static_cast<double>(tensor.width()), 0.0);
    const double max_y = std::nextafter(static_cast<double>(tensor.height()), 0.0);

    struct Candidate {
        Detection det;
        int px, py;
    };
    std::vector<Candidate> candidates;
    for (const Peak& p : peaks) {
        if (p.confidence < config.threshold) continue;
        Detection d{p.x(), p.y(), p.confidence, false};
        if (config.use_offsets) {
            d.x = std::clamp(d.x + tensor.offsets->dx(p.px, p.py), 0.0, max_x);
            d.y = std::clamp(d.y + tensor.offsets->dy(p.px, p.py), 0.0, max_y);
            d.refined = true;
        }
        candidates.push_back({d, p.px, p.py});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.det.confidence != b.det.confidence) return a.det.confidence > b.det.confidence;
        return a.py != b.py ? a.py < b.py : a.px < b.px;
    });

    std::vector<Detection> kept;
    const double sep2 = config.separation_px * config.separation_px;
    for (const Candidate& c : candidates) {
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
            const double dx = k.x - c.det.x;
            const double dy = k.y - c.det.y;
            return dx * dx + dy * dy < sep2;
        });
        if (!duplicate) kept.push_back(c.det);
    }
    return kept;
}

std::vector<Detection> decode(const heatmap::HeatTensor& tensor, const DecoderConfig& config) {
    config.validate();
    if (config.use_offsets) {
        require(tensor.offsets.has_value(), "offsets absent: tensor has a single channel");
    }
    return decode_peaks(nms_peaks(sigmoid_map(tensor.logits), config.nms_kernel), tensor, config);
}

std::vector<DecoderConfig> grid_candidates(const DecoderConfig& base) {
    std::vector<DecoderConfig> out;
    for (int t = 0; t < kGridThresholdCount; ++t) {
        const double threshold =
            t == kGridThresholdCount - 1
                ? kGridThresholdMax
                : kGridThresholdMin + (kGridThresholdMax - kGridThresholdMin) * t / (kGridThresholdCount - 1);
        for (int k = kGridKernelMin; k <= kGridKernelMax; k += 2) {
            DecoderConfig c = base;
            c.threshold = threshold;
            c.nms_kernel = k;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace arrowscore::decode
