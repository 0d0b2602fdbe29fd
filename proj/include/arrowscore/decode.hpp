#pragma once

#include <vector>

#include <arrowscore/core.hpp>
#include <arrowscore/heatmap.hpp>

namespace arrowscore::decode {

struct DecoderConfig {
    double threshold = 0.5;
    int nms_kernel = 15;
    double separation_px = 4.0;
    bool use_offsets = false;

    void validate() const;
    bool operator==(const DecoderConfig&) const = default;
};

struct Peak {
    int px = 0;  ///< pixel column
    int py = 0;  ///< pixel row
    double confidence = 0.0;

    double x() const { return px + 0.5; }
    double y() const { return py + 0.5; }
};

/// Pixels equal to the maximum of their kernel x kernel window (clipped
/// at the border), in row-major order. Plateau members are all kept.
std::vector<Peak> nms_peaks(const Grid<double>& probs, int kernel);

/// sigmoid -> NMS -> threshold -> optional offset refinement -> separation
/// filter. Sorted by descending confidence, ties in row-major pixel order.
std::vector<Detection> decode(const heatmap::HeatTensor& tensor, const DecoderConfig& config = {});

/// Same as decode() but starting from precomputed peaks of the sigmoid map.
std::vector<Detection> decode_peaks(const std::vector<Peak>& peaks, const heatmap::HeatTensor& tensor,
                                    const DecoderConfig& config);

Grid<double> sigmoid_map(const Grid<double>& logits);

/// The decoder search grid: 10 thresholds linearly spaced over [0.01, 0.4]
/// (outer) times the odd kernels 3..31 (inner). Separation and offset use
/// are copied from `base`.
std::vector<DecoderConfig> grid_candidates(const DecoderConfig& base = {});

inline constexpr int kGridThresholdCount = 10;
inline constexpr double kGridThresholdMin = 0.01;
inline constexpr double kGridThresholdMax = 0.4;
inline constexpr int kGridKernelMin = 3;
inline constexpr int kGridKernelMax = 31;

}  // namespace arrowscore::decode
