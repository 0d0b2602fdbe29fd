#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <arrowscore/core.hpp>
#include <arrowscore/decode.hpp>
#include <arrowscore/evaluate.hpp>
#include <arrowscore/heatmap.hpp>
#include <arrowscore/image.hpp>
#include <arrowscore/rectify.hpp>
#include <arrowscore/scoring.hpp>
#include <arrowscore/synth.hpp>

namespace arrowscore::io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

Json read_json(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json(const std::filesystem::path& path, const Json& doc);

// ---------------------------------------------------------------------------
// HMP1 heatmap tensors
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kHmp1Version = 1;
inline constexpr std::size_t kHmp1HeaderBytes = 20;

/// Channels are stored as float32; values are rounded on encode.
std::vector<std::uint8_t> encode_hmp1(const heatmap::HeatTensor& tensor);
/// Throws InvalidInput naming the offset of the first bad byte, or the
/// expected and actual byte counts on a length mismatch.
heatmap::HeatTensor decode_hmp1(const std::vector<std::uint8_t>& bytes);

heatmap::HeatTensor read_hmp1(const std::filesystem::path& path);
void write_hmp1(const std::filesystem::path& path, const heatmap::HeatTensor& tensor);

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

enum class PointUnit { PxCanonical, Mm };

struct Annotation {
    int frame_size_px = 2048;
    PointUnit unit = PointUnit::PxCanonical;
    std::vector<PointPx> points;  ///< raw values in `unit`

    /// Points in pixels of the annotation's own frame.
    std::vector<PointPx> points_px() const;
};

Annotation annotation_from_json(const Json& doc);
Json annotation_to_json(const Annotation& annotation);
Annotation annotation_from_mm(std::span<const PointMm> points, int frame_size_px);

struct DetectionFile {
    int frame_size_px = 512;
    std::vector<Detection> detections;
};

DetectionFile detections_from_json(const Json& doc);
Json detections_to_json(const DetectionFile& file);

Json scorecard_to_json(const scoring::TargetScorecard& card, int frame_size_px);
Json eval_to_json(const evaluate::EvalReport& eval, const evaluate::ArcheryReport& archery,
                  double match_radius_px, int frame_size_px);
Json warp_to_json(const rectify::WarpMap& warp);
Json ellipses_to_json(const rectify::RectifyResult& result);
Json homography_to_json(const Eigen::Matrix3d& h);

/// Machine-readable error document written to stderr by the CLI.
Json error_to_json(const Error& error, std::optional<std::string> stage = std::nullopt);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct SynthDefaults {
    int arrows = 12;
    double tilt_deg = 20.0;
    synth::SynthOptions options;

    bool operator==(const SynthDefaults&) const = default;
};

struct Config {
    rectify::ColorThresholdConfig thresholds;
    heatmap::LossParams loss;
    decode::DecoderConfig decoder;
    double match_radius_px = evaluate::kDefaultMatchRadiusPx;
    SynthDefaults synth;
    int canonical_size_px = 2048;
    int n_angles = 720;

    rectify::RectifyOptions rectify_options() const;

    bool operator==(const Config&) const = default;
};

inline constexpr const char* kConfigEnvVar = "TARGET_SCORER_CONFIG";

/// Every field optional; unknown keys throw InvalidInput naming the key.
Config config_from_json(const Json& doc);
/// Full document with every field, used for the defaults listing.
Json config_to_json(const Config& config);

/// Explicit path first, then the environment variable, then defaults.
Config load_config(const std::optional<std::filesystem::path>& explicit_path);

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// PNG or JPEG via OpenCV, converted to RGB. Throws InvalidInput.
RgbImage read_image(const std::filesystem::path& path);
/// PNG with fixed compression settings, byte-identical for equal input.
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_mask_png(const std::filesystem::path& path, const Grid<std::uint8_t>& mask);

// ---------------------------------------------------------------------------
// SVG overlays
// ---------------------------------------------------------------------------

/// Fitted ellipses and hull vertices over the source image extent.
std::string ellipse_overlay_svg(const rectify::RectifyResult& result, int width, int height);

/// Ring circles plus each detection labelled with its score, in the
/// detections' frame.
std::string detections_overlay_svg(const scoring::TargetScorecard& card, int frame_size_px,
                                   const TargetFaceSpec& spec = {},
                                   const std::string& background_href = "");

}  // namespace arrowscore::io
