#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace arrowscore::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 1,
    kExitRectification = 2,
    kExitNumeric = 3,
};

using Path = std::filesystem::path;

struct RectifyArgs {
    Path input;
    Path output;
    std::optional<Path> debug_dir;
    std::optional<Path> config;
};

struct DecodeArgs {
    Path heatmap;
    Path output;
    std::optional<Path> config;
    bool use_offsets = false;
};

struct ScoreArgs {
    Path detections;
    Path output;
    std::optional<Path> config;
};

struct EvalArgs {
    Path pred;
    Path gt;
    Path output;
    std::optional<double> radius_px;
    std::optional<Path> config;
};

struct GridSearchArgs {
    Path heatmaps;
    Path gts;
    Path output;
    std::optional<Path> config;
};

struct SynthArgs {
    std::optional<std::uint64_t> seed;
    std::optional<int> arrows;
    std::optional<double> tilt_deg;
    Path out_dir;
    int count = 1;
    std::optional<Path> config;
};

struct GradCheckArgs {
    int trials = 20;
    bool break_gradient = false;
};

struct PipelineArgs {
    Path input;
    Path output_dir;
    std::optional<Path> heatmap;
    std::optional<Path> config;
    bool use_offsets = false;
};

/// Each command returns an exit code; failures are reported on `err` as
/// a JSON document, results and summaries on `out`.
int cmd_rectify(const RectifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err);
int cmd_score(const ScoreArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_gridsearch(const GridSearchArgs& args, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const GradCheckArgs& args, std::ostream& out, std::ostream& err);
int cmd_pipeline(const PipelineArgs& args, std::ostream& out, std::ostream& err);

/// Argument parsing and dispatch.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace arrowscore::cli
