#include <arrowscore/cli.hpp>

#include <iostream>
#include <memory>

#include <CLI11.hpp>

namespace arrowscore::cli {
namespace {

template <typename T>
void optional_path(CLI::App* app, const char* name, std::optional<T>& target, const char* help) {
    app->add_option_function<std::string>(
        name, [&target](const std::string& v) { target = T(v); }, help);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Archery target rectification, arrow decoding and scoring", "arrowscore"};
    app.require_subcommand(1);

    RectifyArgs rectify;
    auto* c_rectify = app.add_subcommand("rectify", "Rectify a photo into the canonical frame");
    c_rectify->add_option("--input", rectify.input, "Photo (PNG or JPEG)")->required();
    c_rectify->add_option("--output", rectify.output, "Canonical PNG")->required();
    optional_path(c_rectify, "--debug-dir", rectify.debug_dir, "Masks, ellipse overlay and warp map");
    optional_path(c_rectify, "--config", rectify.config, "Config JSON");

    DecodeArgs decode;
    auto* c_decode = app.add_subcommand("decode", "Decode an HMP1 heatmap into detections");
    c_decode->add_option("--heatmap", decode.heatmap, "HMP1 tensor")->required();
    c_decode->add_option("--output", decode.output, "Detections JSON")->required();
    optional_path(c_decode, "--config", decode.config, "Config JSON");
    c_decode->add_flag("--use-offsets", decode.use_offsets, "Refine peaks with the offset channels");

    ScoreArgs score;
    auto* c_score = app.add_subcommand("score", "Score detections");
    c_score->add_option("--detections", score.detections, "Detections JSON")->required();
    c_score->add_option("--output", score.output, "Scorecard JSON")->required();
    optional_path(c_score, "--config", score.config, "Config JSON");

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
    c_eval->add_option("--pred", eval.pred, "Predicted detections or annotation JSON")->required();
    c_eval->add_option("--gt", eval.gt, "Ground-truth annotation or detections JSON")->required();
    c_eval->add_option("--output", eval.output, "Report JSON")->required();
    c_eval->add_option_function<double>(
        "--radius-px", [&eval](double v) { eval.radius_px = v; }, "Match radius in pixels (default 15)");
    optional_path(c_eval, "--config", eval.config, "Config JSON");

    GridSearchArgs grid;
    auto* c_grid = app.add_subcommand("gridsearch", "Exhaustive decoder parameter search");
    c_grid->add_option("--heatmaps", grid.heatmaps, "Directory of .hmp1 files")->required();
    c_grid->add_option("--gts", grid.gts, "Directory of ground-truth .json files")->required();
    c_grid->add_option("--output", grid.output, "CSV table; the best row goes to <stem>.best.json")
        ->required();
    optional_path(c_grid, "--config", grid.config, "Config JSON");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate synthetic target photos");
    c_synth->add_option_function<std::uint64_t>(
        "--seed", [&synth](std::uint64_t v) { synth.seed = v; }, "First seed (default 0)");
    c_synth->add_option_function<int>(
        "--arrows", [&synth](int v) { synth.arrows = v; }, "Arrows per case");
    c_synth->add_option_function<double>(
        "--tilt-deg", [&synth](double v) { synth.tilt_deg = v; }, "Maximum camera tilt in degrees");
    c_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();
    c_synth->add_option("--count", synth.count, "Number of cases, seeds N..N+K-1");
    optional_path(c_synth, "--config", synth.config, "Config JSON");

    GradCheckArgs grad;
    auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradients");
    c_grad->add_option("--trials", grad.trials, "Random fixtures per loss");
    c_grad->add_flag("--break-gradient", grad.break_gradient)->group("");

    PipelineArgs pipeline;
    auto* c_pipe = app.add_subcommand("pipeline", "Rectify, decode and score one photo");
    c_pipe->add_option("--input", pipeline.input, "Photo (PNG or JPEG)")->required();
    c_pipe->add_option("--output-dir", pipeline.output_dir, "Output directory")->required();
    optional_path(c_pipe, "--heatmap", pipeline.heatmap, "HMP1 tensor for the rectified photo");
    optional_path(c_pipe, "--config", pipeline.config, "Config JSON");
    c_pipe->add_flag("--use-offsets", pipeline.use_offsets, "Refine peaks with the offset channels");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (c_rectify->parsed()) return cmd_rectify(rectify, out, err);
    if (c_decode->parsed()) return cmd_decode(decode, out, err);
    if (c_score->parsed()) return cmd_score(score, out, err);
    if (c_eval->parsed()) return cmd_eval(eval, out, err);
    if (c_grid->parsed()) return cmd_gridsearch(grid, out, err);
    if (c_synth->parsed()) return cmd_synth(synth, out, err);
    if (c_grad->parsed()) return cmd_gradcheck(grad, out, err);
    return cmd_pipeline(pipeline, out, err);
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace arrowscore::cli
