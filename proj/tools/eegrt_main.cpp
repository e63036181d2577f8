// Command-line front end: run detection over recordings, train the reference
// model, score hypotheses, sweep postprocessing parameters, benchmark, and
// generate synthetic corpora.

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "eegrt/cli.hpp"
#include "eegrt/error.hpp"

namespace {

struct ConfigFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> montage;
    std::optional<std::string> model;
    std::optional<double> target_hz;
    std::optional<double> window_sec;
    std::optional<int> window_samples;
    std::optional<int> stride_samples;
    std::optional<int> image_size;
    std::optional<double> s_th;
    std::optional<double> bd_min;
    std::optional<double> sd_min;
    std::optional<std::uint64_t> seed;
};

void add_config_flags(CLI::App* sub, ConfigFlags& f) {
    sub->add_option("--config", f.config_path, "pipeline config file (key = value lines)");
    sub->add_option("--montage", f.montage, "montage spec file (overrides config)");
    sub->add_option("--model", f.model, "model file (overrides config)");
    sub->add_option("--target-hz", f.target_hz, "working sample rate");
    sub->add_option("--window-sec", f.window_sec, "local scaling window, seconds");
    sub->add_option("--window-samples", f.window_samples, "window length in samples");
    sub->add_option("--stride-samples", f.stride_samples, "window stride in samples");
    sub->add_option("--image-size", f.image_size, "square detector input size");
    sub->add_option("--s-th", f.s_th, "seizure confidence threshold");
    sub->add_option("--bd-min", f.bd_min, "minimum background duration, seconds");
    sub->add_option("--sd-min", f.sd_min, "minimum seizure duration, seconds");
    sub->add_option("--seed", f.seed, "random seed");
}

eegrt::PipelineConfig make_config(const ConfigFlags& f) {
    eegrt::PipelineConfig cfg;
    if (f.config_path) cfg = eegrt::load_config(*f.config_path);
    if (f.montage) cfg.montage_path = *f.montage;
    if (f.model) cfg.model_path = *f.model;
    if (f.target_hz) cfg.target_hz = *f.target_hz;
    if (f.window_sec) cfg.window_sec = *f.window_sec;
    if (f.window_samples) cfg.window_samples = *f.window_samples;
    if (f.stride_samples) cfg.stride_samples = *f.stride_samples;
    if (f.image_size) cfg.image_size = *f.image_size;
    if (f.s_th) cfg.postproc.s_th = *f.s_th;
    if (f.bd_min) cfg.postproc.bd_min_sec = *f.bd_min;
    if (f.sd_min) cfg.postproc.sd_min_sec = *f.sd_min;
    if (f.seed) cfg.seed = *f.seed;
    return cfg;
}

int guarded(const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const eegrt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"real-time seizure detection pipeline"};
    app.require_subcommand(1);

    int rc = 0;

    // run
    ConfigFlags run_cfg;
    std::string run_input, run_out;
    std::optional<std::string> run_posteriors, run_pgm;
    CLI::App* run = app.add_subcommand("run", "detect seizures in a recording");
    add_config_flags(run, run_cfg);
    run->add_option("--input", run_input, "recording (.csv or .eegr)")->required();
    run->add_option("--out", run_out, "hypothesis annotation output")->required();
    run->add_option("--posteriors-out", run_posteriors, "also dump raw per-window posteriors");
    run->add_option("--dump-pgm", run_pgm, "dump window images as PGM files into this directory");
    run->callback([&] {
        rc = guarded([&] {
            eegrt::cli::RunArgs a{make_config(run_cfg), run_input, run_out, run_posteriors, run_pgm};
            return eegrt::cli::cmd_run(a);
        });
    });

    // train
    ConfigFlags train_cfg;
    eegrt::cli::TrainArgs train_args;
    CLI::App* tr = app.add_subcommand("train", "train the reference detector on a labeled dataset");
    add_config_flags(tr, train_cfg);
    tr->add_option("--data", train_args.data_dir, "dataset directory (*.eegr/*.csv with sibling *.ref)")->required();
    tr->add_option("--out", train_args.out_model_path, "model output path")->required();
    tr->add_option("--log", train_args.log_path, "training log CSV");
    tr->add_option("--fraction", train_args.bckg_fraction, "background subsampling fraction (default 0.2)");
    tr->add_option("--label-overlap", train_args.label_overlap, "seizure-overlap fraction for window labels");
    tr->add_option("--train-stride", train_args.train_stride_samples,
                   "window stride for training data (default: one window length)");
    tr->add_option("--epochs", train_args.train.epochs, "training epochs (default 25)");
    tr->add_option("--batch-size", train_args.train.batch_size, "batch size (default 8)");
    tr->add_option("--lr", train_args.train.lr0, "initial learning rate");
    tr->add_flag("--no-augment", [&](std::int64_t) { train_args.train.augment = false; }, "disable augmentation");
    tr->callback([&] {
        rc = guarded([&] {
            train_args.config = make_config(train_cfg);
            train_args.train.seed = train_args.config.seed;
            return eegrt::cli::cmd_train(train_args);
        });
    });

    // score
    ConfigFlags score_cfg;
    eegrt::cli::ScoreArgs score_args;
    CLI::App* sc = app.add_subcommand("score", "score a hypothesis against a reference annotation");
    add_config_flags(sc, score_cfg);
    sc->add_option("--ref", score_args.ref_path, "reference annotation")->required();
    sc->add_option("--hyp", score_args.hyp_path, "hypothesis annotation")->required();
    sc->add_option("--epoch-sec", score_args.epoch_sec, "epoch length for EPOCH scoring (default 1)");
    sc->add_option("--out", score_args.out_csv, "report CSV (stdout when omitted)");
    sc->add_flag("--confusion", score_args.print_confusion, "also print the confusion matrix");
    sc->callback([&] { rc = guarded([&] { return eegrt::cli::cmd_score(score_args); }); });

    // sweep
    ConfigFlags sweep_cfg;
    eegrt::cli::SweepArgs sweep_args;
    CLI::App* sw = app.add_subcommand("sweep", "sweep postprocessing parameters and score each point");
    add_config_flags(sw, sweep_cfg);
    sw->add_option("--posteriors", sweep_args.posteriors_path, "saved posterior stream");
    sw->add_option("--input", sweep_args.input_path, "recording to run through the model instead");
    sw->add_option("--ref", sweep_args.ref_path, "reference annotation")->required();
    sw->add_option("--s-th-sweep", sweep_args.s_th, "seizure threshold used for every grid point")->required();
    sw->add_option("--grid", sweep_args.grid, "comma-separated bd:sd pairs, e.g. 0:0,1:2,2:5")->required();
    sw->add_option("--out", sweep_args.out_csv, "sweep CSV (stdout when omitted)");
    sw->callback([&] {
        rc = guarded([&] {
            sweep_args.config = make_config(sweep_cfg);
            return eegrt::cli::cmd_sweep(sweep_args);
        });
    });

    // bench
    ConfigFlags bench_cfg;
    std::string bench_input;
    CLI::App* be = app.add_subcommand("bench", "measure throughput and latency over a recording");
    add_config_flags(be, bench_cfg);
    be->add_option("--input", bench_input, "recording (.csv or .eegr)")->required();
    be->callback([&] {
        rc = guarded([&] {
            eegrt::cli::BenchArgs a{make_config(bench_cfg), bench_input};
            return eegrt::cli::cmd_bench(a);
        });
    });

    // synth
    eegrt::cli::SynthArgs synth_args;
    CLI::App* sy = app.add_subcommand("synth", "generate a synthetic recording with reference annotations");
    sy->add_option("--out", synth_args.out_base, "output base path (writes .eegr and .ref)")->required();
    sy->add_option("--duration", synth_args.duration_sec, "duration in seconds (default 480)");
    sy->add_option("--channels", synth_args.n_channels, "channel count (default 19)");
    sy->add_option("--rate", synth_args.rate_hz, "sample rate (default 250)");
    sy->add_option("--seizures", synth_args.n_seizures, "number of injected bursts (default 6)");
    sy->add_option("--seed", synth_args.seed, "random seed");
    sy->add_flag("--csv", synth_args.csv, "write CSV instead of raw binary");
    sy->callback([&] { rc = guarded([&] { return eegrt::cli::cmd_synth(synth_args); }); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return rc;
}
