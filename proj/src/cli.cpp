#include "eegrt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "eegrt/error.hpp"
#include "eegrt/scoring.hpp"
#include "eegrt/synth.hpp"

namespace fs = std::filesystem;

namespace eegrt::cli {

namespace {

MontageSpec load_montage(const PipelineConfig& cfg) {
    if (cfg.montage_path.empty()) fail_usage("no montage_path configured");
    return MontageSpec::load(cfg.montage_path);
}

std::unique_ptr<MiniResNet> load_configured_model(const PipelineConfig& cfg) {
    if (cfg.model_path.empty()) fail_usage("no model_path configured");
    return load_model(cfg.model_path);
}

}  // namespace

int cmd_run(const RunArgs& args) {
    args.config.validate();
    const MontageSpec montage = load_montage(args.config);
    const auto model = load_configured_model(args.config);
    const RawRecording rec = load_recording(args.input_path);

    std::optional<fs::path> pgm;
    if (args.pgm_dir) {
        pgm = fs::path(*args.pgm_dir);
        fs::create_directories(*pgm);
    }
    const RunResult res = run_pipeline(rec, montage, *model, args.config, pgm ? &*pgm : nullptr);
    res.hypothesis.save(args.out_hyp_path);
    if (args.posteriors_out) res.posteriors.save(*args.posteriors_out);

    std::cout << "windows=" << res.posteriors.entries.size() << " events=" << res.hypothesis.events.size()
              << " hyp=" << args.out_hyp_path << "\n";
    return 0;
}

int cmd_train(const TrainArgs& args) {
    args.config.validate();
    if (args.bckg_fraction <= 0 || args.bckg_fraction > 1) fail_usage("--fraction must be in (0, 1]");
    if (args.label_overlap < 0 || args.label_overlap > 1) fail_usage("--label-overlap must be in [0, 1]");
    const MontageSpec montage = load_montage(args.config);

    // collect recording/annotation pairs
    std::vector<std::pair<fs::path, fs::path>> items;
    if (!fs::is_directory(args.data_dir)) fail_data("dataset dir not found: " + args.data_dir);
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(args.data_dir)) paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        const std::string ext = p.extension().string();
        if (ext != ".eegr" && ext != ".csv") continue;
        fs::path ref = p;
        ref.replace_extension(".ref");
        if (!fs::exists(ref)) fail_data("no reference annotation for " + p.string() + " (expected " + ref.string() + ")");
        items.emplace_back(p, ref);
    }
    if (items.empty()) fail_data("dataset dir has no recordings: " + args.data_dir);

    PipelineConfig wcfg = args.config;
    wcfg.stride_samples = args.train_stride_samples > 0 ? args.train_stride_samples : args.config.window_samples;

    const double span_sec = static_cast<double>(args.config.window_samples) / args.config.target_hz;
    const std::int64_t span_ms = std::llround(span_sec * 1000.0);

    std::vector<LabeledImage> data;
    for (const auto& [rec_path, ref_path] : items) {
        const RawRecording rec = load_recording(rec_path);
        const EventList ref = EventList::load(ref_path);
        PreprocessResult pre = preprocess_recording(rec, montage, wcfg);
        for (GrayscaleImage& img : pre.images) {
            const std::int64_t a = std::llround(img.start_sec * 1000.0);
            const std::int64_t b = std::min(a + span_ms, ref.total_dur_ms);
            const std::int64_t seiz = seizure_overlap_ms(ref, a, b);
            const Label label = (b > a && static_cast<double>(seiz) >= args.label_overlap * static_cast<double>(b - a))
                                    ? Label::seiz
                                    : Label::bckg;
            data.push_back({std::move(img), label});
        }
    }

    const TrainSetStats raw_stats = count_labels(data);
    if (raw_stats.n_seiz == 0 || raw_stats.n_bckg == 0)
        fail_data("dataset contains a single class (" + std::to_string(raw_stats.n_seiz) + " seiz, " +
                  std::to_string(raw_stats.n_bckg) + " bckg windows); cannot train");

    data = subsample_background(data, args.bckg_fraction, args.config.seed);
    const TrainSetStats stats = count_labels(data);
    const ClassWeights weights = class_weights(stats);
    std::cout << "windows: seiz=" << stats.n_seiz << " bckg=" << stats.n_bckg << " (subsampled from "
              << raw_stats.n_bckg << ")\n";
    std::printf("class weights: w_bckg=%.6f w_seiz=%.6f\n", weights.w_bckg, weights.w_seiz);

    MiniResNetConfig mcfg;
    mcfg.input_size = args.config.image_size;
    mcfg.seed = args.config.seed;
    auto model = build_mini_resnet(mcfg);

    TrainOptions opt = args.train;
    opt.seed = args.config.seed;
    const std::vector<EpochStats> log = train(*model, data, weights, opt);
    for (const auto& e : log)
        std::printf("epoch %d: loss=%.6f acc=%.2f%%\n", e.epoch, e.mean_weighted_loss, e.train_accuracy_pct);

    save_model(*model, args.out_model_path);
    if (args.log_path) write_training_log(log, *args.log_path);
    std::cout << "model=" << args.out_model_path << "\n";
    return 0;
}

int cmd_score(const ScoreArgs& args) {
    const EventList ref = EventList::load(args.ref_path);
    const EventList hyp = EventList::load(args.hyp_path);
    std::vector<ScoreReport> reports{score_ovlp(ref, hyp), score_epoch(ref, hyp, args.epoch_sec)};
    const std::string csv = report_csv(reports);
    if (args.out_csv) {
        write_report_csv(reports, *args.out_csv);
    } else {
        std::cout << csv;
    }
    if (args.print_confusion) std::cout << format_confusion(confusion_matrix(ref, hyp, args.epoch_sec));
    return 0;
}

std::vector<std::pair<double, double>> parse_grid(const std::string& grid) {
    std::vector<std::pair<double, double>> out;
    std::size_t pos = 0;
    while (pos < grid.size()) {
        std::size_t end = grid.find(',', pos);
        if (end == std::string::npos) end = grid.size();
        const std::string item = grid.substr(pos, end - pos);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos) fail_usage("grid item '" + item + "' is not 'bd:sd'");
        try {
            out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            fail_usage("grid item '" + item + "' is not numeric");
        }
        pos = end + 1;
    }
    if (out.empty()) fail_usage("empty sweep grid");
    return out;
}

int cmd_sweep(const SweepArgs& args) {
    PosteriorSequence post;
    if (args.posteriors_path) {
        post = PosteriorSequence::load(*args.posteriors_path);
    } else if (args.input_path) {
        args.config.validate();
        const MontageSpec montage = load_montage(args.config);
        const auto model = load_configured_model(args.config);
        const RawRecording rec = load_recording(*args.input_path);
        post = run_pipeline(rec, montage, *model, args.config).posteriors;
    } else {
        fail_usage("sweep needs --posteriors or --input");
    }
    const EventList ref = EventList::load(args.ref_path);

    // Posterior coverage ends one stride past the last window start, short of
    // the recording end; extend each hypothesis so both lists tile the
    // reference span, mirroring what the run command writes.
    const auto grid = parse_grid(args.grid);
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const auto& [bd, sd] : grid) {
        PostprocParams p{args.s_th, bd, sd};
        EventList hyp = postprocess(post, p);
        if (!hyp.events.empty() && ref.total_dur_ms > hyp.total_dur_ms) {
            hyp.events.back().stop_ms = ref.total_dur_ms;
            hyp.total_dur_ms = ref.total_dur_ms;
        }
        const ScoreReport rep = score_ovlp(ref, hyp);
        rows.push_back({bd, sd, detection_delay_sec(p), rep.sensitivity_pct, rep.fa_per_24h});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.delay_sec < b.delay_sec; });

    if (args.out_csv) {
        write_sweep_csv(rows, *args.out_csv);
    } else {
        std::cout << sweep_csv(rows);
    }
    return 0;
}

int cmd_bench(const BenchArgs& args) {
    args.config.validate();
    const MontageSpec montage = load_montage(args.config);
    const auto model = load_configured_model(args.config);
    const RawRecording rec = load_recording(args.input_path);
    const BenchReport report = run_bench(rec, montage, *model, args.config);
    std::cout << format_bench_report(report);
    return 0;
}

int cmd_synth(const SynthArgs& args) {
    SynthParams p;
    p.duration_sec = args.duration_sec;
    p.n_channels = args.n_channels;
    p.rate_hz = args.rate_hz;
    p.n_seizures = args.n_seizures;
    p.seed = args.seed;
    const SynthResult res = generate_synthetic(p);
    const fs::path rec_path = args.out_base + (args.csv ? ".csv" : ".eegr");
    const fs::path ref_path = args.out_base + ".ref";
    if (args.csv)
        save_recording_csv(res.recording, rec_path);
    else
        save_recording_raw(res.recording, rec_path);
    res.reference.save(ref_path);
    std::cout << "recording=" << rec_path.string() << " reference=" << ref_path.string() << "\n";
    return 0;
}

}  // namespace eegrt::cli
