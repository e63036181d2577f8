#include "eegrt/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#ifdef __linux__
#include <sched.h>
#include <sys/resource.h>
#endif

#include "eegrt/error.hpp"

namespace eegrt {

void PipelineConfig::validate() const {
    if (!(target_hz > 0)) fail_usage("target_hz must be positive");
    if (!(window_sec > 0)) fail_usage("window_sec must be positive");
    if (window_samples <= 0) fail_usage("window_samples must be positive");
    if (stride_samples <= 0) fail_usage("stride_samples must be positive");
    if (image_size <= 0) fail_usage("image_size must be positive");
    postproc.validate();
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open config file: " + path.string());
    PipelineConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto strip = [](std::string s) {
            const std::size_t b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const std::size_t e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail_data(path.filename().string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
        set_config_value(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    const auto as_double = [&](const char* what) {
        try {
            return std::stod(value);
        } catch (const std::exception&) {
            fail_data(std::string("config: bad number for ") + what + ": '" + value + "'");
        }
    };
    const auto as_int = [&](const char* what) {
        try {
            return std::stoi(value);
        } catch (const std::exception&) {
            fail_data(std::string("config: bad integer for ") + what + ": '" + value + "'");
        }
    };
    if (key == "montage_path") cfg.montage_path = value;
    else if (key == "target_hz") cfg.target_hz = as_double("target_hz");
    else if (key == "window_sec") cfg.window_sec = as_double("window_sec");
    else if (key == "window_samples") cfg.window_samples = as_int("window_samples");
    else if (key == "stride_samples") cfg.stride_samples = as_int("stride_samples");
    else if (key == "image_size") cfg.image_size = as_int("image_size");
    else if (key == "model_path") cfg.model_path = value;
    else if (key == "s_th") cfg.postproc.s_th = as_double("s_th");
    else if (key == "bd_min_sec") cfg.postproc.bd_min_sec = as_double("bd_min_sec");
    else if (key == "sd_min_sec") cfg.postproc.sd_min_sec = as_double("sd_min_sec");
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else fail_data("config: unknown key '" + key + "'");
}

PreprocessResult preprocess_recording(const RawRecording& rec, const MontageSpec& montage,
                                      const PipelineConfig& cfg,
                                      const std::filesystem::path* pgm_dump_dir) {
    cfg.validate();
    PreprocessResult out;
    out.recording_dur_sec = rec.duration_sec();

    const MontagedRecording montaged = apply_montage(rec, montage);
    DecimateResult dec = decimate(montaged, cfg.target_hz);
    out.fir_group_delay_sec = dec.group_delay_sec;
    out.montage_channels = static_cast<int>(dec.recording.channels.size());

    ScalingParams sp;
    sp.window_sec = cfg.window_sec;
    const MontagedRecording scaled = max_local_scale(dec.recording, sp);
    out.scaling_lookahead_sec = cfg.window_sec / 2.0;
    out.window_span_sec = static_cast<double>(cfg.window_samples) / cfg.target_hz;
    out.stride_sec = static_cast<double>(cfg.stride_samples) / cfg.target_hz;

    const std::vector<ScaledWindow> windows = extract_windows(scaled, cfg.window_samples, cfg.stride_samples);
    out.images.reserve(windows.size());
    for (const ScaledWindow& w : windows) {
        GrayscaleImage img = resize_bicubic(to_grayscale(w), cfg.image_size, cfg.image_size);
        if (pgm_dump_dir) write_window_pgm(img, *pgm_dump_dir);
        out.images.push_back(std::move(img));
    }
    return out;
}

RunResult run_pipeline(const RawRecording& rec, const MontageSpec& montage, const DetectorModel& model,
                       const PipelineConfig& cfg, const std::filesystem::path* pgm_dump_dir) {
    RunResult res;
    res.preprocess = preprocess_recording(rec, montage, cfg, pgm_dump_dir);
    res.posteriors = infer_stream(model, res.preprocess.images, res.preprocess.stride_sec);

    StreamingPostprocessor spp(cfg.postproc, res.preprocess.stride_sec);
    EventAccumulator acc;
    for (const PosteriorEntry& e : res.posteriors.entries) acc.add(spp.push(e.start_sec, e.p_seiz));
    acc.add(spp.finish());
    EventList hyp = acc.take();

    // The last window's stride coverage ends before the recording does;
    // stretch the final event so hypothesis and reference span the same time.
    const std::int64_t rec_ms = std::llround(res.preprocess.recording_dur_sec * 1000.0);
    if (!hyp.events.empty() && rec_ms > hyp.total_dur_ms) {
        hyp.events.back().stop_ms = rec_ms;
        hyp.total_dur_ms = rec_ms;
    }
    res.hypothesis = std::move(hyp);
    return res;
}

namespace {

double now_sec() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

double peak_rss_mb() {
#ifdef __linux__
    rusage u{};
    if (getrusage(RUSAGE_SELF, &u) == 0) return static_cast<double>(u.ru_maxrss) / 1024.0;
#endif
    return 0.0;
}

void pin_to_one_core() {
#ifdef __linux__
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(0, &set);
    sched_setaffinity(0, sizeof set, &set);  // best effort
#endif
}

}  // namespace

BenchReport run_bench(const RawRecording& rec, const MontageSpec& montage, const DetectorModel& model,
                      const PipelineConfig& cfg) {
    cfg.validate();
    pin_to_one_core();

    BenchReport r;
    r.signal_sec = rec.duration_sec();

    double t0 = now_sec();
    const MontagedRecording montaged = apply_montage(rec, montage);
    r.stages.montage_sec = now_sec() - t0;

    t0 = now_sec();
    DecimateResult dec = decimate(montaged, cfg.target_hz);
    r.stages.decimate_sec = now_sec() - t0;
    r.fir_group_delay_sec = dec.group_delay_sec;

    t0 = now_sec();
    ScalingParams sp;
    sp.window_sec = cfg.window_sec;
    const MontagedRecording scaled = max_local_scale(dec.recording, sp);
    r.stages.scale_sec = now_sec() - t0;
    r.scaling_lookahead_sec = cfg.window_sec / 2.0;

    t0 = now_sec();
    const std::vector<ScaledWindow> windows = extract_windows(scaled, cfg.window_samples, cfg.stride_samples);
    std::vector<GrayscaleImage> images;
    images.reserve(windows.size());
    for (const ScaledWindow& w : windows)
        images.push_back(resize_bicubic(to_grayscale(w), cfg.image_size, cfg.image_size));
    r.stages.window_image_sec = now_sec() - t0;
    r.window_span_sec = static_cast<double>(cfg.window_samples) / cfg.target_hz;

    const double stride_sec = static_cast<double>(cfg.stride_samples) / cfg.target_hz;

    // replay one window at a time: that is the real-time serving pattern
    t0 = now_sec();
    PosteriorSequence post;
    post.stride_sec = stride_sec;
    for (const GrayscaleImage& img : images) {
        const auto p = model.predict(img);
        post.entries.push_back({img.start_sec, p.second});
    }
    r.stages.infer_sec = now_sec() - t0;

    t0 = now_sec();
    StreamingPostprocessor spp(cfg.postproc, stride_sec);
    EventAccumulator acc;
    for (const PosteriorEntry& e : post.entries) acc.add(spp.push(e.start_sec, e.p_seiz));
    acc.add(spp.finish());
    (void)acc.take();
    r.stages.postproc_sec = now_sec() - t0;

    r.postproc_delay_sec = detection_delay_sec(cfg.postproc);
    r.processing_sec = r.stages.montage_sec + r.stages.decimate_sec + r.stages.scale_sec +
                       r.stages.window_image_sec + r.stages.infer_sec + r.stages.postproc_sec;
    r.xrt = r.processing_sec / r.signal_sec;
    r.per_window_latency_ms =
        images.empty() ? 0.0
                       : 1000.0 * (r.stages.infer_sec + r.stages.postproc_sec) / static_cast<double>(images.size());
    r.total_latency_sec = r.fir_group_delay_sec + r.scaling_lookahead_sec + r.window_span_sec +
                          r.postproc_delay_sec + r.per_window_latency_ms / 1000.0;
    r.peak_memory_mb = peak_rss_mb();
    return r;
}

std::string format_bench_report(const BenchReport& r) {
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "xrt=%.4f\n"
                  "signal_sec=%.3f\n"
                  "processing_sec=%.3f\n"
                  "per_window_latency_ms=%.3f\n"
                  "fir_group_delay_sec=%.4f\n"
                  "scaling_lookahead_sec=%.4f\n"
                  "window_span_sec=%.4f\n"
                  "postproc_delay_sec=%.4f\n"
                  "total_latency_sec=%.4f\n"
                  "peak_memory_mb=%.1f\n"
                  "stage_montage_sec=%.4f\n"
                  "stage_decimate_sec=%.4f\n"
                  "stage_scale_sec=%.4f\n"
                  "stage_window_image_sec=%.4f\n"
                  "stage_infer_sec=%.4f\n"
                  "stage_postproc_sec=%.4f\n",
                  r.xrt, r.signal_sec, r.processing_sec, r.per_window_latency_ms, r.fir_group_delay_sec,
                  r.scaling_lookahead_sec, r.window_span_sec, r.postproc_delay_sec, r.total_latency_sec,
                  r.peak_memory_mb, r.stages.montage_sec, r.stages.decimate_sec, r.stages.scale_sec,
                  r.stages.window_image_sec, r.stages.infer_sec, r.stages.postproc_sec);
    return buf;
}

}  // namespace eegrt
