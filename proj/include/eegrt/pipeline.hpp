#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eegrt/detector.hpp"
#include "eegrt/postproc.hpp"
#include "eegrt/signal_io.hpp"
#include "eegrt/windowing.hpp"

namespace eegrt {

struct PipelineConfig {
    std::string montage_path;
    double target_hz = 50.0;
    double window_sec = 6.0;  // local-scaling window
    int window_samples = 256;
    int stride_samples = 50;
    int image_size = 256;
    std::string model_path;
    PostprocParams postproc;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Line-based `key = value` config. Unknown keys are rejected; '#' comments
/// and blank lines are skipped.
PipelineConfig load_config(const std::filesystem::path& path);
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

struct PreprocessResult {
    std::vector<GrayscaleImage> images;  // resized to image_size x image_size
    double stride_sec = 0.0;
    double fir_group_delay_sec = 0.0;
    double scaling_lookahead_sec = 0.0;  // centered local-max window needs half a window of future
    double window_span_sec = 0.0;
    double recording_dur_sec = 0.0;
    int montage_channels = 0;
};

/// montage -> decimate -> max local scale -> window -> grayscale -> resize.
PreprocessResult preprocess_recording(const RawRecording& rec, const MontageSpec& montage,
                                      const PipelineConfig& cfg,
                                      const std::filesystem::path* pgm_dump_dir = nullptr);

struct RunResult {
    PosteriorSequence posteriors;
    EventList hypothesis;  // streaming postprocessor output, extended to the recording duration
    PreprocessResult preprocess;
};

/// Full detection pass over one recording. The hypothesis comes from the
/// causal streaming postprocessor; the last event is extended to the raw
/// recording duration so hypothesis and reference cover the same span.
RunResult run_pipeline(const RawRecording& rec, const MontageSpec& montage, const DetectorModel& model,
                       const PipelineConfig& cfg, const std::filesystem::path* pgm_dump_dir = nullptr);

struct BenchReport {
    double xrt = 0.0;                    // processing time / signal time
    double per_window_latency_ms = 0.0;  // mean per-window compute (inference + postproc)
    // algorithmic latency breakdown
    double fir_group_delay_sec = 0.0;
    double scaling_lookahead_sec = 0.0;
    double window_span_sec = 0.0;
    double postproc_delay_sec = 0.0;  // bd_min + sd_min
    double total_latency_sec = 0.0;   // sum of the four components + per-window compute
    double peak_memory_mb = 0.0;
    double processing_sec = 0.0;
    double signal_sec = 0.0;
    struct Stages {
        double montage_sec = 0.0;
        double decimate_sec = 0.0;
        double scale_sec = 0.0;
        double window_image_sec = 0.0;
        double infer_sec = 0.0;
        double postproc_sec = 0.0;
    } stages;
};

/// Replays the pipeline over a recording with wall-clock accounting per
/// stage. Pins the process to one core where the platform allows it.
BenchReport run_bench(const RawRecording& rec, const MontageSpec& montage, const DetectorModel& model,
                      const PipelineConfig& cfg);

std::string format_bench_report(const BenchReport& r);

}  // namespace eegrt
