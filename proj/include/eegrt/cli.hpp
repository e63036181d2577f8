#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eegrt/pipeline.hpp"
#include "eegrt/train.hpp"

namespace eegrt::cli {

struct RunArgs {
    PipelineConfig config;
    std::string input_path;
    std::string out_hyp_path;
    std::optional<std::string> posteriors_out;
    std::optional<std::string> pgm_dir;
};
int cmd_run(const RunArgs& args);

struct TrainArgs {
    PipelineConfig config;
    std::string data_dir;          // recordings (*.csv / *.eegr) with sibling *.ref annotations
    std::string out_model_path;
    std::optional<std::string> log_path;
    double bckg_fraction = 0.2;    // background subsampling
    double label_overlap = 0.5;    // window labeled seiz iff >= this fraction of its span is seiz
    int train_stride_samples = 0;  // 0: one window length (non-overlapping)
    TrainOptions train;
};
int cmd_train(const TrainArgs& args);

struct ScoreArgs {
    std::string ref_path;
    std::string hyp_path;
    double epoch_sec = 1.0;
    std::optional<std::string> out_csv;  // stdout when absent
    bool print_confusion = false;
};
int cmd_score(const ScoreArgs& args);

struct SweepArgs {
    std::optional<std::string> posteriors_path;  // either a saved posterior stream...
    std::optional<std::string> input_path;       // ...or a recording run through the model
    PipelineConfig config;
    std::string ref_path;
    double s_th = 0.5;
    std::string grid;  // "bd:sd,bd:sd,..."
    std::optional<std::string> out_csv;
};
int cmd_sweep(const SweepArgs& args);

struct BenchArgs {
    PipelineConfig config;
    std::string input_path;
};
int cmd_bench(const BenchArgs& args);

struct SynthArgs {
    std::string out_base;  // writes <out_base>.eegr and <out_base>.ref
    double duration_sec = 480.0;
    int n_channels = 19;
    double rate_hz = 250.0;
    int n_seizures = 6;
    std::uint64_t seed = 1;
    bool csv = false;  // write CSV instead of raw binary
};
int cmd_synth(const SynthArgs& args);

std::vector<std::pair<double, double>> parse_grid(const std::string& grid);

}  // namespace eegrt::cli
