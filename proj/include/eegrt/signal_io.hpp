#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace eegrt {

struct Channel {
    std::string name;
    std::vector<double> samples;  // microvolts
};

// Multichannel recording as read from disk. Rectangular: every channel has
// the same sample count.
struct RawRecording {
    std::vector<Channel> channels;
    double sample_rate_hz = 0.0;

    std::size_t sample_count() const { return channels.empty() ? 0 : channels.front().samples.size(); }
    double duration_sec() const { return sample_rate_hz > 0 ? static_cast<double>(sample_count()) / sample_rate_hz : 0.0; }
    const Channel* find_channel(const std::string& name) const;
    void validate() const;
};

enum class RecordingFormat { csv, raw_binary };

/// Loads a recording; format is sniffed from the file when not forced
/// (binary files start with the EEGR magic).
RawRecording load_recording(const std::filesystem::path& path, RecordingFormat format);
RawRecording load_recording(const std::filesystem::path& path);

void save_recording_csv(const RawRecording& rec, const std::filesystem::path& path);
void save_recording_raw(const RawRecording& rec, const std::filesystem::path& path);

struct MontagePair {
    std::string anode;
    std::string cathode;
};

// Differential channel definition, loaded from a text file with one
// ANODE,CATHODE pair per line ('#' starts a comment).
struct MontageSpec {
    std::string name;
    std::vector<MontagePair> pairs;

    void validate() const;
    static MontageSpec load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

struct MontagedChannel {
    std::string label;  // "anode-cathode"
    std::vector<double> samples;
};

struct MontagedRecording {
    std::vector<MontagedChannel> channels;
    double sample_rate_hz = 0.0;

    std::size_t sample_count() const { return channels.empty() ? 0 : channels.front().samples.size(); }
    double duration_sec() const { return sample_rate_hz > 0 ? static_cast<double>(sample_count()) / sample_rate_hz : 0.0; }
};

/// Output channel i is anode_i - cathode_i, per sample.
MontagedRecording apply_montage(const RawRecording& rec, const MontageSpec& spec);

struct DecimateResult {
    MontagedRecording recording;
    double group_delay_sec = 0.0;  // of the anti-aliasing filter, in input-time seconds
    int filter_taps = 0;
};

/// Low-pass filters (causal windowed-sinc FIR, cutoff at the new Nyquist)
/// and keeps every factor-th sample. The source rate must be an integer
/// multiple of target_hz.
DecimateResult decimate(const MontagedRecording& rec, double target_hz);

// Filter design internals, exposed for direct inspection in tests.
// Hamming-windowed sinc; odd tap count; unity DC gain.
std::vector<double> design_lowpass_fir(double fs_hz, double pass_hz, double stop_hz);
std::vector<double> fir_filter_causal(const std::vector<double>& taps, const std::vector<double>& x);

}  // namespace eegrt
