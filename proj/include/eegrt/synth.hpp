#pragma once

#include <cstdint>

#include "eegrt/postproc.hpp"
#include "eegrt/signal_io.hpp"

namespace eegrt {

// Seeded generator for self-contained demos and end-to-end tests:
// background is 1/f-shaped filtered noise; seizures are amplitude-modulated
// ~3 Hz sinusoidal bursts across channels with per-channel onset jitter.
struct SynthParams {
    double duration_sec = 480.0;
    int n_channels = 19;  // first 19 use standard 10-20 electrode names
    double rate_hz = 250.0;
    int n_seizures = 6;
    double seiz_min_sec = 15.0;
    double seiz_max_sec = 30.0;
    double min_gap_sec = 25.0;   // background between bursts and at both ends
    double background_uv = 30.0; // background RMS
    double seiz_amp_uv = 160.0;  // burst amplitude
    double seiz_freq_hz = 3.0;
    double onset_jitter_sec = 0.4;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthResult {
    RawRecording recording;
    EventList reference;
};

SynthResult generate_synthetic(const SynthParams& params);

/// The 19 standard 10-20 electrode names used by the shipped montage.
const std::vector<std::string>& standard_channel_names();

}  // namespace eegrt
