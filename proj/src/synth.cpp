#include "eegrt/synth.hpp"

#include <cmath>

#include "eegrt/error.hpp"
#include "eegrt/rng.hpp"

namespace eegrt {

const std::vector<std::string>& standard_channel_names() {
    static const std::vector<std::string> names = {
        "FP1", "FP2", "F3", "F4", "C3", "C4", "P3", "P4", "O1", "O2",
        "F7", "F8", "T3", "T4", "T5", "T6", "FZ", "CZ", "PZ"};
    return names;
}

void SynthParams::validate() const {
    if (!(duration_sec > 0) || !(rate_hz > 0) || n_channels < 1) fail_usage("bad synthetic dimensions");
    if (n_seizures < 0 || !(seiz_min_sec > 0) || seiz_max_sec < seiz_min_sec) fail_usage("bad burst durations");
    if (min_gap_sec < 0 || onset_jitter_sec < 0) fail_usage("bad gap/jitter");
    const double needed = n_seizures * seiz_max_sec + (n_seizures + 1) * min_gap_sec;
    if (needed > duration_sec)
        fail_usage("synthetic recording too short for " + std::to_string(n_seizures) + " bursts (needs >= " +
                   std::to_string(needed) + " s)");
}

namespace {

// Paul Kellet's economy pink-noise filter; output roughly 1/f down to ~10 Hz.
class PinkNoise {
public:
    explicit PinkNoise(Rng& rng) : rng_(rng) {}

    double next() {
        const double white = rng_.normal();
        b0_ = 0.99886 * b0_ + white * 0.0555179;
        b1_ = 0.99332 * b1_ + white * 0.0750759;
        b2_ = 0.96900 * b2_ + white * 0.1538520;
        b3_ = 0.86650 * b3_ + white * 0.3104856;
        b4_ = 0.55000 * b4_ + white * 0.5329522;
        b5_ = -0.7616 * b5_ - white * 0.0168980;
        const double pink = b0_ + b1_ + b2_ + b3_ + b4_ + b5_ + b6_ + white * 0.5362;
        b6_ = white * 0.115926;
        return pink * 0.11;  // roughly unit RMS
    }

private:
    Rng& rng_;
    double b0_ = 0, b1_ = 0, b2_ = 0, b3_ = 0, b4_ = 0, b5_ = 0, b6_ = 0;
};

double ramp_envelope(double t, double start, double stop, double ramp) {
    if (t < start || t >= stop) return 0.0;
    const double up = (t - start) / ramp;
    const double down = (stop - t) / ramp;
    double env = 1.0;
    if (up < 1.0) env = 0.5 - 0.5 * std::cos(M_PI * up);
    if (down < 1.0) env = std::min(env, 0.5 - 0.5 * std::cos(M_PI * down));
    return env;
}

}  // namespace

SynthResult generate_synthetic(const SynthParams& params) {
    params.validate();
    Rng rng(params.seed);

    // Place bursts left to right; leftover slack is split randomly across gaps.
    std::vector<double> durations(params.n_seizures);
    double used = 0.0;
    for (double& d : durations) {
        d = rng.uniform(params.seiz_min_sec, params.seiz_max_sec);
        used += d;
    }
    double slack = params.duration_sec - used - (params.n_seizures + 1) * params.min_gap_sec;
    if (slack < 0) fail_usage("synthetic recording too short for requested bursts");

    std::vector<std::pair<double, double>> bursts;  // [onset, offset)
    double cursor = 0.0;
    for (int i = 0; i < params.n_seizures; ++i) {
        const double extra = (i + 1 < params.n_seizures) ? rng.uniform(0.0, slack / params.n_seizures) : 0.0;
        cursor += params.min_gap_sec + extra;
        bursts.emplace_back(cursor, cursor + durations[i]);
        cursor += durations[i];
    }

    const std::size_t n_samples = static_cast<std::size_t>(std::llround(params.duration_sec * params.rate_hz));

    SynthResult res;
    res.recording.sample_rate_hz = params.rate_hz;
    res.recording.channels.resize(params.n_channels);
    const auto& names = standard_channel_names();
    for (int c = 0; c < params.n_channels; ++c) {
        res.recording.channels[c].name =
            c < static_cast<int>(names.size()) ? names[c] : "X" + std::to_string(c - static_cast<int>(names.size()) + 1);
        res.recording.channels[c].samples.resize(n_samples);
    }

    // per-channel burst shaping
    struct ChannelBurst {
        double start, stop, amp, phase;
    };
    std::vector<std::vector<ChannelBurst>> shapes(params.n_channels);
    for (int c = 0; c < params.n_channels; ++c) {
        shapes[c].reserve(bursts.size());
        for (const auto& [on, off] : bursts) {
            ChannelBurst cb;
            cb.start = on + rng.uniform(0.0, params.onset_jitter_sec);
            cb.stop = off - rng.uniform(0.0, params.onset_jitter_sec);
            cb.amp = params.seiz_amp_uv * rng.uniform(0.7, 1.3);
            cb.phase = rng.uniform(0.0, 2.0 * M_PI);
            shapes[c].push_back(cb);
        }
    }

    for (int c = 0; c < params.n_channels; ++c) {
        PinkNoise pink(rng);
        std::vector<double>& s = res.recording.channels[c].samples;
        for (std::size_t i = 0; i < n_samples; ++i) s[i] = params.background_uv * pink.next();
        for (const ChannelBurst& cb : shapes[c]) {
            const std::size_t i0 = static_cast<std::size_t>(std::llround(cb.start * params.rate_hz));
            const std::size_t i1 = std::min(n_samples, static_cast<std::size_t>(std::llround(cb.stop * params.rate_hz)));
            for (std::size_t i = i0; i < i1; ++i) {
                const double t = static_cast<double>(i) / params.rate_hz;
                const double env = ramp_envelope(t, cb.start, cb.stop, 1.0);
                s[i] += cb.amp * env * std::sin(2.0 * M_PI * params.seiz_freq_hz * t + cb.phase);
            }
        }
    }

    // reference annotation over the nominal burst intervals
    std::vector<Event> events;
    double prev = 0.0;
    for (const auto& [on, off] : bursts) {
        if (on > prev) events.push_back(make_event(prev, on, Label::bckg, 0.0));
        events.push_back(make_event(on, off, Label::seiz, 1.0));
        prev = off;
    }
    if (prev < params.duration_sec) events.push_back(make_event(prev, params.duration_sec, Label::bckg, 0.0));
    res.reference = normalize_events(std::move(events), std::llround(params.duration_sec * 1000.0));
    return res;
}

}  // namespace eegrt
