#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "eegrt/label.hpp"
#include "eegrt/posterior.hpp"

namespace eegrt {

struct PostprocParams {
    double s_th = 0.5;        // seizure confidence threshold
    double bd_min_sec = 0.0;  // background gaps shorter than this are filled
    double sd_min_sec = 0.0;  // seizure events shorter than this are removed

    void validate() const;
};

/// Intrinsic decision lag of the morphology: bd_min + sd_min.
double detection_delay_sec(const PostprocParams& p);

// Half-open [start, stop) interval at 1 ms internal resolution. Confidence is
// kept as an exact integer integral (sum over constituent windows of
// round(p * 1e6) * duration_ms) so that merges are order-independent and the
// streaming path reproduces the offline path bit for bit.
struct Event {
    std::int64_t start_ms = 0;
    std::int64_t stop_ms = 0;
    Label label = Label::bckg;
    std::int64_t conf_integral = 0;

    std::int64_t duration_ms() const { return stop_ms - start_ms; }
    double start_sec() const { return static_cast<double>(start_ms) / 1000.0; }
    double stop_sec() const { return static_cast<double>(stop_ms) / 1000.0; }
    double duration_sec() const { return static_cast<double>(duration_ms()) / 1000.0; }
    double confidence() const {
        return duration_ms() > 0 ? static_cast<double>(conf_integral) / (1e6 * static_cast<double>(duration_ms())) : 0.0;
    }

    bool operator==(const Event&) const = default;
};

Event make_event(double start_sec, double stop_sec, Label label, double confidence);

// Contiguous labeling of [0, total_dur): sorted, non-overlapping, adjacent
// events carry different labels.
struct EventList {
    std::vector<Event> events;
    std::int64_t total_dur_ms = 0;

    double total_dur_sec() const { return static_cast<double>(total_dur_ms) / 1000.0; }
    void validate() const;

    /// One line per event: start<TAB>stop<TAB>label<TAB>confidence, 4-decimal
    /// fixed point, preceded by a version= header.
    void save(const std::filesystem::path& path) const;
    static EventList load(const std::filesystem::path& path);

    bool operator==(const EventList&) const = default;
};

/// Builds an EventList from events that may contain adjacent same-label
/// entries; merges them (confidence integrals add).
EventList normalize_events(std::vector<Event> events, std::int64_t total_dur_ms);

/// Total seizure-labeled time intersecting [a_ms, b_ms).
std::int64_t seizure_overlap_ms(const EventList& ev, std::int64_t a_ms, std::int64_t b_ms);

/// Window labeled seiz iff p_seiz >= s_th; each window covers one stride;
/// maximal same-label runs become events. A stream starting after 0 gets a
/// leading zero-confidence background event so the list tiles from 0.
EventList threshold(const PosteriorSequence& post, double s_th);

/// Background events strictly between two seizure events and shorter than
/// bd_min_sec become seizure (then runs merge). Leading/trailing background
/// is never relabeled. Single pass over the input snapshot.
EventList fill_background_gaps(const EventList& ev, double bd_min_sec);

/// Seizure events shorter than sd_min_sec become background (then runs
/// merge). Single pass over the input snapshot.
EventList remove_short_seizures(const EventList& ev, double sd_min_sec);

/// threshold -> fill_background_gaps -> remove_short_seizures, in that order.
EventList postprocess(const PosteriorSequence& post, const PostprocParams& p);

// A finalized, never-retracted slice of the output labeling.
struct SpanEmission {
    std::int64_t t0_ms = 0;
    std::int64_t t1_ms = 0;
    Label label = Label::bckg;
    std::int64_t conf_integral = 0;
};

/// Folds emissions (contiguous from 0) back into an EventList.
class EventAccumulator {
public:
    void add(const SpanEmission& s);
    void add(const std::vector<SpanEmission>& spans);
    EventList take();

private:
    std::vector<Event> events_;
    std::int64_t cursor_ms_ = 0;
};

// Causal postprocessor. Feed posteriors in time order; emitted spans are
// final. The concatenated emissions equal postprocess() on the same stream,
// and any sample is finalized within bd_min + sd_min + one stride of the
// window that covers it.
class StreamingPostprocessor {
public:
    StreamingPostprocessor(const PostprocParams& p, double stride_sec);

    std::vector<SpanEmission> push(double start_sec, double p_seiz);
    std::vector<SpanEmission> finish();

private:
    void maybe_survive(std::vector<SpanEmission>& out);
    void close_chain(std::vector<SpanEmission>& out);

    double s_th_;
    std::int64_t bd_ms_, sd_ms_, stride_ms_;

    bool started_ = false;
    bool finished_ = false;
    std::int64_t next_start_ms_ = 0;

    // A "chain" is a run of seizure windows glued by gaps that kept filling.
    bool chain_open_ = false;
    bool chain_survived_ = false;  // span reached sd_min: final label is seizure
    std::int64_t chain_start_ms_ = 0;
    std::int64_t chain_last_seiz_end_ms_ = 0;
    std::int64_t chain_conf_ = 0;  // buffered while the chain's fate is open
    std::int64_t gap_len_ms_ = 0;  // background accumulated since last seizure window
    std::int64_t gap_conf_ = 0;
};

}  // namespace eegrt
