#include "eegrt/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "eegrt/error.hpp"

namespace eegrt {

namespace {

std::int64_t to_ms(double sec) { return std::llround(sec * 1000.0); }

std::int64_t conf_units(double p) { return std::llround(p * 1e6); }

}  // namespace

void PosteriorSequence::validate() const {
    if (!(stride_sec > 0)) fail_data("posterior stride must be positive");
    const std::int64_t stride_ms = to_ms(stride_sec);
    if (stride_ms < 1) fail_data("posterior stride below 1 ms resolution");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.p_seiz < 0.0 || e.p_seiz > 1.0)
            fail_data("posterior probability " + std::to_string(e.p_seiz) + " outside [0, 1]");
        if (i > 0) {
            const std::int64_t dt = to_ms(e.start_sec) - to_ms(entries[i - 1].start_sec);
            if (dt != stride_ms)
                fail_data("posterior stream is not uniformly strided: step of " + std::to_string(dt) +
                          " ms at entry " + std::to_string(i) + ", expected " + std::to_string(stride_ms) + " ms");
        }
    }
}

PosteriorSequence PosteriorSequence::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open posterior file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("stride_sec=", 0) != 0)
        fail_data(path.filename().string() + ": missing stride_sec= header");
    PosteriorSequence ps;
    try {
        ps.stride_sec = std::stod(line.substr(11));
    } catch (const std::exception&) {
        fail_data(path.filename().string() + ": bad stride_sec header");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double s, p;
        if (std::sscanf(line.c_str(), "%lf,%lf", &s, &p) != 2)
            fail_data(path.filename().string() + ":" + std::to_string(lineno) + ": expected 'start_sec,p_seiz'");
        ps.entries.push_back({s, p});
    }
    ps.validate();
    return ps;
}

void PosteriorSequence::save(const std::filesystem::path& path) const {
    validate();
    std::ofstream out(path);
    if (!out) fail_data("cannot write posterior file: " + path.string());
    char buf[64];
    std::snprintf(buf, sizeof buf, "stride_sec=%.4f\n", stride_sec);
    out << buf;
    for (const auto& e : entries) {
        std::snprintf(buf, sizeof buf, "%.4f,%.9f\n", e.start_sec, e.p_seiz);
        out << buf;
    }
    if (!out) fail_data("write failure on: " + path.string());
}

void PostprocParams::validate() const {
    if (s_th < 0.0 || s_th > 1.0) fail_usage("s_th must be in [0, 1]");
    if (bd_min_sec < 0.0) fail_usage("bd_min_sec must be >= 0");
    if (sd_min_sec < 0.0) fail_usage("sd_min_sec must be >= 0");
}

double detection_delay_sec(const PostprocParams& p) {
    p.validate();
    return p.bd_min_sec + p.sd_min_sec;
}

Event make_event(double start_sec, double stop_sec, Label label, double confidence) {
    Event e;
    e.start_ms = to_ms(start_sec);
    e.stop_ms = to_ms(stop_sec);
    e.label = label;
    e.conf_integral = conf_units(confidence) * e.duration_ms();
    return e;
}

void EventList::validate() const {
    if (events.empty()) {
        if (total_dur_ms != 0) fail_data("empty event list with nonzero duration");
        return;
    }
    if (events.front().start_ms != 0) fail_data("event list must start at 0");
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (e.start_ms >= e.stop_ms) fail_data("event with non-positive duration");
        if (i > 0) {
            if (e.start_ms != events[i - 1].stop_ms) fail_data("event list has a gap or overlap");
            if (e.label == events[i - 1].label) fail_data("adjacent events share a label (runs not maximal)");
        }
    }
    if (events.back().stop_ms != total_dur_ms) fail_data("event list does not cover its stated duration");
}

EventList normalize_events(std::vector<Event> events, std::int64_t total_dur_ms) {
    EventList out;
    out.total_dur_ms = total_dur_ms;
    for (const Event& e : events) {
        if (!out.events.empty() && out.events.back().label == e.label &&
            out.events.back().stop_ms == e.start_ms) {
            out.events.back().stop_ms = e.stop_ms;
            out.events.back().conf_integral += e.conf_integral;
        } else {
            out.events.push_back(e);
        }
    }
    out.validate();
    return out;
}

std::int64_t seizure_overlap_ms(const EventList& ev, std::int64_t a_ms, std::int64_t b_ms) {
    std::int64_t total = 0;
    for (const Event& e : ev.events) {
        if (e.stop_ms <= a_ms) continue;
        if (e.start_ms >= b_ms) break;
        if (e.label == Label::seiz)
            total += std::min(b_ms, e.stop_ms) - std::max(a_ms, e.start_ms);
    }
    return total;
}

void EventList::save(const std::filesystem::path& path) const {
    validate();
    std::ofstream out(path);
    if (!out) fail_data("cannot write annotation file: " + path.string());
    out << "version=1\n";
    char buf[128];
    for (const Event& e : events) {
        std::snprintf(buf, sizeof buf, "%.4f\t%.4f\t%s\t%.4f\n", e.start_sec(), e.stop_sec(),
                      label_name(e.label), e.confidence());
        out << buf;
    }
    if (!out) fail_data("write failure on: " + path.string());
}

EventList EventList::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open annotation file: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("version=", 0) != 0)
        fail_data(path.filename().string() + ": missing version= header");
    std::vector<Event> events;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double start, stop, conf;
        char label[16];
        if (std::sscanf(line.c_str(), "%lf\t%lf\t%15s\t%lf", &start, &stop, label, &conf) != 4)
            fail_data(path.filename().string() + ":" + std::to_string(lineno) +
                      ": expected 'start<TAB>stop<TAB>label<TAB>confidence'");
        if (conf < 0.0 || conf > 1.0)
            fail_data(path.filename().string() + ":" + std::to_string(lineno) + ": confidence outside [0, 1]");
        events.push_back(make_event(start, stop, parse_label(label), conf));
    }
    const std::int64_t total = events.empty() ? 0 : events.back().stop_ms;
    return normalize_events(std::move(events), total);
}

EventList threshold(const PosteriorSequence& post, double s_th) {
    if (s_th < 0.0 || s_th > 1.0) fail_usage("s_th must be in [0, 1]");
    post.validate();
    const std::int64_t stride_ms = to_ms(post.stride_sec);
    std::vector<Event> events;
    std::int64_t total = 0;
    if (!post.entries.empty()) {
        const std::int64_t first = to_ms(post.entries.front().start_sec);
        if (first < 0) fail_data("posterior stream starts before 0");
        if (first > 0) events.push_back({0, first, Label::bckg, 0});
        for (const auto& e : post.entries) {
            const std::int64_t t0 = to_ms(e.start_sec);
            const Label l = e.p_seiz >= s_th ? Label::seiz : Label::bckg;
            events.push_back({t0, t0 + stride_ms, l, conf_units(e.p_seiz) * stride_ms});
        }
        total = events.back().stop_ms;
    }
    return normalize_events(std::move(events), total);
}

EventList fill_background_gaps(const EventList& ev, double bd_min_sec) {
    if (bd_min_sec < 0.0) fail_usage("bd_min_sec must be >= 0");
    ev.validate();
    const std::int64_t bd_ms = to_ms(bd_min_sec);
    std::vector<Event> events = ev.events;
    const std::size_t n = events.size();
    for (std::size_t i = 0; i < n; ++i) {
        // Alternation makes any interior background neighbor two seizures.
        if (events[i].label == Label::bckg && i > 0 && i + 1 < n && events[i].duration_ms() < bd_ms)
            events[i].label = Label::seiz;
    }
    return normalize_events(std::move(events), ev.total_dur_ms);
}

EventList remove_short_seizures(const EventList& ev, double sd_min_sec) {
    if (sd_min_sec < 0.0) fail_usage("sd_min_sec must be >= 0");
    ev.validate();
    const std::int64_t sd_ms = to_ms(sd_min_sec);
    std::vector<Event> events = ev.events;
    for (Event& e : events)
        if (e.label == Label::seiz && e.duration_ms() < sd_ms) e.label = Label::bckg;
    return normalize_events(std::move(events), ev.total_dur_ms);
}

EventList postprocess(const PosteriorSequence& post, const PostprocParams& p) {
    p.validate();
    return remove_short_seizures(fill_background_gaps(threshold(post, p.s_th), p.bd_min_sec), p.sd_min_sec);
}

void EventAccumulator::add(const SpanEmission& s) {
    if (s.t0_ms != cursor_ms_) fail_internal("emission not contiguous with previous spans");
    if (s.t1_ms <= s.t0_ms) fail_internal("empty emission span");
    if (!events_.empty() && events_.back().label == s.label) {
        events_.back().stop_ms = s.t1_ms;
        events_.back().conf_integral += s.conf_integral;
    } else {
        events_.push_back({s.t0_ms, s.t1_ms, s.label, s.conf_integral});
    }
    cursor_ms_ = s.t1_ms;
}

void EventAccumulator::add(const std::vector<SpanEmission>& spans) {
    for (const auto& s : spans) add(s);
}

EventList EventAccumulator::take() {
    EventList out;
    out.events = std::move(events_);
    out.total_dur_ms = cursor_ms_;
    events_.clear();
    cursor_ms_ = 0;
    out.validate();
    return out;
}

StreamingPostprocessor::StreamingPostprocessor(const PostprocParams& p, double stride_sec)
    : s_th_(p.s_th), bd_ms_(to_ms(p.bd_min_sec)), sd_ms_(to_ms(p.sd_min_sec)), stride_ms_(to_ms(stride_sec)) {
    p.validate();
    if (stride_ms_ < 1) fail_usage("stream stride below 1 ms resolution");
}

void StreamingPostprocessor::maybe_survive(std::vector<SpanEmission>& out) {
    if (!chain_survived_ && chain_last_seiz_end_ms_ - chain_start_ms_ >= sd_ms_) {
        chain_survived_ = true;
        out.push_back({chain_start_ms_, chain_last_seiz_end_ms_, Label::seiz, chain_conf_});
        chain_conf_ = 0;
    }
}

void StreamingPostprocessor::close_chain(std::vector<SpanEmission>& out) {
    // The pending gap reached bd_min (or the stream ended): it stays
    // background, and the chain's fate is settled by its span.
    if (!chain_survived_)
        out.push_back({chain_start_ms_, chain_last_seiz_end_ms_, Label::bckg, chain_conf_});
    if (gap_len_ms_ > 0)
        out.push_back({chain_last_seiz_end_ms_, chain_last_seiz_end_ms_ + gap_len_ms_, Label::bckg, gap_conf_});
    chain_open_ = false;
    chain_survived_ = false;
    chain_conf_ = 0;
    gap_len_ms_ = 0;
    gap_conf_ = 0;
}

std::vector<SpanEmission> StreamingPostprocessor::push(double start_sec, double p_seiz) {
    if (finished_) fail_usage("push after finish");
    if (p_seiz < 0.0 || p_seiz > 1.0) fail_data("posterior probability outside [0, 1]");
    const std::int64_t start_ms = to_ms(start_sec);
    std::vector<SpanEmission> out;
    if (!started_) {
        if (start_ms < 0) fail_data("posterior stream starts before 0");
        started_ = true;
        if (start_ms > 0) out.push_back({0, start_ms, Label::bckg, 0});
    } else if (start_ms != next_start_ms_) {
        fail_data("out-of-order posterior: got start " + std::to_string(start_ms) + " ms, expected " +
                  std::to_string(next_start_ms_) + " ms");
    }
    next_start_ms_ = start_ms + stride_ms_;

    const std::int64_t conf = conf_units(p_seiz) * stride_ms_;
    const std::int64_t w_end = start_ms + stride_ms_;

    if (p_seiz >= s_th_) {
        if (!chain_open_) {
            chain_open_ = true;
            chain_survived_ = false;
            chain_start_ms_ = start_ms;
            chain_last_seiz_end_ms_ = w_end;
            chain_conf_ = conf;
        } else {
            // Any pending gap just got bounded by a seizure while still
            // shorter than bd_min, so it fills.
            if (chain_survived_) {
                out.push_back({chain_last_seiz_end_ms_, w_end, Label::seiz, gap_conf_ + conf});
            } else {
                chain_conf_ += gap_conf_ + conf;
            }
            gap_len_ms_ = 0;
            gap_conf_ = 0;
            chain_last_seiz_end_ms_ = w_end;
        }
        maybe_survive(out);
    } else {
        if (!chain_open_) {
            out.push_back({start_ms, w_end, Label::bckg, conf});
        } else {
            gap_len_ms_ += stride_ms_;
            gap_conf_ += conf;
            if (gap_len_ms_ >= bd_ms_) close_chain(out);
        }
    }
    return out;
}

std::vector<SpanEmission> StreamingPostprocessor::finish() {
    if (finished_) fail_usage("finish called twice");
    finished_ = true;
    std::vector<SpanEmission> out;
    if (chain_open_) close_chain(out);  // trailing gap stays background; short chain erodes
    return out;
}

}  // namespace eegrt
