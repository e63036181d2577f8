#include "eegrt/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "eegrt/error.hpp"

namespace eegrt {

namespace {

constexpr double kSecPerDay = 86400.0;

void check_same_span(const EventList& ref, const EventList& hyp) {
    ref.validate();
    hyp.validate();
    if (ref.total_dur_ms != hyp.total_dur_ms)
        fail_data("reference covers " + std::to_string(ref.total_dur_ms) + " ms but hypothesis covers " +
                  std::to_string(hyp.total_dur_ms) + " ms");
    if (ref.total_dur_ms <= 0) fail_data("cannot score an empty span");
}

std::vector<Event> seizures_of(const EventList& ev) {
    std::vector<Event> out;
    for (const Event& e : ev.events)
        if (e.label == Label::seiz) out.push_back(e);
    return out;
}

std::int64_t overlap_ms(const Event& a, const Event& b) {
    return std::max<std::int64_t>(0, std::min(a.stop_ms, b.stop_ms) - std::max(a.start_ms, b.start_ms));
}

double pct_or(double num, double den, double when_undefined) {
    return den > 0 ? 100.0 * num / den : when_undefined;
}

// Majority-duration label of [a, b) under an event list; ties go to seizure.
Label slice_label(const EventList& ev, std::int64_t a, std::int64_t b) {
    std::int64_t seiz = 0;
    for (const Event& e : ev.events) {
        if (e.stop_ms <= a) continue;
        if (e.start_ms >= b) break;
        if (e.label == Label::seiz) seiz += std::min(b, e.stop_ms) - std::max(a, e.start_ms);
    }
    return 2 * seiz >= (b - a) ? Label::seiz : Label::bckg;
}

void epoch_counts(const EventList& ref, const EventList& hyp, double epoch_sec, std::int64_t counts[2][2]) {
    if (!(epoch_sec > 0)) fail_usage("epoch_sec must be positive");
    const std::int64_t epoch_ms = std::llround(epoch_sec * 1000.0);
    if (epoch_ms < 1) fail_usage("epoch_sec below 1 ms resolution");
    counts[0][0] = counts[0][1] = counts[1][0] = counts[1][1] = 0;
    for (std::int64_t a = 0; a < ref.total_dur_ms; a += epoch_ms) {
        const std::int64_t b = std::min(a + epoch_ms, ref.total_dur_ms);
        const Label r = slice_label(ref, a, b);
        const Label h = slice_label(hyp, a, b);
        ++counts[static_cast<int>(r)][static_cast<int>(h)];
    }
}

}  // namespace

ScoreReport score_ovlp(const EventList& ref, const EventList& hyp) {
    check_same_span(ref, hyp);
    const std::vector<Event> rs = seizures_of(ref);
    const std::vector<Event> hs = seizures_of(hyp);

    ScoreReport rep;
    rep.metric = Metric::ovlp;
    rep.total_dur_sec = ref.total_dur_sec();

    for (const Event& r : rs) {
        bool hit = false;
        for (const Event& h : hs)
            if (overlap_ms(r, h) > 0) { hit = true; break; }
        hit ? ++rep.tp : ++rep.fn;
    }
    for (const Event& h : hs) {
        bool hit = false;
        for (const Event& r : rs)
            if (overlap_ms(r, h) > 0) { hit = true; break; }
        if (!hit) ++rep.fp;
    }

    rep.sensitivity_pct = pct_or(static_cast<double>(rep.tp), static_cast<double>(rep.tp + rep.fn), 100.0);
    rep.fa_per_24h = static_cast<double>(rep.fp) * kSecPerDay / rep.total_dur_sec;

    // Time-based specificity: reference-background time not covered by any
    // hypothesis seizure, over total reference-background time.
    std::int64_t bckg_ms = 0;
    std::int64_t covered_ms = 0;
    for (const Event& e : ref.events) {
        if (e.label != Label::bckg) continue;
        bckg_ms += e.duration_ms();
        for (const Event& h : hs) covered_ms += overlap_ms(e, h);
    }
    rep.specificity_pct = pct_or(static_cast<double>(bckg_ms - covered_ms), static_cast<double>(bckg_ms), 100.0);
    return rep;
}

ScoreReport score_epoch(const EventList& ref, const EventList& hyp, double epoch_sec) {
    check_same_span(ref, hyp);
    std::int64_t c[2][2];
    epoch_counts(ref, hyp, epoch_sec, c);

    ScoreReport rep;
    rep.metric = Metric::epoch;
    rep.total_dur_sec = ref.total_dur_sec();
    rep.tn = c[0][0];
    rep.fp = c[0][1];
    rep.fn = c[1][0];
    rep.tp = c[1][1];
    rep.sensitivity_pct = pct_or(static_cast<double>(rep.tp), static_cast<double>(rep.tp + rep.fn), 100.0);
    rep.specificity_pct = pct_or(static_cast<double>(rep.tn), static_cast<double>(rep.tn + rep.fp), 100.0);
    rep.fa_per_24h = static_cast<double>(rep.fp) * kSecPerDay / rep.total_dur_sec;
    return rep;
}

ConfusionMatrix confusion_matrix(const EventList& ref, const EventList& hyp, double epoch_sec) {
    check_same_span(ref, hyp);
    ConfusionMatrix cm;
    epoch_counts(ref, hyp, epoch_sec, cm.counts);
    for (int r = 0; r < 2; ++r) {
        const std::int64_t row = cm.counts[r][0] + cm.counts[r][1];
        cm.row_defined[r] = row > 0;
        for (int col = 0; col < 2; ++col)
            cm.pct[r][col] = row > 0 ? 100.0 * static_cast<double>(cm.counts[r][col]) / static_cast<double>(row)
                                     : std::nan("");
    }
    return cm;
}

std::vector<SweepRow> sweep_delay(const PosteriorSequence& post, const EventList& ref, double s_th,
                                  const std::vector<std::pair<double, double>>& grid) {
    if (grid.empty()) fail_usage("sweep grid is empty");
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const auto& [bd, sd] : grid) {
        PostprocParams p{s_th, bd, sd};
        const EventList hyp = postprocess(post, p);
        const ScoreReport rep = score_ovlp(ref, hyp);
        rows.push_back({bd, sd, detection_delay_sec(p), rep.sensitivity_pct, rep.fa_per_24h});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.delay_sec < b.delay_sec; });
    return rows;
}

std::string report_csv(const std::vector<ScoreReport>& reports) {
    std::string s = "metric,sensitivity_pct,specificity_pct,fa_per_24h,tp,fp,fn,tn,total_dur_sec\n";
    char buf[256];
    for (const ScoreReport& r : reports) {
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.4f,%lld,%lld,%lld,%lld,%.3f\n",
                      r.metric == Metric::ovlp ? "ovlp" : "epoch", r.sensitivity_pct, r.specificity_pct,
                      r.fa_per_24h, static_cast<long long>(r.tp), static_cast<long long>(r.fp),
                      static_cast<long long>(r.fn), static_cast<long long>(r.tn), r.total_dur_sec);
        s += buf;
    }
    return s;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string s = "delay_sec,sensitivity_pct,fa_per_24h\n";
    char buf[128];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f\n", r.delay_sec, r.sensitivity_pct, r.fa_per_24h);
        s += buf;
    }
    return s;
}

void write_report_csv(const std::vector<ScoreReport>& reports, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_data("cannot write report file: " + path.string());
    out << report_csv(reports);
    if (!out) fail_data("write failure on: " + path.string());
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_data("cannot write sweep file: " + path.string());
    out << sweep_csv(rows);
    if (!out) fail_data("write failure on: " + path.string());
}

std::string format_confusion(const ConfusionMatrix& cm) {
    std::string s = "actual\\detected,bckg,seiz\n";
    const char* names[2] = {"bckg", "seiz"};
    char buf[128];
    for (int r = 0; r < 2; ++r) {
        if (cm.row_defined[r])
            std::snprintf(buf, sizeof buf, "%s,%.2f%%,%.2f%%\n", names[r], cm.pct[r][0], cm.pct[r][1]);
        else
            std::snprintf(buf, sizeof buf, "%s,undefined,undefined\n", names[r]);
        s += buf;
    }
    return s;
}

}  // namespace eegrt
