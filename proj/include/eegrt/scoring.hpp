#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "eegrt/postproc.hpp"

namespace eegrt {

enum class Metric { ovlp, epoch };

struct ScoreReport {
    Metric metric = Metric::ovlp;
    double sensitivity_pct = 0.0;
    double specificity_pct = 0.0;
    double fa_per_24h = 0.0;
    // Event counts for OVLP (tn unused there), epoch counts for EPOCH.
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    double total_dur_sec = 0.0;
};

/// Any-overlap event scoring: a reference seizure is detected if any
/// hypothesis seizure intersects it with positive length; a hypothesis
/// seizure intersecting no reference seizure is a false alarm. Specificity is
/// the fraction of reference-background time left free of hypothesis seizure.
ScoreReport score_ovlp(const EventList& ref, const EventList& hyp);

/// Per-epoch scoring: time is cut into consecutive epoch_sec slices (final
/// partial slice included), each labeled by majority duration (ties resolve
/// to seizure), and the two labelings are cross-tabulated.
ScoreReport score_epoch(const EventList& ref, const EventList& hyp, double epoch_sec = 1.0);

struct ConfusionMatrix {
    // rows: actual {bckg, seiz}; cols: detected {bckg, seiz}
    std::int64_t counts[2][2] = {{0, 0}, {0, 0}};
    double pct[2][2] = {{0, 0}, {0, 0}};  // row-normalized percentages
    bool row_defined[2] = {false, false};
};

ConfusionMatrix confusion_matrix(const EventList& ref, const EventList& hyp, double epoch_sec = 1.0);

struct SweepRow {
    double bd_min_sec = 0.0;
    double sd_min_sec = 0.0;
    double delay_sec = 0.0;
    double sensitivity_pct = 0.0;
    double fa_per_24h = 0.0;
};

/// For each (bd_min, sd_min) grid point: postprocess with the given s_th,
/// score with OVLP, and report (delay, sensitivity, FA/24h) sorted by delay.
std::vector<SweepRow> sweep_delay(const PosteriorSequence& post, const EventList& ref, double s_th,
                                  const std::vector<std::pair<double, double>>& grid);

std::string report_csv(const std::vector<ScoreReport>& reports);
std::string sweep_csv(const std::vector<SweepRow>& rows);
void write_report_csv(const std::vector<ScoreReport>& reports, const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::string format_confusion(const ConfusionMatrix& cm);

}  // namespace eegrt
