#include "eegrt/detector.hpp"

#include <algorithm>
#include <cmath>

#include "eegrt/error.hpp"
#include "eegrt/rng.hpp"

namespace eegrt {

void TrainSetStats::validate() const {
    if (n_seiz < 0 || n_bckg < 0) fail_data("negative class counts");
    if (n_total != n_seiz + n_bckg) fail_data("n_total must equal n_seiz + n_bckg");
}

ClassWeights class_weights(const TrainSetStats& stats) {
    stats.validate();
    if (stats.n_total <= 0) fail_data("class_weights: empty training set");
    const double n = static_cast<double>(stats.n_total);
    return {static_cast<double>(stats.n_seiz) / n, static_cast<double>(stats.n_bckg) / n};
}

double weighted_loss(double p_bckg, double p_seiz, Label truth, const ClassWeights& w, LossForm form) {
    if (p_bckg < 0.0 || p_bckg > 1.0 || p_seiz < 0.0 || p_seiz > 1.0)
        fail_data("weighted_loss: probabilities outside [0, 1]");
    constexpr double eps = 1e-12;
    if (form == LossForm::two_term)
        return w.w_bckg * -std::log(std::max(p_bckg, eps)) + w.w_seiz * -std::log(std::max(p_seiz, eps));
    const double p_true = truth == Label::seiz ? p_seiz : p_bckg;
    const double w_true = truth == Label::seiz ? w.w_seiz : w.w_bckg;
    return w_true * -std::log(std::max(p_true, eps));
}

TrainSetStats count_labels(const std::vector<LabeledImage>& data) {
    std::int64_t seiz = 0;
    for (const auto& s : data)
        if (s.label == Label::seiz) ++seiz;
    return TrainSetStats::from_counts(seiz, static_cast<std::int64_t>(data.size()) - seiz);
}

std::vector<LabeledImage> subsample_background(const std::vector<LabeledImage>& data, double fraction,
                                               std::uint64_t seed) {
    if (data.empty()) fail_data("subsample_background: empty dataset");
    if (!(fraction > 0.0) || fraction > 1.0) fail_usage("subsample fraction must be in (0, 1]");

    std::vector<std::size_t> bckg_idx;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data[i].label == Label::bckg) bckg_idx.push_back(i);

    const std::size_t keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(bckg_idx.size())));
    std::vector<bool> selected(data.size(), false);
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data[i].label == Label::seiz) selected[i] = true;

    // partial Fisher-Yates: the first `keep` slots are a uniform sample
    Rng rng(seed);
    for (std::size_t i = 0; i < keep && i < bckg_idx.size(); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(bckg_idx.size() - i));
        std::swap(bckg_idx[i], bckg_idx[j]);
        selected[bckg_idx[i]] = true;
    }

    std::vector<LabeledImage> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        if (selected[i]) out.push_back(data[i]);
    return out;
}

std::vector<std::pair<double, double>> DetectorModel::predict_batch(
    const std::vector<GrayscaleImage>& batch) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(batch.size());
    for (const auto& img : batch) out.push_back(predict(img));
    return out;
}

PosteriorSequence infer_stream(const DetectorModel& model, const std::vector<GrayscaleImage>& windows,
                               double stride_sec, int batch_size) {
    if (batch_size < 1) fail_usage("batch_size must be >= 1");
    for (std::size_t i = 1; i < windows.size(); ++i)
        if (!(windows[i].start_sec > windows[i - 1].start_sec))
            fail_data("windows not ordered by start time");

    PosteriorSequence ps;
    ps.stride_sec = stride_sec;
    ps.entries.reserve(windows.size());
    std::vector<GrayscaleImage> batch;
    std::size_t done = 0;
    while (done < windows.size()) {
        const std::size_t take = std::min<std::size_t>(batch_size, windows.size() - done);
        batch.assign(windows.begin() + done, windows.begin() + done + take);
        const auto probs = model.predict_batch(batch);
        for (std::size_t i = 0; i < take; ++i)
            ps.entries.push_back({windows[done + i].start_sec, probs[i].second});
        done += take;
    }
    ps.validate();
    return ps;
}

}  // namespace eegrt
