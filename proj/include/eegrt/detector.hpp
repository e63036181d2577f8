#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "eegrt/label.hpp"
#include "eegrt/posterior.hpp"
#include "eegrt/windowing.hpp"

namespace eegrt {

struct TrainSetStats {
    std::int64_t n_total = 0;
    std::int64_t n_seiz = 0;
    std::int64_t n_bckg = 0;

    static TrainSetStats from_counts(std::int64_t n_seiz, std::int64_t n_bckg) {
        return {n_seiz + n_bckg, n_seiz, n_bckg};
    }
    void validate() const;
};

struct ClassWeights {
    double w_bckg = 0.5;
    double w_seiz = 0.5;
};

/// Cross-assigned priors: the background weight is the seizure share of the
/// training set and vice versa, so the rarer class weighs more.
///   w_bckg = n_seiz / n_total,  w_seiz = n_bckg / n_total
ClassWeights class_weights(const TrainSetStats& stats);

// How the per-sample weighted loss combines the two class terms.
// true_class: weight of the true label times -log p(true label) — the default.
// two_term:   w_bckg * -log p(bckg) + w_seiz * -log p(seiz) regardless of the
//             label; kept selectable for side-by-side study.
enum class LossForm { true_class, two_term };

double weighted_loss(double p_bckg, double p_seiz, Label truth, const ClassWeights& w,
                     LossForm form = LossForm::true_class);

struct LabeledImage {
    GrayscaleImage image;
    Label label = Label::bckg;
};

TrainSetStats count_labels(const std::vector<LabeledImage>& data);

/// Keeps every seizure sample and exactly round(fraction * n_bckg) background
/// samples chosen uniformly without replacement; original order preserved;
/// deterministic for a fixed seed.
std::vector<LabeledImage> subsample_background(const std::vector<LabeledImage>& data, double fraction,
                                               std::uint64_t seed);

// Behavioral contract of a per-window classifier. Implementations must be
// immutable once built so a single model can serve concurrent callers.
class DetectorModel {
public:
    virtual ~DetectorModel() = default;

    /// Returns (p_bckg, p_seiz), summing to 1.
    virtual std::pair<double, double> predict(const GrayscaleImage& img) const = 0;

    virtual std::vector<std::pair<double, double>> predict_batch(
        const std::vector<GrayscaleImage>& batch) const;
};

/// One posterior per window, in order, no augmentation. Windows are grouped
/// into batches of batch_size for predict_batch.
PosteriorSequence infer_stream(const DetectorModel& model, const std::vector<GrayscaleImage>& windows,
                               double stride_sec, int batch_size = 8);

}  // namespace eegrt
