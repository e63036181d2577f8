#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "eegrt/mini_resnet.hpp"

namespace eegrt {

struct TrainOptions {
    int epochs = 25;
    int batch_size = 8;
    double lr0 = 0.01;          // step-decay schedule: lr0 * lr_decay^(epoch / lr_step_epochs)
    double lr_decay = 0.1;
    int lr_step_epochs = 10;
    double momentum = 0.9;
    bool augment = true;
    double crop_scale_min = 0.8;  // random-resized-crop area fraction
    double crop_scale_max = 1.0;
    double flip_prob = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double mean_weighted_loss = 0.0;
    double train_accuracy_pct = 0.0;
};

/// Plain SGD with momentum and a step-decayed learning rate; per-epoch
/// shuffling, random horizontal flip and random-resized-crop augmentation.
/// Deterministic for fixed seeds. Aborts with a diagnostic if the loss stops
/// being finite. Zero epochs leaves the model parameter-identical.
std::vector<EpochStats> train(MiniResNet& model, const std::vector<LabeledImage>& data,
                              const ClassWeights& weights, const TrainOptions& opt = {});

void write_training_log(const std::vector<EpochStats>& stats, const std::filesystem::path& path);

/// Augmentation primitive, exposed for tests: crops a random sub-rectangle
/// (area fraction in [scale_min, scale_max], aspect in [3/4, 4/3]) and
/// resizes it back to the source size; then flips horizontally with
/// probability flip_prob.
GrayscaleImage augment_image(const GrayscaleImage& img, Rng& rng, const TrainOptions& opt);

}  // namespace eegrt
