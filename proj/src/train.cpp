#include "eegrt/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "eegrt/error.hpp"

namespace eegrt {

void TrainOptions::validate() const {
    if (epochs < 0) fail_usage("epochs must be >= 0");
    if (batch_size < 1) fail_usage("batch_size must be >= 1");
    if (!(lr0 > 0) || !(lr_decay > 0) || lr_step_epochs < 1) fail_usage("bad learning-rate schedule");
    if (momentum < 0 || momentum >= 1) fail_usage("momentum must be in [0, 1)");
    if (!(crop_scale_min > 0) || crop_scale_min > crop_scale_max || crop_scale_max > 1.0)
        fail_usage("crop scale range must satisfy 0 < min <= max <= 1");
    if (flip_prob < 0 || flip_prob > 1) fail_usage("flip_prob must be in [0, 1]");
}

namespace {

GrayscaleImage crop(const GrayscaleImage& img, int y0, int x0, int ch, int cw) {
    GrayscaleImage out;
    out.height = ch;
    out.width = cw;
    out.start_sec = img.start_sec;
    out.pixels.resize(static_cast<std::size_t>(ch) * cw);
    for (int y = 0; y < ch; ++y)
        std::copy_n(img.pixels.data() + static_cast<std::size_t>(y0 + y) * img.width + x0, cw,
                    out.pixels.data() + static_cast<std::size_t>(y) * cw);
    return out;
}

void flip_horizontal(GrayscaleImage& img) {
    for (int y = 0; y < img.height; ++y) {
        std::uint8_t* row = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        std::reverse(row, row + img.width);
    }
}

}  // namespace

GrayscaleImage augment_image(const GrayscaleImage& img, Rng& rng, const TrainOptions& opt) {
    const double area = rng.uniform(opt.crop_scale_min, opt.crop_scale_max) *
                        static_cast<double>(img.height) * img.width;
    const double aspect = std::exp(rng.uniform(std::log(0.75), std::log(4.0 / 3.0)));
    int cw = static_cast<int>(std::lround(std::sqrt(area * aspect)));
    int ch = static_cast<int>(std::lround(std::sqrt(area / aspect)));
    cw = std::clamp(cw, 2, img.width);
    ch = std::clamp(ch, 2, img.height);
    const int y0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.height - ch + 1)));
    const int x0 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(img.width - cw + 1)));
    GrayscaleImage out = resize_bicubic(crop(img, y0, x0, ch, cw), img.height, img.width);
    if (rng.uniform() < opt.flip_prob) flip_horizontal(out);
    return out;
}

std::vector<EpochStats> train(MiniResNet& model, const std::vector<LabeledImage>& data,
                              const ClassWeights& weights, const TrainOptions& opt) {
    opt.validate();
    if (data.empty()) fail_data("train: empty dataset");
    const TrainSetStats stats = count_labels(data);
    if (stats.n_seiz == 0 || stats.n_bckg == 0)
        std::cerr << "warning: training data contains a single class (" << stats.n_seiz << " seiz, "
                  << stats.n_bckg << " bckg)\n";

    const int input_size = model.config().input_size;

    // momentum buffers, aligned with parameter visitation order
    std::vector<std::vector<double>> velocity;
    model.for_each_param([&velocity](const nn::ParamRef& p) {
        velocity.emplace_back(p.value->size(), 0.0);
    });

    Rng rng(opt.seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<EpochStats> log;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        const double lr = opt.lr0 * std::pow(opt.lr_decay, epoch / opt.lr_step_epochs);
        rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t correct_sum = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch_size)) {
            const std::size_t take = std::min<std::size_t>(opt.batch_size, order.size() - start);

            std::vector<GrayscaleImage> augmented;
            std::vector<const GrayscaleImage*> ptrs;
            std::vector<Label> labels;
            augmented.reserve(take);
            ptrs.reserve(take);
            labels.reserve(take);
            for (std::size_t i = 0; i < take; ++i) {
                const LabeledImage& s = data[order[start + i]];
                if (opt.augment) {
                    augmented.push_back(augment_image(s.image, rng, opt));
                    ptrs.push_back(&augmented.back());
                } else {
                    ptrs.push_back(&s.image);
                }
                labels.push_back(s.label);
            }

            const nn::Tensor x = images_to_tensor(ptrs, input_size);
            model.zero_grads();
            int correct = 0;
            const double loss = model.forward_backward(x, labels, weights, &correct);
            if (!std::isfinite(loss))
                fail_internal("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                              ", batch " + std::to_string(start / opt.batch_size));
            loss_sum += loss * static_cast<double>(take);
            correct_sum += static_cast<std::size_t>(correct);

            std::size_t vi = 0;
            model.for_each_param([&](const nn::ParamRef& p) {
                std::vector<double>& v = velocity[vi++];
                for (std::size_t k = 0; k < p.value->size(); ++k) {
                    v[k] = opt.momentum * v[k] + (*p.grad)[k];
                    (*p.value)[k] -= lr * v[k];
                }
            });
        }

        log.push_back({epoch, loss_sum / static_cast<double>(data.size()),
                       100.0 * static_cast<double>(correct_sum) / static_cast<double>(data.size())});
    }
    return log;
}

void write_training_log(const std::vector<EpochStats>& stats, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_data("cannot write training log: " + path.string());
    out << "epoch,mean_weighted_loss,train_accuracy_pct\n";
    char buf[96];
    for (const auto& s : stats) {
        std::snprintf(buf, sizeof buf, "%d,%.9f,%.4f\n", s.epoch, s.mean_weighted_loss, s.train_accuracy_pct);
        out << buf;
    }
    if (!out) fail_data("write failure on: " + path.string());
}

}  // namespace eegrt
