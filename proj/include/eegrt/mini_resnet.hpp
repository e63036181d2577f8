#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "eegrt/detector.hpp"
#include "eegrt/nn.hpp"

namespace eegrt {

// Width/depth-reduced residual classifier with the standard block grammar:
// input block (conv -> batch-norm -> max-pool), four stages of residual
// blocks, global average pooling and a linear head. Stage 1 is two identity
// blocks; stages 2-4 are identity block -> strided projection block ->
// identity block.
struct MiniResNetConfig {
    int input_size = 256;
    int stem_channels = 8;
    std::array<int, 4> layer_widths{8, 12, 16, 24};
    int num_classes = 2;
    std::uint64_t seed = 1;

    void validate() const;
    bool operator==(const MiniResNetConfig&) const = default;
};

// Two 3x3 convolutions with batch norm; shortcut is the identity, or a
// 1x1 strided projection when the block changes width/resolution.
struct ResidualBlock {
    ResidualBlock() = default;
    ResidualBlock(int in_c, int out_c, int stride);

    nn::Tensor forward(const nn::Tensor& x, bool update_running);
    nn::Tensor backward(const nn::Tensor& gy);
    nn::Tensor eval_forward(const nn::Tensor& x) const;
    nn::Tensor shortcut_eval(const nn::Tensor& x) const;

    void init(Rng& rng);
    void visit_params(const std::string& prefix, const nn::ParamVisitor& fn);
    void visit_state(const std::string& prefix, const nn::ParamVisitor& fn);
    void zero_grad();
    void zero_main_convs();  // zeroes c1/c2 weights, leaves the shortcut alone

    nn::Conv2d c1, c2;
    nn::BatchNorm2d b1, b2;
    bool has_proj = false;
    nn::Conv2d proj;
    nn::BatchNorm2d proj_bn;

private:
    nn::Tensor r1_, y_;  // relu outputs cached for backward
};

class MiniResNet final : public DetectorModel {
public:
    explicit MiniResNet(const MiniResNetConfig& cfg);

    std::pair<double, double> predict(const GrayscaleImage& img) const override;
    std::vector<std::pair<double, double>> predict_batch(
        const std::vector<GrayscaleImage>& batch) const override;

    // Training interface. Loss is mean per-sample weighted cross-entropy.
    double forward_backward(const nn::Tensor& x, const std::vector<Label>& y, const ClassWeights& w,
                            int* correct = nullptr);
    double forward_loss(const nn::Tensor& x, const std::vector<Label>& y, const ClassWeights& w,
                        bool update_running);
    void zero_grads();

    /// Trainable tensors in serialization order.
    void for_each_param(const nn::ParamVisitor& fn);
    /// Trainable tensors plus batch-norm running statistics, serialization order.
    void for_each_state(const nn::ParamVisitor& fn);

    const MiniResNetConfig& config() const { return cfg_; }
    std::size_t parameter_count();

    // structural introspection
    std::size_t block_count() const { return blocks_.size(); }
    ResidualBlock& block(std::size_t i) { return blocks_[i]; }
    std::array<int, 3> block_input_shape(std::size_t i) const;  // {c, h, w} at config input size
    nn::Tensor block_eval(std::size_t i, const nn::Tensor& x) const { return blocks_[i].eval_forward(x); }
    nn::Tensor block_shortcut(std::size_t i, const nn::Tensor& x) const { return blocks_[i].shortcut_eval(x); }

    nn::Linear& head() { return fc_; }

    nn::Tensor eval_logits(const nn::Tensor& x) const;

private:
    nn::Tensor train_forward(const nn::Tensor& x, bool update_running);
    nn::Tensor train_backward(const nn::Tensor& dlogits);

    MiniResNetConfig cfg_;
    nn::Conv2d stem_conv_;
    nn::BatchNorm2d stem_bn_;
    nn::MaxPool2d stem_pool_;
    std::vector<ResidualBlock> blocks_;
    nn::Linear fc_;

    nn::Tensor stem_relu_;  // cache
    int gap_h_ = 0, gap_w_ = 0;
};

std::unique_ptr<MiniResNet> build_mini_resnet(const MiniResNetConfig& cfg);

/// Converts images (pixel/255) to an [N, 1, S, S] tensor; every image must be
/// S x S with S = input_size.
nn::Tensor images_to_tensor(const std::vector<const GrayscaleImage*>& batch, int input_size);

// Flat binary model exchange: MRSN magic, config block, then every tensor
// from for_each_state as little-endian f32 in order.
void save_model(MiniResNet& model, const std::filesystem::path& path);
std::unique_ptr<MiniResNet> load_model(const std::filesystem::path& path);

struct SoftmaxLoss {
    double loss = 0.0;
    nn::Tensor dlogits;
    std::vector<int> predicted;                       // argmax class per sample
    std::vector<std::pair<double, double>> probs;     // (p_bckg, p_seiz)
};

SoftmaxLoss weighted_softmax_loss(const nn::Tensor& logits, const std::vector<Label>& y,
                                  const ClassWeights& w);

}  // namespace eegrt
