#include "eegrt/mini_resnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "eegrt/error.hpp"

namespace eegrt {

using nn::Tensor;

void MiniResNetConfig::validate() const {
    if (input_size < 16) fail_usage("input_size must be at least 16");
    if (stem_channels <= 0) fail_usage("stem_channels must be positive");
    for (int w : layer_widths)
        if (w <= 0) fail_usage("layer widths must be positive");
    if (stem_channels != layer_widths[0])
        fail_usage("stem_channels must equal layer_widths[0] (stage 1 uses identity shortcuts)");
    if (num_classes != 2) fail_usage("num_classes must be 2");
}

ResidualBlock::ResidualBlock(int in_c, int out_c, int stride)
    : c1(in_c, out_c, 3, stride, 1, false),
      c2(out_c, out_c, 3, 1, 1, false),
      b1(out_c),
      b2(out_c),
      has_proj(in_c != out_c || stride != 1) {
    if (has_proj) {
        proj = nn::Conv2d(in_c, out_c, 1, stride, 0, false);
        proj_bn = nn::BatchNorm2d(out_c);
    }
}

void ResidualBlock::init(Rng& rng) {
    c1.init(rng);
    c2.init(rng);
    if (has_proj) proj.init(rng);
}

Tensor ResidualBlock::forward(const Tensor& x, bool update_running) {
    Tensor t = b1.forward(c1.forward(x, true), update_running);
    r1_ = nn::relu(t);
    t = b2.forward(c2.forward(r1_, true), update_running);
    Tensor s = has_proj ? proj_bn.forward(proj.forward(x, true), update_running) : x;
    t.add(s);
    y_ = nn::relu(t);
    return y_;
}

Tensor ResidualBlock::backward(const Tensor& gy) {
    Tensor g = nn::relu_backward(gy, y_);
    Tensor gx_short = has_proj ? proj.backward(proj_bn.backward(g)) : g;
    Tensor g1 = nn::relu_backward(c2.backward(b2.backward(g)), r1_);
    Tensor gx = c1.backward(b1.backward(g1));
    gx.add(gx_short);
    r1_ = Tensor();
    y_ = Tensor();
    return gx;
}

Tensor ResidualBlock::eval_forward(const Tensor& x) const {
    Tensor t = nn::relu(b1.eval_forward(c1.eval_forward(x)));
    t = b2.eval_forward(c2.eval_forward(t));
    Tensor s = has_proj ? proj_bn.eval_forward(proj.eval_forward(x)) : x;
    t.add(s);
    return nn::relu(t);
}

Tensor ResidualBlock::shortcut_eval(const Tensor& x) const {
    return has_proj ? proj_bn.eval_forward(proj.eval_forward(x)) : x;
}

void ResidualBlock::visit_params(const std::string& prefix, const nn::ParamVisitor& fn) {
    c1.visit_params(prefix + ".c1", fn);
    b1.visit_params(prefix + ".b1", fn);
    c2.visit_params(prefix + ".c2", fn);
    b2.visit_params(prefix + ".b2", fn);
    if (has_proj) {
        proj.visit_params(prefix + ".proj", fn);
        proj_bn.visit_params(prefix + ".proj_bn", fn);
    }
}

void ResidualBlock::visit_state(const std::string& prefix, const nn::ParamVisitor& fn) {
    c1.visit_params(prefix + ".c1", fn);
    b1.visit_state(prefix + ".b1", fn);
    c2.visit_params(prefix + ".c2", fn);
    b2.visit_state(prefix + ".b2", fn);
    if (has_proj) {
        proj.visit_params(prefix + ".proj", fn);
        proj_bn.visit_state(prefix + ".proj_bn", fn);
    }
}

void ResidualBlock::zero_grad() {
    c1.zero_grad();
    c2.zero_grad();
    b1.zero_grad();
    b2.zero_grad();
    if (has_proj) {
        proj.zero_grad();
        proj_bn.zero_grad();
    }
}

void ResidualBlock::zero_main_convs() {
    std::fill(c1.weight.begin(), c1.weight.end(), 0.0);
    std::fill(c2.weight.begin(), c2.weight.end(), 0.0);
}

MiniResNet::MiniResNet(const MiniResNetConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    stem_conv_ = nn::Conv2d(1, cfg.stem_channels, 3, 2, 1, false);
    stem_bn_ = nn::BatchNorm2d(cfg.stem_channels);
    stem_pool_ = nn::MaxPool2d(3, 2, 1);

    // stage 1: two identity blocks; stages 2-4: identity, strided projection
    // to the next width, identity.
    const auto& w = cfg.layer_widths;
    blocks_.emplace_back(w[0], w[0], 1);
    blocks_.emplace_back(w[0], w[0], 1);
    for (int s = 1; s < 4; ++s) {
        blocks_.emplace_back(w[s - 1], w[s - 1], 1);
        blocks_.emplace_back(w[s - 1], w[s], 2);
        blocks_.emplace_back(w[s], w[s], 1);
    }
    fc_ = nn::Linear(w[3], cfg.num_classes);

    Rng rng(cfg.seed);
    stem_conv_.init(rng);
    for (auto& b : blocks_) b.init(rng);
    fc_.init(rng);
}

std::array<int, 3> MiniResNet::block_input_shape(std::size_t i) const {
    int h = stem_pool_.out_dim(stem_conv_.out_dim(cfg_.input_size));
    int c = cfg_.stem_channels;
    for (std::size_t k = 0; k < i; ++k) {
        const auto& b = blocks_[k];
        if (b.has_proj) {
            h = (h + 2 - 3) / 2 + 1;  // 3x3 stride-2 pad-1
            c = b.c1.out_c();
        }
    }
    return {c, h, h};
}

Tensor MiniResNet::eval_logits(const Tensor& x) const {
    Tensor t = nn::relu(stem_bn_.eval_forward(stem_conv_.eval_forward(x)));
    t = stem_pool_.eval_forward(t);
    for (const auto& b : blocks_) t = b.eval_forward(t);
    t = nn::global_avg_pool(t);
    return fc_.eval_forward(t);
}

Tensor MiniResNet::train_forward(const Tensor& x, bool update_running) {
    Tensor t = stem_bn_.forward(stem_conv_.forward(x, true), update_running);
    stem_relu_ = nn::relu(t);
    t = stem_pool_.forward(stem_relu_, true);
    for (auto& b : blocks_) t = b.forward(t, update_running);
    gap_h_ = t.h;
    gap_w_ = t.w;
    t = nn::global_avg_pool(t);
    return fc_.forward(t, true);
}

Tensor MiniResNet::train_backward(const Tensor& dlogits) {
    Tensor g = fc_.backward(dlogits);
    g = nn::global_avg_pool_backward(g, gap_h_, gap_w_);
    for (std::size_t i = blocks_.size(); i-- > 0;) g = blocks_[i].backward(g);
    g = stem_pool_.backward(g);
    g = nn::relu_backward(g, stem_relu_);
    g = stem_conv_.backward(stem_bn_.backward(g));
    stem_relu_ = Tensor();
    return g;
}

SoftmaxLoss weighted_softmax_loss(const Tensor& logits, const std::vector<Label>& y,
                                  const ClassWeights& w) {
    if (logits.c != 2 || logits.n != static_cast<int>(y.size()))
        fail_internal("softmax loss shape mismatch");
    SoftmaxLoss res;
    res.dlogits = Tensor(logits.n, logits.c, 1, 1);
    res.predicted.resize(y.size());
    res.probs.resize(y.size());
    const double inv_n = 1.0 / static_cast<double>(logits.n);
    constexpr double eps = 1e-12;
    double total = 0.0;
    for (int n = 0; n < logits.n; ++n) {
        const double l0 = logits.v[static_cast<std::size_t>(n) * 2];
        const double l1 = logits.v[static_cast<std::size_t>(n) * 2 + 1];
        const double m = std::max(l0, l1);
        const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
        const double z = e0 + e1;
        const double p0 = e0 / z, p1 = e1 / z;
        res.probs[n] = {p0, p1};
        res.predicted[n] = p1 > p0 ? 1 : 0;
        const bool seiz = y[n] == Label::seiz;
        const double w_true = seiz ? w.w_seiz : w.w_bckg;
        const double p_true = seiz ? p1 : p0;
        total += w_true * -std::log(std::max(p_true, eps));
        res.dlogits.v[static_cast<std::size_t>(n) * 2] = w_true * (p0 - (seiz ? 0.0 : 1.0)) * inv_n;
        res.dlogits.v[static_cast<std::size_t>(n) * 2 + 1] = w_true * (p1 - (seiz ? 1.0 : 0.0)) * inv_n;
    }
    res.loss = total * inv_n;
    return res;
}

double MiniResNet::forward_backward(const Tensor& x, const std::vector<Label>& y, const ClassWeights& w,
                                    int* correct) {
    const Tensor logits = train_forward(x, true);
    SoftmaxLoss sl = weighted_softmax_loss(logits, y, w);
    if (correct) {
        int c = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (sl.predicted[i] == (y[i] == Label::seiz ? 1 : 0)) ++c;
        *correct = c;
    }
    train_backward(sl.dlogits);
    return sl.loss;
}

double MiniResNet::forward_loss(const Tensor& x, const std::vector<Label>& y, const ClassWeights& w,
                                bool update_running) {
    const Tensor logits = train_forward(x, update_running);
    // caches are left populated; callers doing pure evaluations discard them
    return weighted_softmax_loss(logits, y, w).loss;
}

void MiniResNet::zero_grads() {
    stem_conv_.zero_grad();
    stem_bn_.zero_grad();
    for (auto& b : blocks_) b.zero_grad();
    fc_.zero_grad();
}

void MiniResNet::for_each_param(const nn::ParamVisitor& fn) {
    stem_conv_.visit_params("stem.conv", fn);
    stem_bn_.visit_params("stem.bn", fn);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        blocks_[i].visit_params("block" + std::to_string(i), fn);
    fc_.visit_params("fc", fn);
}

void MiniResNet::for_each_state(const nn::ParamVisitor& fn) {
    stem_conv_.visit_params("stem.conv", fn);
    stem_bn_.visit_state("stem.bn", fn);
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        blocks_[i].visit_state("block" + std::to_string(i), fn);
    fc_.visit_params("fc", fn);
}

std::size_t MiniResNet::parameter_count() {
    std::size_t n = 0;
    for_each_param([&n](const nn::ParamRef& p) { n += p.value->size(); });
    return n;
}

nn::Tensor images_to_tensor(const std::vector<const GrayscaleImage*>& batch, int input_size) {
    if (batch.empty()) fail_internal("empty image batch");
    Tensor x(static_cast<int>(batch.size()), 1, input_size, input_size);
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const GrayscaleImage& img = *batch[n];
        if (img.height != input_size || img.width != input_size)
            fail_data("detector expects " + std::to_string(input_size) + "x" + std::to_string(input_size) +
                      " images, got " + std::to_string(img.height) + "x" + std::to_string(img.width));
        double* dst = x.chan(static_cast<int>(n), 0);
        for (std::size_t i = 0; i < img.pixels.size(); ++i) dst[i] = img.pixels[i] / 255.0;
    }
    return x;
}

std::pair<double, double> MiniResNet::predict(const GrayscaleImage& img) const {
    const Tensor x = images_to_tensor({&img}, cfg_.input_size);
    const Tensor logits = eval_logits(x);
    const double m = std::max(logits.v[0], logits.v[1]);
    const double e0 = std::exp(logits.v[0] - m), e1 = std::exp(logits.v[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

std::vector<std::pair<double, double>> MiniResNet::predict_batch(
    const std::vector<GrayscaleImage>& batch) const {
    if (batch.empty()) return {};
    std::vector<const GrayscaleImage*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& img : batch) ptrs.push_back(&img);
    const Tensor logits = eval_logits(images_to_tensor(ptrs, cfg_.input_size));
    std::vector<std::pair<double, double>> out(batch.size());
    for (int n = 0; n < logits.n; ++n) {
        const double l0 = logits.v[static_cast<std::size_t>(n) * 2];
        const double l1 = logits.v[static_cast<std::size_t>(n) * 2 + 1];
        const double m = std::max(l0, l1);
        const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
        out[n] = {e0 / (e0 + e1), e1 / (e0 + e1)};
    }
    return out;
}

std::unique_ptr<MiniResNet> build_mini_resnet(const MiniResNetConfig& cfg) {
    return std::make_unique<MiniResNet>(cfg);
}

namespace {

constexpr char kModelMagic[4] = {'M', 'R', 'S', 'N'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& what) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) fail_data("model file truncated while reading " + what);
    return v;
}

}  // namespace

void save_model(MiniResNet& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_data("cannot write model file: " + path.string());
    const MiniResNetConfig& cfg = model.config();
    out.write(kModelMagic, 4);
    put<std::uint32_t>(out, kModelVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.input_size));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.stem_channels));
    for (int w : cfg.layer_widths) put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.num_classes));
    put<std::uint64_t>(out, cfg.seed);

    std::uint64_t count = 0;
    model.for_each_state([&count](const nn::ParamRef& p) { count += p.value->size(); });
    put<std::uint64_t>(out, count);
    model.for_each_state([&out](const nn::ParamRef& p) {
        for (double v : *p.value) put<float>(out, static_cast<float>(v));
    });
    if (!out) fail_data("write failure on: " + path.string());
}

std::unique_ptr<MiniResNet> load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_data("cannot open model file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
        fail_data(path.filename().string() + ": not a model file (bad magic)");
    const auto version = get<std::uint32_t>(in, "version");
    if (version != kModelVersion)
        fail_data(path.filename().string() + ": unsupported model version " + std::to_string(version));

    MiniResNetConfig cfg;
    cfg.input_size = static_cast<int>(get<std::uint32_t>(in, "input_size"));
    cfg.stem_channels = static_cast<int>(get<std::uint32_t>(in, "stem_channels"));
    for (int i = 0; i < 4; ++i) cfg.layer_widths[i] = static_cast<int>(get<std::uint32_t>(in, "layer width"));
    cfg.num_classes = static_cast<int>(get<std::uint32_t>(in, "num_classes"));
    cfg.seed = get<std::uint64_t>(in, "seed");

    auto model = std::make_unique<MiniResNet>(cfg);
    const auto expected = get<std::uint64_t>(in, "parameter count");
    std::uint64_t actual = 0;
    model->for_each_state([&actual](const nn::ParamRef& p) { actual += p.value->size(); });
    if (expected != actual)
        fail_data(path.filename().string() + ": parameter count mismatch (file " + std::to_string(expected) +
                  ", architecture " + std::to_string(actual) + ")");
    model->for_each_state([&in, &path](const nn::ParamRef& p) {
        for (double& v : *p.value) v = static_cast<double>(get<float>(in, path.filename().string() + " parameters"));
    });
    return model;
}

}  // namespace eegrt
