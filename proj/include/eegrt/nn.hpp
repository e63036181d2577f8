#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eegrt/rng.hpp"

namespace eegrt::nn {

// Dense NCHW tensor of doubles. Double precision keeps finite-difference
// gradient checks meaningful.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), v(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

    std::size_t size() const { return v.size(); }
    std::size_t plane() const { return static_cast<std::size_t>(h) * w; }

    double* chan(int ni, int ci) { return v.data() + (static_cast<std::size_t>(ni) * c + ci) * plane(); }
    const double* chan(int ni, int ci) const { return v.data() + (static_cast<std::size_t>(ni) * c + ci) * plane(); }

    double& at(int ni, int ci, int y, int x) { return chan(ni, ci)[static_cast<std::size_t>(y) * w + x]; }
    double at(int ni, int ci, int y, int x) const { return chan(ni, ci)[static_cast<std::size_t>(y) * w + x]; }

    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
    void add(const Tensor& o);
};

// Named view of one trainable tensor (or running statistic).
struct ParamRef {
    std::string name;
    std::vector<double>* value;
    std::vector<double>* grad;  // null for non-trainable state
};

using ParamVisitor = std::function<void(const ParamRef&)>;

class Conv2d {
public:
    Conv2d() = default;
    Conv2d(int in_c, int out_c, int kernel, int stride, int pad, bool bias);

    void init(Rng& rng);  // He-normal, fan-in scaled
    Tensor forward(const Tensor& x, bool training);
    Tensor eval_forward(const Tensor& x) const;
    Tensor backward(const Tensor& gy);  // consumes the cached input

    int out_dim(int in) const { return (in + 2 * pad_ - kernel_) / stride_ + 1; }
    void visit_params(const std::string& prefix, const ParamVisitor& fn);
    void zero_grad();

    std::vector<double> weight;  // [out_c][in_c][k][k]
    std::vector<double> bias;
    std::vector<double> grad_weight;
    std::vector<double> grad_bias;

    int in_c() const { return in_c_; }
    int out_c() const { return out_c_; }

private:
    Tensor run(const Tensor& x) const;
    int in_c_ = 0, out_c_ = 0, kernel_ = 0, stride_ = 1, pad_ = 0;
    bool has_bias_ = false;
    Tensor cached_x_;
};

class BatchNorm2d {
public:
    BatchNorm2d() = default;
    explicit BatchNorm2d(int channels, double momentum = 0.1, double eps = 1e-5);

    Tensor forward(const Tensor& x, bool update_running);  // batch statistics
    Tensor eval_forward(const Tensor& x) const;            // running statistics
    Tensor backward(const Tensor& gy);

    void visit_params(const std::string& prefix, const ParamVisitor& fn);
    void visit_state(const std::string& prefix, const ParamVisitor& fn);
    void zero_grad();

    std::vector<double> gamma, beta, running_mean, running_var;
    std::vector<double> grad_gamma, grad_beta;

private:
    int channels_ = 0;
    double momentum_ = 0.1;
    double eps_ = 1e-5;
    Tensor xhat_;
    std::vector<double> inv_std_;
};

class MaxPool2d {
public:
    MaxPool2d() = default;
    MaxPool2d(int kernel, int stride, int pad);

    Tensor forward(const Tensor& x, bool training);
    Tensor eval_forward(const Tensor& x) const;
    Tensor backward(const Tensor& gy);

    int out_dim(int in) const { return (in + 2 * pad_ - kernel_) / stride_ + 1; }

private:
    Tensor run(const Tensor& x, std::vector<std::int32_t>* argmax) const;
    int kernel_ = 0, stride_ = 1, pad_ = 0;
    std::vector<std::int32_t> argmax_;
    int in_h_ = 0, in_w_ = 0, in_c_ = 0, in_n_ = 0;
};

class Linear {
public:
    Linear() = default;
    Linear(int in_features, int out_features);

    void init(Rng& rng);
    Tensor forward(const Tensor& x, bool training);  // x as [N, in, 1, 1]
    Tensor eval_forward(const Tensor& x) const;
    Tensor backward(const Tensor& gy);

    void visit_params(const std::string& prefix, const ParamVisitor& fn);
    void zero_grad();

    std::vector<double> weight;  // [out][in]
    std::vector<double> bias;
    std::vector<double> grad_weight, grad_bias;

private:
    Tensor run(const Tensor& x) const;
    int in_ = 0, out_ = 0;
    Tensor cached_x_;
};

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& gy, const Tensor& y);  // y = forward output
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& gy, int h, int w);

}  // namespace eegrt::nn
