#include "eegrt/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eegrt/error.hpp"

namespace eegrt::nn {

void Tensor::add(const Tensor& o) {
    if (!same_shape(o)) fail_internal("tensor shape mismatch in add");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
}

namespace {

// Valid output range [o0, o1] such that 0 <= o*stride + k - pad < in_dim.
// Empty ranges come out as o1 < o0.
inline void out_range(int in_dim, int out_dim, int stride, int pad, int k, int& o0, int& o1) {
    const int off = k - pad;
    o0 = off >= 0 ? 0 : (-off + stride - 1) / stride;
    const int num = in_dim - 1 - off;
    o1 = num < 0 ? -1 : std::min(out_dim - 1, num / stride);
}

}  // namespace

Conv2d::Conv2d(int in_c, int out_c, int kernel, int stride, int pad, bool bias)
    : in_c_(in_c), out_c_(out_c), kernel_(kernel), stride_(stride), pad_(pad), has_bias_(bias) {
    if (in_c <= 0 || out_c <= 0 || kernel <= 0 || stride <= 0 || pad < 0)
        fail_usage("invalid convolution shape");
    weight.assign(static_cast<std::size_t>(out_c) * in_c * kernel * kernel, 0.0);
    grad_weight.assign(weight.size(), 0.0);
    if (bias) {
        this->bias.assign(out_c, 0.0);
        grad_bias.assign(out_c, 0.0);
    }
}

void Conv2d::init(Rng& rng) {
    const double std = std::sqrt(2.0 / (static_cast<double>(in_c_) * kernel_ * kernel_));
    for (double& w : weight) w = std * rng.normal();
    std::fill(bias.begin(), bias.end(), 0.0);
}

Tensor Conv2d::run(const Tensor& x) const {
    if (x.c != in_c_) fail_internal("conv input channel mismatch");
    const int ho = out_dim(x.h), wo = out_dim(x.w);
    if (ho <= 0 || wo <= 0) fail_internal("conv output collapses to zero size");
    Tensor y(x.n, out_c_, ho, wo);
    for (int n = 0; n < x.n; ++n) {
        for (int oc = 0; oc < out_c_; ++oc) {
            double* ych = y.chan(n, oc);
            if (has_bias_) {
                const double b = bias[oc];
                for (std::size_t i = 0; i < y.plane(); ++i) ych[i] = b;
            }
            for (int ic = 0; ic < in_c_; ++ic) {
                const double* xch = x.chan(n, ic);
                const double* wk = weight.data() + ((static_cast<std::size_t>(oc) * in_c_ + ic) * kernel_) * kernel_;
                for (int ky = 0; ky < kernel_; ++ky) {
                    int oy0, oy1;
                    out_range(x.h, ho, stride_, pad_, ky, oy0, oy1);
                    for (int kx = 0; kx < kernel_; ++kx) {
                        const double wv = wk[ky * kernel_ + kx];
                        if (wv == 0.0) continue;
                        int ox0, ox1;
                        out_range(x.w, wo, stride_, pad_, kx, ox0, ox1);
                        for (int oy = oy0; oy <= oy1; ++oy) {
                            const double* xrow = xch + static_cast<std::size_t>(oy * stride_ + ky - pad_) * x.w;
                            double* yrow = ych + static_cast<std::size_t>(oy) * wo;
                            if (stride_ == 1) {
                                const double* xp = xrow + (kx - pad_);
                                for (int ox = ox0; ox <= ox1; ++ox) yrow[ox] += wv * xp[ox];
                            } else {
                                for (int ox = ox0; ox <= ox1; ++ox)
                                    yrow[ox] += wv * xrow[ox * stride_ + kx - pad_];
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

Tensor Conv2d::forward(const Tensor& x, bool training) {
    if (training) cached_x_ = x;
    return run(x);
}

Tensor Conv2d::eval_forward(const Tensor& x) const { return run(x); }

Tensor Conv2d::backward(const Tensor& gy) {
    const Tensor& x = cached_x_;
    if (x.size() == 0) fail_internal("conv backward without cached forward");
    Tensor gx(x.n, x.c, x.h, x.w);
    const int ho = gy.h, wo = gy.w;
    for (int n = 0; n < x.n; ++n) {
        for (int oc = 0; oc < out_c_; ++oc) {
            const double* gch = gy.chan(n, oc);
            if (has_bias_) {
                double s = 0.0;
                for (std::size_t i = 0; i < gy.plane(); ++i) s += gch[i];
                grad_bias[oc] += s;
            }
            for (int ic = 0; ic < in_c_; ++ic) {
                const double* xch = x.chan(n, ic);
                double* gxch = gx.chan(n, ic);
                const std::size_t wbase = (static_cast<std::size_t>(oc) * in_c_ + ic) * kernel_ * kernel_;
                for (int ky = 0; ky < kernel_; ++ky) {
                    int oy0, oy1;
                    out_range(x.h, ho, stride_, pad_, ky, oy0, oy1);
                    for (int kx = 0; kx < kernel_; ++kx) {
                        int ox0, ox1;
                        out_range(x.w, wo, stride_, pad_, kx, ox0, ox1);
                        const double wv = weight[wbase + static_cast<std::size_t>(ky) * kernel_ + kx];
                        double gw = 0.0;
                        for (int oy = oy0; oy <= oy1; ++oy) {
                            const int iy = oy * stride_ + ky - pad_;
                            const double* xrow = xch + static_cast<std::size_t>(iy) * x.w;
                            double* gxrow = gxch + static_cast<std::size_t>(iy) * x.w;
                            const double* grow = gch + static_cast<std::size_t>(oy) * wo;
                            if (stride_ == 1) {
                                const int shift = kx - pad_;
                                for (int ox = ox0; ox <= ox1; ++ox) {
                                    const double g = grow[ox];
                                    gw += g * xrow[ox + shift];
                                    gxrow[ox + shift] += wv * g;
                                }
                            } else {
                                for (int ox = ox0; ox <= ox1; ++ox) {
                                    const int ix = ox * stride_ + kx - pad_;
                                    const double g = grow[ox];
                                    gw += g * xrow[ix];
                                    gxrow[ix] += wv * g;
                                }
                            }
                        }
                        grad_weight[wbase + static_cast<std::size_t>(ky) * kernel_ + kx] += gw;
                    }
                }
            }
        }
    }
    cached_x_ = Tensor();
    return gx;
}

void Conv2d::visit_params(const std::string& prefix, const ParamVisitor& fn) {
    fn({prefix + ".weight", &weight, &grad_weight});
    if (has_bias_) fn({prefix + ".bias", &bias, &grad_bias});
}

void Conv2d::zero_grad() {
    std::fill(grad_weight.begin(), grad_weight.end(), 0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

BatchNorm2d::BatchNorm2d(int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
    gamma.assign(channels, 1.0);
    beta.assign(channels, 0.0);
    running_mean.assign(channels, 0.0);
    running_var.assign(channels, 1.0);
    grad_gamma.assign(channels, 0.0);
    grad_beta.assign(channels, 0.0);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool update_running) {
    if (x.c != channels_) fail_internal("batchnorm channel mismatch");
    Tensor y(x.n, x.c, x.h, x.w);
    xhat_ = Tensor(x.n, x.c, x.h, x.w);
    inv_std_.assign(channels_, 0.0);
    const std::size_t plane = x.plane();
    const double m = static_cast<double>(x.n) * static_cast<double>(plane);
    for (int c = 0; c < channels_; ++c) {
        double mean = 0.0;
        for (int n = 0; n < x.n; ++n) {
            const double* p = x.chan(n, c);
            for (std::size_t i = 0; i < plane; ++i) mean += p[i];
        }
        mean /= m;
        double var = 0.0;
        for (int n = 0; n < x.n; ++n) {
            const double* p = x.chan(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                const double d = p[i] - mean;
                var += d * d;
            }
        }
        var /= m;
        const double istd = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = istd;
        const double g = gamma[c], b = beta[c];
        for (int n = 0; n < x.n; ++n) {
            const double* p = x.chan(n, c);
            double* xh = xhat_.chan(n, c);
            double* yp = y.chan(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                xh[i] = (p[i] - mean) * istd;
                yp[i] = g * xh[i] + b;
            }
        }
        if (update_running) {
            running_mean[c] = (1.0 - momentum_) * running_mean[c] + momentum_ * mean;
            running_var[c] = (1.0 - momentum_) * running_var[c] + momentum_ * var;
        }
    }
    return y;
}

Tensor BatchNorm2d::eval_forward(const Tensor& x) const {
    if (x.c != channels_) fail_internal("batchnorm channel mismatch");
    Tensor y(x.n, x.c, x.h, x.w);
    const std::size_t plane = x.plane();
    for (int c = 0; c < channels_; ++c) {
        const double istd = 1.0 / std::sqrt(running_var[c] + eps_);
        const double g = gamma[c], b = beta[c], mu = running_mean[c];
        for (int n = 0; n < x.n; ++n) {
            const double* p = x.chan(n, c);
            double* yp = y.chan(n, c);
            for (std::size_t i = 0; i < plane; ++i) yp[i] = g * (p[i] - mu) * istd + b;
        }
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& gy) {
    if (xhat_.size() == 0) fail_internal("batchnorm backward without cached forward");
    Tensor gx(gy.n, gy.c, gy.h, gy.w);
    const std::size_t plane = gy.plane();
    const double m = static_cast<double>(gy.n) * static_cast<double>(plane);
    for (int c = 0; c < channels_; ++c) {
        double dbeta = 0.0, dgamma = 0.0;
        for (int n = 0; n < gy.n; ++n) {
            const double* g = gy.chan(n, c);
            const double* xh = xhat_.chan(n, c);
            for (std::size_t i = 0; i < plane; ++i) {
                dbeta += g[i];
                dgamma += g[i] * xh[i];
            }
        }
        grad_beta[c] += dbeta;
        grad_gamma[c] += dgamma;
        const double k = gamma[c] * inv_std_[c];
        const double mean_g = dbeta / m;
        const double mean_gx = dgamma / m;
        for (int n = 0; n < gy.n; ++n) {
            const double* g = gy.chan(n, c);
            const double* xh = xhat_.chan(n, c);
            double* out = gx.chan(n, c);
            for (std::size_t i = 0; i < plane; ++i) out[i] = k * (g[i] - mean_g - xh[i] * mean_gx);
        }
    }
    xhat_ = Tensor();
    return gx;
}

void BatchNorm2d::visit_params(const std::string& prefix, const ParamVisitor& fn) {
    fn({prefix + ".gamma", &gamma, &grad_gamma});
    fn({prefix + ".beta", &beta, &grad_beta});
}

void BatchNorm2d::visit_state(const std::string& prefix, const ParamVisitor& fn) {
    visit_params(prefix, fn);
    fn({prefix + ".running_mean", &running_mean, nullptr});
    fn({prefix + ".running_var", &running_var, nullptr});
}

void BatchNorm2d::zero_grad() {
    std::fill(grad_gamma.begin(), grad_gamma.end(), 0.0);
    std::fill(grad_beta.begin(), grad_beta.end(), 0.0);
}

MaxPool2d::MaxPool2d(int kernel, int stride, int pad) : kernel_(kernel), stride_(stride), pad_(pad) {}

Tensor MaxPool2d::run(const Tensor& x, std::vector<std::int32_t>* argmax) const {
    const int ho = out_dim(x.h), wo = out_dim(x.w);
    Tensor y(x.n, x.c, ho, wo);
    if (argmax) argmax->assign(y.size(), -1);
    std::size_t oi = 0;
    for (int n = 0; n < x.n; ++n) {
        for (int c = 0; c < x.c; ++c) {
            const double* xch = x.chan(n, c);
            for (int oy = 0; oy < ho; ++oy) {
                for (int ox = 0; ox < wo; ++ox, ++oi) {
                    double best = -std::numeric_limits<double>::infinity();
                    std::int32_t best_idx = -1;
                    for (int ky = 0; ky < kernel_; ++ky) {
                        const int iy = oy * stride_ + ky - pad_;
                        if (iy < 0 || iy >= x.h) continue;
                        for (int kx = 0; kx < kernel_; ++kx) {
                            const int ix = ox * stride_ + kx - pad_;
                            if (ix < 0 || ix >= x.w) continue;
                            const double v = xch[static_cast<std::size_t>(iy) * x.w + ix];
                            if (v > best) {
                                best = v;
                                best_idx = static_cast<std::int32_t>(iy * x.w + ix);
                            }
                        }
                    }
                    y.v[oi] = best;
                    if (argmax) (*argmax)[oi] = best_idx;
                }
            }
        }
    }
    return y;
}

Tensor MaxPool2d::forward(const Tensor& x, bool training) {
    in_n_ = x.n;
    in_c_ = x.c;
    in_h_ = x.h;
    in_w_ = x.w;
    return run(x, training ? &argmax_ : nullptr);
}

Tensor MaxPool2d::eval_forward(const Tensor& x) const { return run(x, nullptr); }

Tensor MaxPool2d::backward(const Tensor& gy) {
    if (argmax_.empty()) fail_internal("maxpool backward without cached forward");
    Tensor gx(in_n_, in_c_, in_h_, in_w_);
    const std::size_t plane_in = static_cast<std::size_t>(in_h_) * in_w_;
    std::size_t oi = 0;
    for (int n = 0; n < gy.n; ++n) {
        for (int c = 0; c < gy.c; ++c) {
            double* gxch = gx.v.data() + (static_cast<std::size_t>(n) * in_c_ + c) * plane_in;
            for (std::size_t i = 0; i < gy.plane(); ++i, ++oi) gxch[argmax_[oi]] += gy.v[oi];
        }
    }
    argmax_.clear();
    return gx;
}

Linear::Linear(int in_features, int out_features) : in_(in_features), out_(out_features) {
    weight.assign(static_cast<std::size_t>(out_) * in_, 0.0);
    bias.assign(out_, 0.0);
    grad_weight.assign(weight.size(), 0.0);
    grad_bias.assign(out_, 0.0);
}

void Linear::init(Rng& rng) {
    const double std = std::sqrt(2.0 / in_);
    for (double& w : weight) w = std * rng.normal();
    std::fill(bias.begin(), bias.end(), 0.0);
}

Tensor Linear::run(const Tensor& x) const {
    if (x.c * x.h * x.w != in_) fail_internal("linear input size mismatch");
    Tensor y(x.n, out_, 1, 1);
    for (int n = 0; n < x.n; ++n) {
        const double* xp = x.v.data() + static_cast<std::size_t>(n) * in_;
        double* yp = y.v.data() + static_cast<std::size_t>(n) * out_;
        for (int o = 0; o < out_; ++o) {
            double acc = bias[o];
            const double* wr = weight.data() + static_cast<std::size_t>(o) * in_;
            for (int i = 0; i < in_; ++i) acc += wr[i] * xp[i];
            yp[o] = acc;
        }
    }
    return y;
}

Tensor Linear::forward(const Tensor& x, bool training) {
    if (training) cached_x_ = x;
    return run(x);
}

Tensor Linear::eval_forward(const Tensor& x) const { return run(x); }

Tensor Linear::backward(const Tensor& gy) {
    const Tensor& x = cached_x_;
    if (x.size() == 0) fail_internal("linear backward without cached forward");
    Tensor gx(x.n, x.c, x.h, x.w);
    for (int n = 0; n < x.n; ++n) {
        const double* xp = x.v.data() + static_cast<std::size_t>(n) * in_;
        const double* gp = gy.v.data() + static_cast<std::size_t>(n) * out_;
        double* gxp = gx.v.data() + static_cast<std::size_t>(n) * in_;
        for (int o = 0; o < out_; ++o) {
            const double g = gp[o];
            grad_bias[o] += g;
            double* gw = grad_weight.data() + static_cast<std::size_t>(o) * in_;
            const double* wr = weight.data() + static_cast<std::size_t>(o) * in_;
            for (int i = 0; i < in_; ++i) {
                gw[i] += g * xp[i];
                gxp[i] += g * wr[i];
            }
        }
    }
    cached_x_ = Tensor();
    return gx;
}

void Linear::visit_params(const std::string& prefix, const ParamVisitor& fn) {
    fn({prefix + ".weight", &weight, &grad_weight});
    fn({prefix + ".bias", &bias, &grad_bias});
}

void Linear::zero_grad() {
    std::fill(grad_weight.begin(), grad_weight.end(), 0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

Tensor relu(const Tensor& x) {
    Tensor y = x;
    for (double& v : y.v)
        if (v < 0.0) v = 0.0;
    return y;
}

Tensor relu_backward(const Tensor& gy, const Tensor& y) {
    Tensor gx = gy;
    for (std::size_t i = 0; i < gx.v.size(); ++i)
        if (y.v[i] <= 0.0) gx.v[i] = 0.0;
    return gx;
}

Tensor global_avg_pool(const Tensor& x) {
    Tensor y(x.n, x.c, 1, 1);
    const double scale = 1.0 / static_cast<double>(x.plane());
    for (int n = 0; n < x.n; ++n) {
        for (int c = 0; c < x.c; ++c) {
            const double* p = x.chan(n, c);
            double acc = 0.0;
            for (std::size_t i = 0; i < x.plane(); ++i) acc += p[i];
            y.at(n, c, 0, 0) = acc * scale;
        }
    }
    return y;
}

Tensor global_avg_pool_backward(const Tensor& gy, int h, int w) {
    Tensor gx(gy.n, gy.c, h, w);
    const double scale = 1.0 / (static_cast<double>(h) * w);
    for (int n = 0; n < gy.n; ++n) {
        for (int c = 0; c < gy.c; ++c) {
            const double g = gy.at(n, c, 0, 0) * scale;
            double* p = gx.chan(n, c);
            for (std::size_t i = 0; i < gx.plane(); ++i) p[i] = g;
        }
    }
    return gx;
}

}  // namespace eegrt::nn
