#include "eegrt/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>

#include "eegrt/error.hpp"

namespace eegrt {

void ScalingParams::validate() const {
    if (!(window_sec > 0)) fail_data("scaling window_sec must be positive");
    if (!(epsilon > 0)) fail_data("scaling epsilon must be positive");
}

std::vector<double> max_local_scale(const std::vector<double>& signal, double rate_hz,
                                    const ScalingParams& params) {
    params.validate();
    if (signal.empty()) fail_data("max_local_scale: empty signal");
    if (!(rate_hz > 0)) fail_data("max_local_scale: rate must be positive");

    const long n_window = std::lround(params.window_sec * rate_hz);
    const long half = std::max(0L, n_window / 2);
    const long n = static_cast<long>(signal.size());

    // Sliding max of |x| over [i-half, i+half] with a monotonic deque.
    std::vector<double> out(signal.size());
    std::deque<long> q;
    long next = 0;  // next index to admit into the deque
    for (long i = 0; i < n; ++i) {
        const long hi = std::min(n - 1, i + half);
        for (; next <= hi; ++next) {
            const double v = std::fabs(signal[next]);
            while (!q.empty() && std::fabs(signal[q.back()]) <= v) q.pop_back();
            q.push_back(next);
        }
        const long lo = i - half;
        while (q.front() < lo) q.pop_front();
        const double local_max = std::fabs(signal[q.front()]);
        out[i] = signal[i] / std::max(params.epsilon, local_max);
    }
    return out;
}

MontagedRecording max_local_scale(const MontagedRecording& rec, const ScalingParams& params) {
    MontagedRecording out;
    out.sample_rate_hz = rec.sample_rate_hz;
    out.channels.reserve(rec.channels.size());
    for (const auto& ch : rec.channels)
        out.channels.push_back({ch.label, max_local_scale(ch.samples, rec.sample_rate_hz, params)});
    return out;
}

std::vector<ScaledWindow> extract_windows(const MontagedRecording& scaled, int window_samples,
                                          int stride_samples) {
    if (window_samples <= 0) fail_data("window_samples must be positive");
    if (stride_samples <= 0) fail_data("stride_samples must be positive");
    const std::size_t n = scaled.sample_count();
    if (static_cast<std::size_t>(window_samples) > n)
        fail_data("window of " + std::to_string(window_samples) + " samples longer than recording (" +
                  std::to_string(n) + " samples)");

    const int n_channels = static_cast<int>(scaled.channels.size());
    std::vector<ScaledWindow> windows;
    for (std::size_t start = 0; start + window_samples <= n; start += static_cast<std::size_t>(stride_samples)) {
        ScaledWindow w;
        w.channel_count = n_channels;
        w.window_samples = window_samples;
        w.start_sec = static_cast<double>(start) / scaled.sample_rate_hz;
        w.data.resize(static_cast<std::size_t>(n_channels) * window_samples);
        for (int c = 0; c < n_channels; ++c) {
            const double* src = scaled.channels[c].samples.data() + start;
            std::copy(src, src + window_samples, w.data.begin() + static_cast<std::size_t>(c) * window_samples);
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

GrayscaleImage to_grayscale(const ScaledWindow& w) {
    GrayscaleImage img;
    img.height = w.channel_count;
    img.width = w.window_samples;
    img.start_sec = w.start_sec;
    img.pixels.resize(w.data.size());
    for (std::size_t i = 0; i < w.data.size(); ++i) {
        const double v = w.data[i];
        if (v < -1.0 || v > 1.0)
            fail_data("window value " + std::to_string(v) + " outside [-1, +1]; scaling missing upstream");
        // round-half-up
        const double p = std::floor((v + 1.0) / 2.0 * 255.0 + 0.5);
        img.pixels[i] = static_cast<std::uint8_t>(std::clamp(p, 0.0, 255.0));
    }
    return img;
}

namespace {

// Keys cubic convolution, a = -0.5
inline double keys(double t) {
    t = std::fabs(t);
    if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
    if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
    return 0.0;
}

struct CubicTap {
    int idx[4];
    double w[4];
};

std::vector<CubicTap> cubic_taps(int src_len, int dst_len) {
    std::vector<CubicTap> taps(dst_len);
    const double scale = static_cast<double>(src_len) / dst_len;
    for (int o = 0; o < dst_len; ++o) {
        const double s = (o + 0.5) * scale - 0.5;
        const int base = static_cast<int>(std::floor(s));
        const double f = s - base;
        for (int k = 0; k < 4; ++k) {
            const int i = base - 1 + k;
            taps[o].idx[k] = std::clamp(i, 0, src_len - 1);
            taps[o].w[k] = keys(f - (k - 1));
        }
    }
    return taps;
}

}  // namespace

GrayscaleImage resize_bicubic(const GrayscaleImage& img, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) fail_data("resize target dimensions must be positive");
    if (img.height < 2 || img.width < 2) fail_data("resize source must be at least 2x2");

    const std::vector<CubicTap> tx = cubic_taps(img.width, out_w);
    const std::vector<CubicTap> ty = cubic_taps(img.height, out_h);

    // horizontal pass at full precision, then vertical
    std::vector<double> tmp(static_cast<std::size_t>(img.height) * out_w);
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t* row = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        double* trow = tmp.data() + static_cast<std::size_t>(y) * out_w;
        for (int x = 0; x < out_w; ++x) {
            const CubicTap& t = tx[x];
            trow[x] = t.w[0] * row[t.idx[0]] + t.w[1] * row[t.idx[1]] +
                      t.w[2] * row[t.idx[2]] + t.w[3] * row[t.idx[3]];
        }
    }

    GrayscaleImage out;
    out.height = out_h;
    out.width = out_w;
    out.start_sec = img.start_sec;
    out.pixels.resize(static_cast<std::size_t>(out_h) * out_w);
    for (int y = 0; y < out_h; ++y) {
        const CubicTap& t = ty[y];
        const double* r0 = tmp.data() + static_cast<std::size_t>(t.idx[0]) * out_w;
        const double* r1 = tmp.data() + static_cast<std::size_t>(t.idx[1]) * out_w;
        const double* r2 = tmp.data() + static_cast<std::size_t>(t.idx[2]) * out_w;
        const double* r3 = tmp.data() + static_cast<std::size_t>(t.idx[3]) * out_w;
        std::uint8_t* orow = out.pixels.data() + static_cast<std::size_t>(y) * out_w;
        for (int x = 0; x < out_w; ++x) {
            const double v = t.w[0] * r0[x] + t.w[1] * r1[x] + t.w[2] * r2[x] + t.w[3] * r3[x];
            orow[x] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
        }
    }
    return out;
}

void write_pgm(const GrayscaleImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_data("cannot write PGM file: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) fail_data("write failure on: " + path.string());
}

void write_window_pgm(const GrayscaleImage& img, const std::filesystem::path& dir) {
    const long long ms = std::llround(img.start_sec * 1000.0);
    write_pgm(img, dir / ("win_" + std::to_string(ms) + ".pgm"));
}

}  // namespace eegrt
