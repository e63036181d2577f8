#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "eegrt/signal_io.hpp"

namespace eegrt {

struct ScalingParams {
    double window_sec = 6.0;  // center-aligned local-max window
    double epsilon = 1e-9;    // divide-by-zero guard for flat segments

    void validate() const;
};

/// Normalizes each sample by the maximum absolute value inside a window
/// centered on it: out[n] = x[n] / max(eps, max |x[i]|, i in [n-N/2, n+N/2])
/// with N = round(window_sec * rate_hz). The index range is clamped at the
/// sequence ends, so the window shrinks there instead of zero-padding.
std::vector<double> max_local_scale(const std::vector<double>& signal, double rate_hz,
                                    const ScalingParams& params = {});

/// Applies max_local_scale to every channel.
MontagedRecording max_local_scale(const MontagedRecording& rec, const ScalingParams& params = {});

// One channels x window_samples slice of a scaled recording, values in [-1, +1].
struct ScaledWindow {
    int channel_count = 0;
    int window_samples = 0;
    double start_sec = 0.0;
    std::vector<double> data;  // channel-major

    double at(int c, int i) const { return data[static_cast<std::size_t>(c) * window_samples + i]; }
    double& at(int c, int i) { return data[static_cast<std::size_t>(c) * window_samples + i]; }
};

/// Copies windows starting at samples 0, stride, 2*stride, ...; a trailing
/// partial window is dropped. Inputs must already be max-locally scaled.
std::vector<ScaledWindow> extract_windows(const MontagedRecording& scaled, int window_samples,
                                          int stride_samples);

struct GrayscaleImage {
    int height = 0;
    int width = 0;
    double start_sec = 0.0;
    std::vector<std::uint8_t> pixels;  // row-major

    std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// pixel = round-half-up((v + 1) / 2 * 255); rows are channels, columns samples.
GrayscaleImage to_grayscale(const ScaledWindow& w);

/// Two-pass separable bicubic resize (Keys kernel, a = -0.5), edges clamped,
/// result rounded half-up and clamped to [0, 255].
GrayscaleImage resize_bicubic(const GrayscaleImage& img, int out_h, int out_w);

/// Debug dump as binary PGM (P5), named win_<start_ms>.pgm inside dir.
void write_window_pgm(const GrayscaleImage& img, const std::filesystem::path& dir);
void write_pgm(const GrayscaleImage& img, const std::filesystem::path& path);

}  // namespace eegrt
