#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "eegrt/error.hpp"
#include "eegrt/rng.hpp"
#include "eegrt/windowing.hpp"
#include "test_util.hpp"

using namespace eegrt;

namespace {

// brute-force sliding-max oracle for the scaling definition
std::vector<double> scale_oracle(const std::vector<double>& x, double rate, const ScalingParams& p) {
    const long n_window = std::lround(p.window_sec * rate);
    const long half = std::max(0L, n_window / 2);
    const long n = static_cast<long>(x.size());
    std::vector<double> out(x.size());
    for (long i = 0; i < n; ++i) {
        double mx = 0.0;
        for (long j = std::max(0L, i - half); j <= std::min(n - 1, i + half); ++j)
            mx = std::max(mx, std::fabs(x[j]));
        out[i] = x[i] / std::max(p.epsilon, mx);
    }
    return out;
}

}  // namespace

TEST_CASE("max_local_scale: all-zero signal stays zero") {
    std::vector<double> x(100, 0.0);
    const auto y = max_local_scale(x, 50.0);
    for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("max_local_scale: nonzero constant maps to signed one") {
    for (double c : {4.5, -0.25}) {
        std::vector<double> x(64, c);
        const auto y = max_local_scale(x, 50.0);
        for (double v : y) CHECK(v == doctest::Approx(c > 0 ? 1.0 : -1.0));
    }
}

TEST_CASE("max_local_scale: three-sample window example") {
    ScalingParams p;
    p.window_sec = 3.0;
    const auto y = max_local_scale({1.0, 4.0, 2.0}, 1.0, p);
    CHECK(y[0] == doctest::Approx(0.25));
    CHECK(y[1] == doctest::Approx(1.0));
    CHECK(y[2] == doctest::Approx(0.5));
    CHECK(y == scale_oracle({1.0, 4.0, 2.0}, 1.0, p));
}

TEST_CASE("max_local_scale matches brute-force oracle on random signals") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.uniform_int(400);
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform(-50.0, 50.0);
        ScalingParams p;
        p.window_sec = rng.uniform(0.02, 2.0);
        const double rate = rng.uniform(20.0, 300.0);
        const auto got = max_local_scale(x, rate, p);
        const auto want = scale_oracle(x, rate, p);
        for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == want[i]);
    }
}

TEST_CASE("max_local_scale: gain invariance and boundedness") {
    Rng rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 10 + rng.uniform_int(300);
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        const auto base = max_local_scale(x, 50.0);
        double peak = 0.0;
        for (double v : base) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
            peak = std::max(peak, std::fabs(v));
        }
        // the global argmax sample always lands exactly on +/-1
        CHECK(peak == 1.0);
        for (double k : {1e-3, 1e3}) {
            std::vector<double> xs = x;
            for (auto& v : xs) v *= k;
            const auto scaled = max_local_scale(xs, 50.0);
            for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(scaled[i] - base[i]) < 1e-9);
        }
    }
}

namespace {

MontagedRecording recording_from(std::vector<std::vector<double>> chans, double rate) {
    MontagedRecording rec;
    rec.sample_rate_hz = rate;
    for (std::size_t i = 0; i < chans.size(); ++i)
        rec.channels.push_back({"c" + std::to_string(i), std::move(chans[i])});
    return rec;
}

}  // namespace

TEST_CASE("extract_windows: exact tiling, boundary drop, enumeration oracle") {
    const auto tile = extract_windows(recording_from({std::vector<double>(512, 0.5)}, 256.0), 256, 256);
    REQUIRE(tile.size() == 2);
    CHECK(tile[0].start_sec == doctest::Approx(0.0));
    CHECK(tile[1].start_sec == doctest::Approx(1.0));

    const auto drop = extract_windows(recording_from({std::vector<double>(300, 0.5)}, 50.0), 256, 50);
    CHECK(drop.size() == 1);

    const auto many = extract_windows(recording_from({std::vector<double>(1000, 0.5)}, 50.0), 256, 50);
    // enumeration oracle over valid starts
    std::size_t expected = 0;
    for (std::size_t s = 0; s + 256 <= 1000; s += 50) ++expected;
    CHECK(expected == 15);
    CHECK(many.size() == expected);

    CHECK_THROWS_AS(extract_windows(recording_from({std::vector<double>(100, 0.0)}, 50.0), 256, 50), Error);
}

TEST_CASE("extract_windows copies channel-major data") {
    std::vector<double> a(40), b(40);
    for (int i = 0; i < 40; ++i) {
        a[i] = i / 100.0;
        b[i] = -i / 100.0;
    }
    const auto w = extract_windows(recording_from({a, b}, 10.0), 16, 8);
    REQUIRE(w.size() == 4);
    CHECK(w[1].channel_count == 2);
    CHECK(w[1].at(0, 0) == doctest::Approx(8 / 100.0));
    CHECK(w[1].at(1, 3) == doctest::Approx(-11 / 100.0));
    CHECK(w[1].start_sec == doctest::Approx(0.8));
}

TEST_CASE("to_grayscale: range endpoints, midpoint, oracle") {
    ScaledWindow w;
    w.channel_count = 1;
    w.window_samples = 3;
    w.data = {-1.0, 0.0, 1.0};
    const GrayscaleImage img = to_grayscale(w);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(0, 1) == 128);  // round-half-up of 127.5
    CHECK(img.at(0, 2) == 255);

    Rng rng(3);
    ScaledWindow r;
    r.channel_count = 4;
    r.window_samples = 32;
    r.data.resize(4 * 32);
    for (auto& v : r.data) v = rng.uniform(-1.0, 1.0);
    const GrayscaleImage ri = to_grayscale(r);
    for (std::size_t i = 0; i < r.data.size(); ++i) {
        const double p = std::floor((r.data[i] + 1.0) / 2.0 * 255.0 + 0.5);  // scalar-loop oracle
        CHECK(ri.pixels[i] == static_cast<std::uint8_t>(p));
    }
}

TEST_CASE("to_grayscale: monotone in the sample value") {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        double v1 = rng.uniform(-1.0, 1.0), v2 = rng.uniform(-1.0, 1.0);
        if (v1 > v2) std::swap(v1, v2);
        ScaledWindow w;
        w.channel_count = 1;
        w.window_samples = 2;
        w.data = {v1, v2};
        const GrayscaleImage img = to_grayscale(w);
        CHECK(img.pixels[0] <= img.pixels[1]);
    }
}

TEST_CASE("to_grayscale rejects out-of-range values") {
    ScaledWindow w;
    w.channel_count = 1;
    w.window_samples = 1;
    w.data = {1.5};
    CHECK_THROWS_AS(to_grayscale(w), Error);
}

namespace {

GrayscaleImage image_of(int h, int w, const std::vector<std::uint8_t>& px) {
    GrayscaleImage img;
    img.height = h;
    img.width = w;
    img.pixels = px;
    return img;
}

double keys_oracle(double t) {
    t = std::fabs(t);
    if (t <= 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
    if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
    return 0.0;
}

// direct per-output-pixel evaluation: horizontal gather then vertical, like a
// hand computation of the separable kernel
std::uint8_t resize_oracle_pixel(const GrayscaleImage& src, int oh, int ow, int oy, int ox) {
    const double sy = (oy + 0.5) * static_cast<double>(src.height) / oh - 0.5;
    const double sx = (ox + 0.5) * static_cast<double>(src.width) / ow - 0.5;
    const int by = static_cast<int>(std::floor(sy));
    const int bx = static_cast<int>(std::floor(sx));
    const double fy = sy - by, fx = sx - bx;
    double acc = 0.0;
    for (int ky = 0; ky < 4; ++ky) {
        const int iy = std::clamp(by - 1 + ky, 0, src.height - 1);
        double row = 0.0;
        for (int kx = 0; kx < 4; ++kx) {
            const int ix = std::clamp(bx - 1 + kx, 0, src.width - 1);
            row += keys_oracle(fx - (kx - 1)) * src.at(iy, ix);
        }
        acc += keys_oracle(fy - (ky - 1)) * row;
    }
    return static_cast<std::uint8_t>(std::clamp(std::floor(acc + 0.5), 0.0, 255.0));
}

}  // namespace

TEST_CASE("resize_bicubic: constants and identity are preserved exactly") {
    const GrayscaleImage uni = image_of(4, 6, std::vector<std::uint8_t>(24, 77));
    for (auto [h, w] : std::vector<std::pair<int, int>>{{8, 8}, {3, 9}, {17, 5}}) {
        const GrayscaleImage out = resize_bicubic(uni, h, w);
        for (auto p : out.pixels) CHECK(p == 77);
    }

    Rng rng(6);
    std::vector<std::uint8_t> px(12 * 10);
    for (auto& p : px) p = static_cast<std::uint8_t>(rng.uniform_int(256));
    const GrayscaleImage img = image_of(12, 10, px);
    const GrayscaleImage same = resize_bicubic(img, 12, 10);
    CHECK(same.pixels == img.pixels);
}

TEST_CASE("resize_bicubic: ramp upscale matches direct kernel evaluation") {
    std::vector<std::uint8_t> px(16);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) px[y * 4 + x] = static_cast<std::uint8_t>(16 * (y * 4 + x));
    const GrayscaleImage src = image_of(4, 4, px);
    const GrayscaleImage out = resize_bicubic(src, 8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(out.at(y, x) == resize_oracle_pixel(src, 8, 8, y, x));
}

TEST_CASE("resize_bicubic matches oracle on random images and sizes") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const int sh = 2 + static_cast<int>(rng.uniform_int(30));
        const int sw = 2 + static_cast<int>(rng.uniform_int(30));
        std::vector<std::uint8_t> px(static_cast<std::size_t>(sh) * sw);
        for (auto& p : px) p = static_cast<std::uint8_t>(rng.uniform_int(256));
        const GrayscaleImage src = image_of(sh, sw, px);
        const int oh = 2 + static_cast<int>(rng.uniform_int(40));
        const int ow = 2 + static_cast<int>(rng.uniform_int(40));
        const GrayscaleImage out = resize_bicubic(src, oh, ow);
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) CHECK(out.at(y, x) == resize_oracle_pixel(src, oh, ow, y, x));
    }
}

TEST_CASE("resize_bicubic rejects bad dimensions") {
    const GrayscaleImage img = image_of(4, 4, std::vector<std::uint8_t>(16, 1));
    CHECK_THROWS_AS(resize_bicubic(img, 0, 8), Error);
    const GrayscaleImage tiny = image_of(1, 4, std::vector<std::uint8_t>(4, 1));
    CHECK_THROWS_AS(resize_bicubic(tiny, 8, 8), Error);
}

TEST_CASE("pgm dump writes a P5 file named by start time") {
    TempDir tmp("pgm");
    GrayscaleImage img = image_of(2, 3, {0, 64, 128, 192, 255, 10});
    img.start_sec = 1.25;
    write_window_pgm(img, tmp.dir());
    std::ifstream in(tmp.path("win_1250.pgm"), std::ios::binary);
    REQUIRE(in.good());
    std::string magic;
    in >> magic;
    CHECK(magic == "P5");
    int w, h, maxv;
    in >> w >> h >> maxv;
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(maxv == 255);
}
