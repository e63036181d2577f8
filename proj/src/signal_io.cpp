#include "eegrt/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "eegrt/error.hpp"

namespace eegrt {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, delim)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == delim) out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) fail_data(where + ": trailing characters in number '" + s + "'");
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail_data(where + ": cannot parse number '" + s + "'");
    }
}

RawRecording load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open recording file: " + path.string());

    const std::string fname = path.filename().string();
    std::string line;
    if (!std::getline(in, line)) fail_data(fname + ":1: missing rate_hz header");
    line = trim(line);
    const std::string key = "rate_hz=";
    if (line.rfind(key, 0) != 0) fail_data(fname + ":1: expected 'rate_hz=<float>' header, got '" + line + "'");
    const double rate = parse_double(line.substr(key.size()), fname + ":1");
    if (!(rate > 0)) fail_data(fname + ":1: sample rate must be positive, got " + std::to_string(rate));

    if (!std::getline(in, line)) fail_data(fname + ":2: missing channel-name header");
    std::vector<std::string> names = split(line, ',');
    if (names.empty() || (names.size() == 1 && names[0].empty()))
        fail_data(fname + ":2: no channel names");

    RawRecording rec;
    rec.sample_rate_hz = rate;
    rec.channels.resize(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].empty()) fail_data(fname + ":2: empty channel name in column " + std::to_string(i + 1));
        rec.channels[i].name = names[i];
    }

    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        std::vector<std::string> cols = split(t, ',');
        if (cols.size() != names.size())
            fail_data(fname + ":" + std::to_string(lineno) + ": expected " + std::to_string(names.size()) +
                      " values, got " + std::to_string(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i)
            rec.channels[i].samples.push_back(parse_double(cols[i], fname + ":" + std::to_string(lineno)));
    }
    rec.validate();
    return rec;
}

template <typename T>
T read_le(std::istream& in, const std::string& fname, const char* what) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in)
        fail_data(fname + ": truncated while reading " + what + " at byte offset " +
                  std::to_string(static_cast<long long>(in.tellg())));
    return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

constexpr char kMagic[4] = {'E', 'E', 'G', 'R'};

RawRecording load_raw_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_data("cannot open recording file: " + path.string());
    const std::string fname = path.filename().string();

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        fail_data(fname + ": missing EEGR magic at byte offset 0");

    const std::uint32_t n_channels = read_le<std::uint32_t>(in, fname, "channel count");
    const double rate = read_le<double>(in, fname, "sample rate");
    const std::uint64_t n_samples = read_le<std::uint64_t>(in, fname, "samples-per-channel");
    if (n_channels == 0) fail_data(fname + ": zero channels");
    if (!(rate > 0)) fail_data(fname + ": non-positive sample rate");

    RawRecording rec;
    rec.sample_rate_hz = rate;
    rec.channels.resize(n_channels);
    for (std::uint32_t c = 0; c < n_channels; ++c) {
        const std::uint32_t len = read_le<std::uint32_t>(in, fname, "channel-name length");
        if (len == 0 || len > 4096) fail_data(fname + ": implausible channel-name length " + std::to_string(len));
        std::string name(len, '\0');
        in.read(name.data(), len);
        if (!in) fail_data(fname + ": truncated channel name at byte offset " +
                           std::to_string(static_cast<long long>(in.tellg())));
        rec.channels[c].name = name;
    }
    for (std::uint32_t c = 0; c < n_channels; ++c) {
        rec.channels[c].samples.resize(n_samples);
        for (std::uint64_t i = 0; i < n_samples; ++i)
            rec.channels[c].samples[i] = static_cast<double>(read_le<float>(in, fname, "sample data"));
    }
    rec.validate();
    return rec;
}

}  // namespace

const Channel* RawRecording::find_channel(const std::string& name) const {
    for (const auto& ch : channels)
        if (ch.name == name) return &ch;
    return nullptr;
}

void RawRecording::validate() const {
    if (channels.empty()) fail_data("recording has no channels");
    if (!(sample_rate_hz > 0)) fail_data("recording sample rate must be positive");
    const std::size_t n = channels.front().samples.size();
    std::set<std::string> seen;
    for (const auto& ch : channels) {
        if (ch.samples.size() != n)
            fail_data("ragged channel lengths: '" + ch.name + "' has " + std::to_string(ch.samples.size()) +
                      " samples, expected " + std::to_string(n));
        if (!seen.insert(ch.name).second) fail_data("duplicate channel name '" + ch.name + "'");
    }
}

RawRecording load_recording(const std::filesystem::path& path, RecordingFormat format) {
    return format == RecordingFormat::csv ? load_csv(path) : load_raw_binary(path);
}

RawRecording load_recording(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_data("cannot open recording file: " + path.string());
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    in.close();
    const bool binary = std::memcmp(magic, kMagic, 4) == 0;
    return load_recording(path, binary ? RecordingFormat::raw_binary : RecordingFormat::csv);
}

void save_recording_csv(const RawRecording& rec, const std::filesystem::path& path) {
    rec.validate();
    std::ofstream out(path);
    if (!out) fail_data("cannot write recording file: " + path.string());
    out.precision(9);
    out << "rate_hz=" << rec.sample_rate_hz << "\n";
    for (std::size_t c = 0; c < rec.channels.size(); ++c)
        out << (c ? "," : "") << rec.channels[c].name;
    out << "\n";
    const std::size_t n = rec.sample_count();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < rec.channels.size(); ++c)
            out << (c ? "," : "") << rec.channels[c].samples[i];
        out << "\n";
    }
    if (!out) fail_data("write failure on: " + path.string());
}

void save_recording_raw(const RawRecording& rec, const std::filesystem::path& path) {
    rec.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_data("cannot write recording file: " + path.string());
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rec.channels.size()));
    write_le<double>(out, rec.sample_rate_hz);
    write_le<std::uint64_t>(out, rec.sample_count());
    for (const auto& ch : rec.channels) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ch.name.size()));
        out.write(ch.name.data(), static_cast<std::streamsize>(ch.name.size()));
    }
    for (const auto& ch : rec.channels)
        for (double v : ch.samples) write_le<float>(out, static_cast<float>(v));
    if (!out) fail_data("write failure on: " + path.string());
}

void MontageSpec::validate() const {
    if (pairs.empty()) fail_data("montage spec has no pairs");
    for (const auto& p : pairs)
        if (p.anode.empty() || p.cathode.empty()) fail_data("montage pair with empty channel name");
}

MontageSpec MontageSpec::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail_data("cannot open montage file: " + path.string());
    MontageSpec spec;
    spec.name = path.stem().string();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            fail_data(path.filename().string() + ":" + std::to_string(lineno) + ": expected 'ANODE,CATHODE'");
        MontagePair p{trim(line.substr(0, comma)), trim(line.substr(comma + 1))};
        if (p.anode.empty() || p.cathode.empty())
            fail_data(path.filename().string() + ":" + std::to_string(lineno) + ": empty channel name");
        spec.pairs.push_back(std::move(p));
    }
    spec.validate();
    return spec;
}

void MontageSpec::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) fail_data("cannot write montage file: " + path.string());
    for (const auto& p : pairs) out << p.anode << "," << p.cathode << "\n";
}

MontagedRecording apply_montage(const RawRecording& rec, const MontageSpec& spec) {
    rec.validate();
    spec.validate();
    MontagedRecording out;
    out.sample_rate_hz = rec.sample_rate_hz;
    out.channels.reserve(spec.pairs.size());
    const std::size_t n = rec.sample_count();
    for (const auto& p : spec.pairs) {
        const Channel* a = rec.find_channel(p.anode);
        const Channel* c = rec.find_channel(p.cathode);
        if (!a) fail_data("montage references unknown channel '" + p.anode + "'");
        if (!c) fail_data("montage references unknown channel '" + p.cathode + "'");
        MontagedChannel mc;
        mc.label = p.anode + "-" + p.cathode;
        mc.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) mc.samples[i] = a->samples[i] - c->samples[i];
        out.channels.push_back(std::move(mc));
    }
    return out;
}

std::vector<double> design_lowpass_fir(double fs_hz, double pass_hz, double stop_hz) {
    if (!(fs_hz > 0) || !(pass_hz > 0) || !(stop_hz > pass_hz) || stop_hz > fs_hz / 2 + 1e-9)
        fail_internal("bad FIR design parameters");
    // Hamming window: ~53 dB stopband, transition width ~3.3/M normalized.
    const double transition = (stop_hz - pass_hz) / fs_hz;
    int taps = static_cast<int>(std::ceil(3.3 / transition));
    if (taps % 2 == 0) ++taps;
    if (taps < 5) taps = 5;

    const double fc = 0.5 * (pass_hz + stop_hz) / fs_hz;  // normalized cutoff
    const int center = (taps - 1) / 2;
    std::vector<double> h(taps);
    double sum = 0.0;
    for (int k = 0; k < taps; ++k) {
        const int m = k - center;
        const double sinc = (m == 0) ? 2.0 * fc : std::sin(2.0 * M_PI * fc * m) / (M_PI * m);
        const double w = 0.54 - 0.46 * std::cos(2.0 * M_PI * k / (taps - 1));
        h[k] = sinc * w;
        sum += h[k];
    }
    for (double& v : h) v /= sum;  // unity DC gain
    return h;
}

std::vector<double> fir_filter_causal(const std::vector<double>& taps, const std::vector<double>& x) {
    const std::size_t n = x.size();
    const std::size_t m = taps.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const std::size_t kmax = std::min(m - 1, i);
        for (std::size_t k = 0; k <= kmax; ++k) acc += taps[k] * x[i - k];
        y[i] = acc;
    }
    return y;
}

DecimateResult decimate(const MontagedRecording& rec, double target_hz) {
    if (!(target_hz > 0)) fail_data("decimation target rate must be positive");
    if (target_hz > rec.sample_rate_hz + 1e-9)
        fail_data("decimation target " + std::to_string(target_hz) + " Hz above source rate " +
                  std::to_string(rec.sample_rate_hz) + " Hz");
    const double ratio = rec.sample_rate_hz / target_hz;
    const long factor = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(factor)) > 1e-9)
        fail_data("source rate " + std::to_string(rec.sample_rate_hz) + " Hz is not an integer multiple of target " +
                  std::to_string(target_hz) + " Hz");

    // Transition band 0.8*nyq_new .. nyq_new so the new Nyquist itself sits in
    // the stopband and everything below 80% of it stays flat.
    const double nyq_new = target_hz / 2.0;
    const std::vector<double> taps = design_lowpass_fir(rec.sample_rate_hz, 0.8 * nyq_new, nyq_new);

    DecimateResult res;
    res.filter_taps = static_cast<int>(taps.size());
    res.group_delay_sec = static_cast<double>(taps.size() - 1) / 2.0 / rec.sample_rate_hz;
    res.recording.sample_rate_hz = target_hz;
    res.recording.channels.reserve(rec.channels.size());
    for (const auto& ch : rec.channels) {
        const std::vector<double> filtered = fir_filter_causal(taps, ch.samples);
        MontagedChannel out;
        out.label = ch.label;
        out.samples.reserve((filtered.size() + factor - 1) / factor);
        for (std::size_t i = 0; i < filtered.size(); i += static_cast<std::size_t>(factor))
            out.samples.push_back(filtered[i]);
        res.recording.channels.push_back(std::move(out));
    }
    return res;
}

}  // namespace eegrt
