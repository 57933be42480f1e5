#include "moodtag/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "moodtag/error.hpp"

namespace moodtag {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

struct WavFormat {
    std::uint16_t codec = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

WavFormat parse_fmt(std::span<const std::uint8_t> body) {
    if (body.size() < 16) {
        throw DecodeError("fmt chunk: expected at least 16 bytes, got " + std::to_string(body.size()));
    }
    WavFormat fmt;
    fmt.codec = read_u16(body, 0);
    fmt.channels = read_u16(body, 2);
    fmt.sample_rate = read_u32(body, 4);
    fmt.bits = read_u16(body, 14);
    if (fmt.codec == kFormatExtensible) {
        if (body.size() < 26) {
            throw DecodeError("fmt chunk: extensible format without sub-format GUID");
        }
        fmt.codec = read_u16(body, 24);
    }
    if (fmt.codec != kFormatPcm && fmt.codec != kFormatFloat) {
        throw DecodeError("fmt chunk: unsupported codec " + std::to_string(fmt.codec));
    }
    if (fmt.channels == 0) {
        throw DecodeError("fmt chunk: zero channels");
    }
    if (fmt.sample_rate == 0) {
        throw DecodeError("fmt chunk: zero sample rate");
    }
    const bool int_ok = fmt.codec == kFormatPcm &&
                        (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
    const bool float_ok = fmt.codec == kFormatFloat && (fmt.bits == 32 || fmt.bits == 64);
    if (!int_ok && !float_ok) {
        throw DecodeError("fmt chunk: unsupported sample width " + std::to_string(fmt.bits) + " bits");
    }
    return fmt;
}

double decode_sample(const std::uint8_t* p, const WavFormat& fmt) {
    if (fmt.codec == kFormatFloat) {
        if (fmt.bits == 32) {
            std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
            float v;
            std::memcpy(&v, &bits, sizeof v);
            return v;
        }
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    switch (fmt.bits) {
        case 8:
            return (static_cast<int>(p[0]) - 128) / 128.0;
        case 16:
            return static_cast<std::int16_t>(p[0] | (p[1] << 8)) / 32768.0;
        case 24: {
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) v -= 0x1000000;
            return v / 8388608.0;
        }
        default: {
            auto v = static_cast<std::int32_t>(static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                               (static_cast<std::uint32_t>(p[2]) << 16) |
                                               (static_cast<std::uint32_t>(p[3]) << 24));
            return v / 2147483648.0;
        }
    }
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

// Zeroth-order modified Bessel function of the first kind (power series).
double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

constexpr int kHalfTaps = 32;
constexpr int kTableResolution = 1024;  // entries per input sample
constexpr double kKaiserBeta = 8.6;

// Tabulated kernel h(u) for u in [0, kHalfTaps], u in input samples.
std::vector<double> make_kernel_table(double cutoff) {
    std::vector<double> table(kHalfTaps * kTableResolution + 2, 0.0);
    const double norm = bessel_i0(kKaiserBeta);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const double u = static_cast<double>(i) / kTableResolution;
        if (u >= kHalfTaps) break;
        const double r = u / kHalfTaps;
        const double window = bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
        const double arg = std::numbers::pi * cutoff * u;
        const double sinc = u == 0.0 ? 1.0 : std::sin(arg) / arg;
        table[i] = cutoff * sinc * window;
    }
    return table;
}

double kernel_at(const std::vector<double>& table, double u) {
    const double pos = std::abs(u) * kTableResolution;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= table.size()) return 0.0;
    const double frac = pos - static_cast<double>(i);
    return table[i] + frac * (table[i + 1] - table[i]);
}

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF")) {
        throw DecodeError("RIFF header: not a RIFF container");
    }
    if (!tag_is(bytes, 8, "WAVE")) {
        throw DecodeError("RIFF header: form type is not WAVE");
    }

    std::optional<WavFormat> fmt;
    std::optional<std::span<const std::uint8_t>> data;
    std::size_t at = 12;
    while (at < bytes.size()) {
        if (bytes.size() - at < 8) {
            throw DecodeError("chunk header at offset " + std::to_string(at) + ": truncated");
        }
        const std::string id(reinterpret_cast<const char*>(bytes.data() + at), 4);
        const std::uint32_t size = read_u32(bytes, at + 4);
        const std::size_t body = at + 8;
        const std::size_t remaining = bytes.size() - body;
        if (id == "data") {
            if (size > remaining) {
                throw DecodeError("data chunk: truncated (declares " + std::to_string(size) + " bytes, " +
                                  std::to_string(remaining) + " present)");
            }
            data = bytes.subspan(body, size);
        } else if (id == "fmt ") {
            if (size > remaining) {
                throw DecodeError("fmt chunk: truncated");
            }
            fmt = parse_fmt(bytes.subspan(body, size));
        } else if (size > remaining) {
            throw DecodeError("'" + id + "' chunk: truncated");
        }
        at = body + size + (size & 1u);
    }
    if (!fmt) throw DecodeError("fmt chunk: missing");
    if (!data) throw DecodeError("data chunk: missing");

    const std::size_t width = fmt->bits / 8;
    const std::size_t frame_bytes = width * fmt->channels;
    const std::size_t frames = data->size() / frame_bytes;

    AudioBuffer out;
    out.sample_rate = static_cast<int>(fmt->sample_rate);
    out.samples.resize(frames);
    const std::uint8_t* p = data->data();
    for (std::size_t f = 0; f < frames; ++f) {
        double sum = 0.0;
        for (std::size_t c = 0; c < fmt->channels; ++c) {
            const double v = decode_sample(p, *fmt);
            if (!std::isfinite(v)) {
                throw DecodeError("data chunk: non-finite sample at frame " + std::to_string(f));
            }
            sum += v;
            p += width;
        }
        out.samples[f] = std::clamp(sum / fmt->channels, -1.0, 1.0);
    }
    return out;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_wav(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_wav16(const AudioBuffer& buffer) {
    const auto data_bytes = static_cast<std::uint32_t>(buffer.samples.size() * 2);
    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate) * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (double s : buffer.samples) {
        const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    }
    return out;
}

void write_wav16(const std::filesystem::path& path, const AudioBuffer& buffer) {
    const auto bytes = encode_wav16(buffer);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("cannot write " + path.string());
    }
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
    if (target_rate <= 0) {
        throw std::invalid_argument("resample: target rate must be positive");
    }
    if (buffer.samples.empty()) {
        throw Error("resample: empty buffer");
    }
    if (buffer.sample_rate <= 0) {
        throw std::invalid_argument("resample: source rate must be positive");
    }
    if (target_rate == buffer.sample_rate) {
        return buffer;
    }

    const auto in_rate = static_cast<std::int64_t>(buffer.sample_rate);
    const auto out_rate = static_cast<std::int64_t>(target_rate);
    const auto in_len = static_cast<std::int64_t>(buffer.samples.size());
    const auto out_len = static_cast<std::int64_t>(
        std::llround(static_cast<double>(in_len) * static_cast<double>(out_rate) / static_cast<double>(in_rate)));

    const double cutoff = std::min(1.0, static_cast<double>(out_rate) / static_cast<double>(in_rate));
    const auto table = make_kernel_table(cutoff);

    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.resize(static_cast<std::size_t>(out_len));
    for (std::int64_t m = 0; m < out_len; ++m) {
        // Exact rational position m * in_rate / out_rate.
        const std::int64_t num = m * in_rate;
        const std::int64_t base = num / out_rate;
        const double frac = static_cast<double>(num % out_rate) / static_cast<double>(out_rate);
        double acc = 0.0;
        double weight = 0.0;
        for (std::int64_t j = base - kHalfTaps + 1; j <= base + kHalfTaps; ++j) {
            if (j < 0 || j >= in_len) continue;
            const double w = kernel_at(table, static_cast<double>(j - base) - frac);
            acc += w * buffer.samples[static_cast<std::size_t>(j)];
            weight += w;
        }
        out.samples[static_cast<std::size_t>(m)] = weight != 0.0 ? std::clamp(acc / weight, -1.0, 1.0) : 0.0;
    }
    return out;
}

AudioBuffer normalize_peak(const AudioBuffer& buffer, double target_peak) {
    if (!(target_peak > 0.0 && target_peak <= 1.0)) {
        throw std::invalid_argument("normalize_peak: target must lie in (0, 1]");
    }
    double peak = 0.0;
    for (double s : buffer.samples) peak = std::max(peak, std::abs(s));
    if (peak == 0.0) {
        throw Error("silent input");
    }
    AudioBuffer out = buffer;
    if (peak == target_peak) {
        return out;
    }
    const double gain = target_peak / peak;
    for (double& s : out.samples) s *= gain;
    return out;
}

AudioPart extract_part(const AudioBuffer& buffer, double start_seconds, std::string source_id) {
    if (buffer.sample_rate <= 0) {
        throw std::invalid_argument("extract_part: buffer has no sample rate");
    }
    if (!(start_seconds >= 0.0)) {
        throw std::out_of_range("extract_part: start must be non-negative");
    }
    const auto length = static_cast<std::size_t>(std::llround(kPartSeconds * buffer.sample_rate));
    const auto first = static_cast<std::size_t>(std::llround(start_seconds * buffer.sample_rate));
    if (first + length > buffer.samples.size()) {
        throw std::out_of_range("extract_part: window [" + std::to_string(start_seconds) + " s, " +
                                std::to_string(start_seconds + kPartSeconds) + " s) exceeds available duration " +
                                std::to_string(buffer.duration()) + " s");
    }
    AudioPart part;
    part.buffer.sample_rate = buffer.sample_rate;
    part.buffer.samples.assign(buffer.samples.begin() + static_cast<std::ptrdiff_t>(first),
                               buffer.samples.begin() + static_cast<std::ptrdiff_t>(first + length));
    part.source_id = std::move(source_id);
    part.start_offset = start_seconds;
    return part;
}

AudioPart preprocess(const AudioBuffer& decoded, double start_seconds, std::string source_id,
                     const PreprocessOptions& options) {
    const AudioBuffer canonical = resample(decoded, options.sample_rate);
    AudioPart part = extract_part(canonical, start_seconds, std::move(source_id));
    part.buffer = normalize_peak(part.buffer, options.peak_target);
    return part;
}

}  // namespace moodtag
