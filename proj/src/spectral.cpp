#include "moodtag/spectral.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "moodtag/error.hpp"

namespace moodtag {

FramePlan make_frame_plan(std::size_t part_length, std::size_t n_frames) {
    if (n_frames == 0) {
        throw std::invalid_argument("frame plan: frame count must be positive");
    }
    if (part_length < n_frames) {
        throw std::invalid_argument("frame plan: part of " + std::to_string(part_length) +
                                    " samples cannot hold " + std::to_string(n_frames) + " frames");
    }
    FramePlan plan;
    plan.n_frames = n_frames;
    plan.frame_len = part_length / n_frames;
    plan.fft_size = std::max<std::size_t>(2, next_power_of_two(plan.frame_len));
    return plan;
}

std::vector<std::span<const double>> frame_signal(const AudioPart& part, const FramePlan& plan) {
    const auto& x = part.buffer.samples;
    if (plan.frame_len == 0 || x.size() < plan.n_frames * plan.frame_len) {
        throw std::invalid_argument("frame_signal: part shorter than the frame plan");
    }
    std::vector<std::span<const double>> frames;
    frames.reserve(plan.n_frames);
    const std::span<const double> all(x);
    for (std::size_t n = 0; n < plan.n_frames; ++n) {
        frames.push_back(all.subspan(n * plan.frame_len, plan.frame_len));
    }
    return frames;
}

std::vector<double> hann_window(std::size_t length) {
    std::vector<double> w(length, 1.0);
    if (length < 2) return w;
    const double denom = static_cast<double>(length - 1);
    for (std::size_t i = 0; i < length; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
    }
    return w;
}

std::vector<double> magnitude_spectrum(std::span<const double> frame, std::size_t fft_size, Window window) {
    const FftPlan plan(fft_size);
    const std::vector<double> w =
        window == Window::Hann ? hann_window(frame.size()) : std::vector<double>(frame.size(), 1.0);
    return magnitude_spectrum(frame, plan, w);
}

std::vector<double> magnitude_spectrum(std::span<const double> frame, const FftPlan& plan,
                                       std::span<const double> window) {
    if (frame.size() > plan.size()) {
        throw std::invalid_argument("magnitude_spectrum: frame longer than the FFT size");
    }
    if (window.size() != frame.size()) {
        throw std::invalid_argument("magnitude_spectrum: window length mismatch");
    }
    std::vector<std::complex<double>> buf(plan.size());
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i] * window[i];
    plan.forward(buf);
    std::vector<double> mags(plan.size() / 2);
    for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(buf[k]);
    return mags;
}

Spectrogram::Spectrogram(std::vector<double> mags, int sample_rate, FramePlan plan)
    : mags_(std::move(mags)), sample_rate_(sample_rate), plan_(plan) {
    if (mags_.size() != plan_.n_frames * (plan_.fft_size / 2)) {
        throw std::invalid_argument("Spectrogram: magnitude matrix does not match the frame plan");
    }
}

std::span<const double> Spectrogram::row(std::size_t frame) const {
    if (frame >= n_frames()) {
        throw std::out_of_range("Spectrogram: frame index " + std::to_string(frame) + " out of range");
    }
    return std::span<const double>(mags_).subspan(frame * n_bins(), n_bins());
}

Spectrogram compute_spectrogram(const AudioPart& part, const FramePlan& plan) {
    const auto frames = frame_signal(part, plan);
    const FftPlan fft(plan.fft_size);
    const auto window = hann_window(plan.frame_len);
    const std::size_t bins = plan.fft_size / 2;
    std::vector<double> mags(plan.n_frames * bins);
    for (std::size_t n = 0; n < frames.size(); ++n) {
        const auto row = magnitude_spectrum(frames[n], fft, window);
        std::copy(row.begin(), row.end(), mags.begin() + static_cast<std::ptrdiff_t>(n * bins));
    }
    return Spectrogram(std::move(mags), part.buffer.sample_rate, plan);
}

void write_spectrogram_csv(const Spectrogram& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    char buf[32];
    for (std::size_t n = 0; n < spec.n_frames(); ++n) {
        const auto row = spec.row(n);
        for (std::size_t k = 0; k < row.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.9g", row[k]);
            if (k) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

SubBandPlan make_subband_plan(int sample_rate, int n_bands, std::size_t fft_size) {
    if (sample_rate <= 0) {
        throw std::invalid_argument("sub-band plan: sample rate must be positive");
    }
    if (n_bands < 2 || n_bands > 60) {
        throw std::invalid_argument("sub-band plan: band count must lie in [2, 60]");
    }
    if (!is_power_of_two(fft_size)) {
        throw std::invalid_argument("sub-band plan: FFT size must be a power of two");
    }
    const double f0 = sample_rate;
    const double n_fft = static_cast<double>(fft_size);
    const std::size_t n_bins = fft_size / 2;

    // Bin b lies at b * f0 / fft_size, so b >= fft_size / 2^e  <=>  f >= f0 / 2^e.
    auto first_bin_at_or_above = [&](int exponent) {
        return static_cast<std::size_t>(std::ceil(n_fft / std::ldexp(1.0, exponent)));
    };

    SubBandPlan plan;
    plan.bands.reserve(static_cast<std::size_t>(n_bands));
    plan.bands.push_back({0.0, f0 / std::ldexp(1.0, n_bands), 0, first_bin_at_or_above(n_bands)});
    for (int i = 2; i <= n_bands; ++i) {
        const int lo_exp = n_bands - i + 2;
        const int hi_exp = n_bands - i + 1;
        plan.bands.push_back({f0 / std::ldexp(1.0, lo_exp), f0 / std::ldexp(1.0, hi_exp),
                              first_bin_at_or_above(lo_exp), first_bin_at_or_above(hi_exp)});
    }
    for (const auto& band : plan.bands) {
        if (band.first_bin >= band.last_bin) {
            throw std::invalid_argument("sub-band plan: lowest band narrower than one bin ([" +
                                        std::to_string(band.low_hz) + ", " + std::to_string(band.high_hz) +
                                        ") Hz holds no bin)");
        }
    }
    plan.bin_band.assign(n_bins, 0);
    for (std::size_t i = 0; i < plan.bands.size(); ++i) {
        for (std::size_t b = plan.bands[i].first_bin; b < plan.bands[i].last_bin && b < n_bins; ++b) {
            plan.bin_band[b] = i;
        }
    }
    return plan;
}

}  // namespace moodtag
