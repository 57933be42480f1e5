#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "moodtag/audio_io.hpp"
#include "moodtag/fft.hpp"

namespace moodtag {

inline constexpr std::size_t kDefaultFrameCount = 124;
inline constexpr int kDefaultSubBands = 10;

// Equal, non-overlapping partition of a part into n_frames frames. The
// remainder (fewer than n_frames samples) at the tail is dropped.
struct FramePlan {
    std::size_t n_frames = kDefaultFrameCount;
    std::size_t frame_len = 0;
    std::size_t fft_size = 0;
};

FramePlan make_frame_plan(std::size_t part_length, std::size_t n_frames = kDefaultFrameCount);

// Views into the part's samples; valid while the part is alive.
std::vector<std::span<const double>> frame_signal(const AudioPart& part, const FramePlan& plan);

enum class Window { Hann, Rectangular };

// Symmetric Hann of the given length (a single sample gets weight 1).
std::vector<double> hann_window(std::size_t length);

// Windowed, zero-padded to fft_size; returns |X[k]| for k in [0, fft_size / 2).
std::vector<double> magnitude_spectrum(std::span<const double> frame, std::size_t fft_size,
                                       Window window = Window::Hann);

// Same, reusing a plan and a precomputed window of frame.size().
std::vector<double> magnitude_spectrum(std::span<const double> frame, const FftPlan& plan,
                                       std::span<const double> window);

class Spectrogram {
public:
    Spectrogram(std::vector<double> mags, int sample_rate, FramePlan plan);

    std::size_t n_frames() const { return plan_.n_frames; }
    std::size_t n_bins() const { return plan_.fft_size / 2; }
    int sample_rate() const { return sample_rate_; }
    const FramePlan& plan() const { return plan_; }

    std::span<const double> row(std::size_t frame) const;
    double at(std::size_t frame, std::size_t bin) const { return mags_[frame * n_bins() + bin]; }
    double bin_frequency(std::size_t bin) const {
        return static_cast<double>(bin) * sample_rate_ / static_cast<double>(plan_.fft_size);
    }

private:
    std::vector<double> mags_;
    int sample_rate_;
    FramePlan plan_;
};

Spectrogram compute_spectrogram(const AudioPart& part, const FramePlan& plan);

// Debug dump: one CSV row per frame, one column per bin.
void write_spectrogram_csv(const Spectrogram& spec, const std::filesystem::path& path);

// Dyadic bands [0, f0/2^n), [f0/2^n, f0/2^(n-1)), ..., [f0/4, f0/2).
struct SubBandPlan {
    struct Band {
        double low_hz;
        double high_hz;
        std::size_t first_bin;  // inclusive
        std::size_t last_bin;   // exclusive
    };
    std::vector<Band> bands;
    std::vector<std::size_t> bin_band;  // band index (0-based) of every bin
};

SubBandPlan make_subband_plan(int sample_rate, int n_bands, std::size_t fft_size);

}  // namespace moodtag
