#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "moodtag/audio_io.hpp"
#include "moodtag/spectral.hpp"

namespace moodtag {

// Rhythm analysis runs on its own, finer framing than the 124-frame grid.
inline constexpr std::size_t kRhythmFrameLen = 2048;
inline constexpr std::size_t kRhythmHop = 1024;
inline constexpr double kMinTempoBpm = 40.0;
inline constexpr double kMaxTempoBpm = 200.0;

struct OnsetEnvelope {
    std::vector<double> values;
    double frame_rate = 0.0;  // envelope samples per second
};

// Half-wave rectified spectral flux, mean-removed and floored at zero.
OnsetEnvelope onset_envelope(const AudioPart& part);

struct TempoEstimate {
    double bpm = 0.0;
    double clarity = 0.0;  // peak envelope autocorrelation over lag 0, in [0, 1]
};

// Requires at least four seconds of envelope. An all-zero envelope gives {0, 0}.
TempoEstimate tempo_and_clarity(const OnsetEnvelope& envelope);

enum class ModeSign {
    MajorMinusMinor,  // positive for major
    MinorMinusMajor,
};

// Krumhansl-Kessler probe-tone ratings, tonic first.
inline constexpr std::array<double, 12> kMajorKeyProfile = {6.35, 2.23, 3.48, 2.33, 4.38, 4.09,
                                                            2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
inline constexpr std::array<double, 12> kMinorKeyProfile = {6.33, 2.68, 3.52, 5.38, 2.60, 3.53,
                                                            2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

// Power of the spectral peaks of every frame folded onto pitch classes
// (index 0 = C) by nearest equal-tempered pitch; peaks between C2 and C7
// contribute.
std::array<double, 12> chromagram(const Spectrogram& spec);

// Best major key correlation minus best minor key correlation (or the
// reverse, per `sign`). Silent input gives 0.
double mode_strength(const Spectrogram& spec, ModeSign sign = ModeSign::MajorMinusMinor);

inline constexpr double kMinPitchHz = 55.0;
inline constexpr double kMaxPitchHz = 2000.0;

// Autocorrelation pitch of one frame, or nullopt when the frame is unvoiced.
std::optional<double> estimate_f0(std::span<const double> frame, int sample_rate);

// Power-weighted mean distance of spectral peaks from the nearest harmonic
// of f0, scaled to [0, 1] and averaged over voiced frames.
double inharmonicity(const AudioPart& part, const Spectrogram& spec);
double inharmonicity(const AudioPart& part);

}  // namespace moodtag
