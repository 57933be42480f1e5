#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moodtag/audio_io.hpp"
#include "moodtag/musical.hpp"
#include "moodtag/spectral.hpp"
#include "moodtag/stats.hpp"

namespace moodtag {

enum class FeatureGroup { Intensity, Timbre, Mfcc, Rhythm, Harmony, Temporal };

inline constexpr std::size_t kFeatureGroupCount = 6;

std::string_view group_name(FeatureGroup group);
std::optional<FeatureGroup> parse_group(std::string_view name);

struct FeatureConfig {
    std::size_t n_frames = kDefaultFrameCount;
    int n_subbands = kDefaultSubBands;
    int mel_filters = 26;
    int mfcc_count = 20;
    // 0 keeps coefficients 0..19; 1 drops the level term and keeps 1..20.
    int mfcc_first = 0;
    ModeSign mode_sign = ModeSign::MajorMinusMinor;
};

inline constexpr std::size_t kAutocorrLags = 13;
inline constexpr double kRolloffFraction = 0.85;
inline constexpr double kMelLogFloor = 1e-10;

// Ordered column names and their groups; fixed for a given config.
class FeatureSchema {
public:
    explicit FeatureSchema(const FeatureConfig& config);

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    FeatureGroup group(std::size_t i) const { return groups_.at(i); }
    std::optional<std::size_t> index_of(std::string_view name) const;

    bool operator==(const FeatureSchema& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::vector<FeatureGroup> groups_;
};

std::shared_ptr<const FeatureSchema> feature_schema(const FeatureConfig& config = {});

struct FeatureVector {
    std::shared_ptr<const FeatureSchema> schema;
    std::vector<double> values;

    // Throws std::out_of_range for an unknown name.
    double operator[](std::string_view name) const;
};

// ---- intensity ----

// Sum of all bin magnitudes of one frame.
double frame_intensity(const Spectrogram& spec, std::size_t frame);

struct BandRatios {
    std::vector<double> ratios;  // one per band, summing to 1 unless silent
    bool silent = false;
};

BandRatios subband_ratios(const Spectrogram& spec, const SubBandPlan& bands, std::size_t frame);

// Per-frame mean square amplitude, then its mean and population std across frames.
std::vector<double> frame_energies(const AudioPart& part, const FramePlan& plan);
MeanStd energy_stats(const AudioPart& part, const FramePlan& plan);

// ---- timbre ----

struct FrameValue {
    double value = 0.0;
    bool silent = false;
};

// Magnitude-weighted mean bin index.
FrameValue spectral_centroid(const Spectrogram& spec, std::size_t frame);

// Smallest bin whose cumulative magnitude reaches `fraction` of the total.
FrameValue rolloff(const Spectrogram& spec, std::size_t frame, double fraction = kRolloffFraction);

// Squared magnitude change from the previous frame; frame must be >= 1.
double spectral_flux(const Spectrogram& spec, std::size_t frame);

// ---- MFCC ----

class MfccExtractor {
public:
    MfccExtractor(int sample_rate, std::size_t fft_size, const FeatureConfig& config = {});

    // Magnitude row in, `mfcc_count` coefficients out.
    std::vector<double> compute(std::span<const double> mags) const;

    // Log mel energies before the DCT; exposed for inspection.
    std::vector<double> log_mel(std::span<const double> mags) const;

private:
    std::size_t n_bins_;
    std::size_t n_filters_;
    std::vector<double> weights_;  // n_filters x n_bins
    std::vector<double> dct_;      // mfcc_count x n_filters
    std::size_t n_coeffs_;
};

std::vector<double> mfcc(const Spectrogram& spec, std::size_t frame, const FeatureConfig& config = {});

// ---- temporal ----

// Half the summed sign jumps per frame, with sgn(0) = +1.
std::vector<double> zero_crossings(const AudioPart& part, const FramePlan& plan);

// Biased whole-part autocorrelation at lags 1..13 divided by the lag-0 value.
std::array<double, kAutocorrLags> autocorr_features(const AudioPart& part);

// ---- aggregate ----

FeatureVector extract_features(const AudioPart& part, const FeatureConfig& config = {});

}  // namespace moodtag
