#pragma once

#include <cstdint>
#include <vector>

#include "moodtag/audio_io.hpp"
#include "moodtag/dataset.hpp"

namespace moodtag::synthetic {

// Feature tables with the canonical schema. Rows are labeled in canonical
// label order and named "<label>-<n>".

// Unit-variance Gaussian clusters, one per label, with every pair of centres
// `separation` apart (offsets follow orthogonal +-1 patterns over 64 columns).
LabeledDataset gaussian_clusters(std::size_t rows_per_label, double separation, std::uint64_t seed);

// Standard-normal features with labels drawn uniformly at random.
LabeledDataset random_labels(std::size_t rows, std::uint64_t seed);

// ---- signals ----

AudioBuffer sine(double freq_hz, double seconds, int sample_rate, double amplitude = 0.5, double phase = 0.0);

// Sum of sines given as (frequency, amplitude) pairs.
AudioBuffer tones(const std::vector<std::pair<double, double>>& partials, double seconds, int sample_rate);

AudioBuffer white_noise(double seconds, int sample_rate, std::uint64_t seed, double amplitude = 0.3);

// Unit impulses, each followed by a short exponentially decaying burst.
AudioBuffer click_train(double bpm, double seconds, int sample_rate, double amplitude = 0.9);

AudioPart as_part(AudioBuffer buffer, std::string id = "synthetic");

}  // namespace moodtag::synthetic
