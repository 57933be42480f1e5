#include "moodtag/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace moodtag::synthetic {

namespace {

std::string row_id(Label label, std::size_t n) { return std::string(label_name(label)) + "-" + std::to_string(n); }

}  // namespace

LabeledDataset gaussian_clusters(std::size_t rows_per_label, double separation, std::uint64_t seed) {
    LabeledDataset ds;
    ds.schema = feature_schema();
    const std::size_t d = ds.schema->size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    // Centre of label k is row k + 1 of a 64 x 64 Sylvester Hadamard matrix,
    // scaled so any two centres are exactly `separation` apart. Spreading the
    // offset over many axes keeps per-column variance close to 1.
    constexpr std::size_t m = 64;
    const std::size_t width = std::min(m, d);
    const double offset = separation / std::sqrt(2.0 * static_cast<double>(width));
    for (Label label : kAllLabels) {
        const std::size_t k = label_index(label) + 1;
        for (std::size_t n = 0; n < rows_per_label; ++n) {
            DatasetRow row{row_id(label, n), label, std::vector<double>(d)};
            for (auto& v : row.features) v = noise(rng);
            for (std::size_t j = 0; j < width; ++j) {
                row.features[j] += std::popcount(k & j) % 2 == 0 ? offset : -offset;
            }
            ds.rows.push_back(std::move(row));
        }
    }
    return ds;
}

LabeledDataset random_labels(std::size_t rows, std::uint64_t seed) {
    LabeledDataset ds;
    ds.schema = feature_schema();
    const std::size_t d = ds.schema->size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, kLabelCount - 1);
    for (std::size_t n = 0; n < rows; ++n) {
        const Label label = kAllLabels[pick(rng)];
        DatasetRow row{"row-" + std::to_string(n), label, std::vector<double>(d)};
        for (auto& v : row.features) v = noise(rng);
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

AudioBuffer sine(double freq_hz, double seconds, int sample_rate, double amplitude, double phase) {
    AudioBuffer b;
    b.sample_rate = sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
    b.samples.resize(n);
    const double step = 2.0 * std::numbers::pi * freq_hz / sample_rate;
    for (std::size_t i = 0; i < n; ++i) b.samples[i] = amplitude * std::sin(step * static_cast<double>(i) + phase);
    return b;
}

AudioBuffer tones(const std::vector<std::pair<double, double>>& partials, double seconds, int sample_rate) {
    AudioBuffer b;
    b.sample_rate = sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
    b.samples.assign(n, 0.0);
    for (const auto& [freq, amp] : partials) {
        for (std::size_t i = 0; i < n; ++i) {
            b.samples[i] += amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / sample_rate);
        }
    }
    return b;
}

AudioBuffer white_noise(double seconds, int sample_rate, std::uint64_t seed, double amplitude) {
    AudioBuffer b;
    b.sample_rate = sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    b.samples.resize(n);
    for (auto& s : b.samples) s = u(rng);
    return b;
}

AudioBuffer click_train(double bpm, double seconds, int sample_rate, double amplitude) {
    AudioBuffer b;
    b.sample_rate = sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
    b.samples.assign(n, 0.0);
    const double period = 60.0 / bpm * sample_rate;
    const auto burst = static_cast<std::size_t>(0.01 * sample_rate);
    for (double t = 0.0; t < static_cast<double>(n); t += period) {
        const auto start = static_cast<std::size_t>(std::llround(t));
        for (std::size_t i = 0; i < burst && start + i < n; ++i) {
            const double decay = std::exp(-static_cast<double>(i) / (0.002 * sample_rate));
            b.samples[start + i] += amplitude * decay * (i % 2 == 0 ? 1.0 : -1.0);
        }
    }
    return b;
}

AudioPart as_part(AudioBuffer buffer, std::string id) {
    AudioPart part;
    part.buffer = std::move(buffer);
    part.source_id = std::move(id);
    return part;
}

}  // namespace moodtag::synthetic
