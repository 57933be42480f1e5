#include "moodtag/features.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>

#include "moodtag/error.hpp"

namespace moodtag {

namespace {

constexpr std::array<std::string_view, kFeatureGroupCount> kGroupNames = {"Intensity", "Timbre", "MFCC",
                                                                         "Rhythm",    "Harmony", "Temporal"};

std::string numbered(const char* prefix, int index, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%02d%s", prefix, index, suffix);
    return buf;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

void push_stats(std::vector<double>& out, std::span<const double> xs) {
    const auto s = mean_std(xs);
    out.push_back(s.mean);
    out.push_back(s.std);
}

template <typename F>
auto with_context(const char* feature, F&& compute) -> decltype(compute()) {
    try {
        return compute();
    } catch (const std::exception& e) {
        throw Error(std::string("feature '") + feature + "': " + e.what());
    }
}

}  // namespace

std::string_view group_name(FeatureGroup group) { return kGroupNames[static_cast<std::size_t>(group)]; }

std::optional<FeatureGroup> parse_group(std::string_view name) {
    for (std::size_t i = 0; i < kGroupNames.size(); ++i) {
        if (kGroupNames[i] == name) return static_cast<FeatureGroup>(i);
    }
    return std::nullopt;
}

FeatureSchema::FeatureSchema(const FeatureConfig& config) {
    auto add = [this](std::string name, FeatureGroup g) {
        names_.push_back(std::move(name));
        groups_.push_back(g);
    };
    add("intensity_mean", FeatureGroup::Intensity);
    add("intensity_std", FeatureGroup::Intensity);
    for (int i = 1; i <= config.n_subbands; ++i) {
        add(numbered("band", i, "_ratio_mean"), FeatureGroup::Intensity);
        add(numbered("band", i, "_ratio_std"), FeatureGroup::Intensity);
    }
    for (const char* base : {"centroid", "rolloff", "flux"}) {
        add(std::string(base) + "_mean", FeatureGroup::Timbre);
        add(std::string(base) + "_std", FeatureGroup::Timbre);
    }
    for (int q = config.mfcc_first; q < config.mfcc_first + config.mfcc_count; ++q) {
        add(numbered("mfcc", q, "_mean"), FeatureGroup::Mfcc);
        add(numbered("mfcc", q, "_std"), FeatureGroup::Mfcc);
    }
    add("tempo_bpm", FeatureGroup::Rhythm);
    add("rhythm_clarity", FeatureGroup::Rhythm);
    add("mode", FeatureGroup::Harmony);
    add("inharmonicity", FeatureGroup::Harmony);
    add("zcr_mean", FeatureGroup::Temporal);
    add("zcr_std", FeatureGroup::Temporal);
    for (int lag = 1; lag <= static_cast<int>(kAutocorrLags); ++lag) {
        add(numbered("autocorr_lag", lag, ""), FeatureGroup::Temporal);
    }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return i;
    }
    return std::nullopt;
}

std::shared_ptr<const FeatureSchema> feature_schema(const FeatureConfig& config) {
    return std::make_shared<const FeatureSchema>(config);
}

double FeatureVector::operator[](std::string_view name) const {
    const auto i = schema ? schema->index_of(name) : std::nullopt;
    if (!i) throw std::out_of_range("unknown feature '" + std::string(name) + "'");
    return values.at(*i);
}

double frame_intensity(const Spectrogram& spec, std::size_t frame) {
    double sum = 0.0;
    for (double a : spec.row(frame)) sum += a;
    return sum;
}

BandRatios subband_ratios(const Spectrogram& spec, const SubBandPlan& bands, std::size_t frame) {
    const auto row = spec.row(frame);
    if (bands.bin_band.size() != row.size()) {
        throw std::invalid_argument("subband_ratios: band plan built for a different FFT size");
    }
    BandRatios out;
    out.ratios.assign(bands.bands.size(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        out.ratios[bands.bin_band[k]] += row[k];
        total += row[k];
    }
    if (total == 0.0) {
        out.silent = true;
        return out;
    }
    for (double& r : out.ratios) r /= total;
    return out;
}

std::vector<double> frame_energies(const AudioPart& part, const FramePlan& plan) {
    const auto frames = frame_signal(part, plan);
    std::vector<double> energies;
    energies.reserve(frames.size());
    for (const auto& f : frames) {
        double ss = 0.0;
        for (double x : f) ss += x * x;
        energies.push_back(ss / static_cast<double>(f.size()));
    }
    return energies;
}

MeanStd energy_stats(const AudioPart& part, const FramePlan& plan) { return mean_std(frame_energies(part, plan)); }

FrameValue spectral_centroid(const Spectrogram& spec, std::size_t frame) {
    const auto row = spec.row(frame);
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        weighted += row[k] * static_cast<double>(k);
        total += row[k];
    }
    if (total == 0.0) return {0.0, true};
    return {weighted / total, false};
}

FrameValue rolloff(const Spectrogram& spec, std::size_t frame, double fraction) {
    const auto row = spec.row(frame);
    double total = 0.0;
    for (double a : row) total += a;
    if (total == 0.0) return {0.0, true};
    const double threshold = fraction * total;
    double cumulative = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        cumulative += row[k];
        if (cumulative >= threshold) return {static_cast<double>(k), false};
    }
    return {static_cast<double>(row.size() - 1), false};
}

double spectral_flux(const Spectrogram& spec, std::size_t frame) {
    if (frame == 0) {
        throw std::invalid_argument("spectral_flux: frame 0 has no predecessor");
    }
    const auto cur = spec.row(frame);
    const auto prev = spec.row(frame - 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) {
        const double d = cur[k] - prev[k];
        sum += d * d;
    }
    return sum;
}

MfccExtractor::MfccExtractor(int sample_rate, std::size_t fft_size, const FeatureConfig& config)
    : n_bins_(fft_size / 2),
      n_filters_(static_cast<std::size_t>(config.mel_filters)),
      n_coeffs_(static_cast<std::size_t>(config.mfcc_count)) {
    if (config.mel_filters < 1 || config.mfcc_count < 1 || config.mfcc_first < 0 ||
        config.mfcc_first + config.mfcc_count > config.mel_filters) {
        throw std::invalid_argument("MFCC: coefficient range must fit inside the filter count");
    }
    const double nyquist = sample_rate / 2.0;
    const double mel_top = hz_to_mel(nyquist);
    std::vector<double> edges(n_filters_ + 2);
    for (std::size_t j = 0; j < edges.size(); ++j) {
        edges[j] = mel_to_hz(mel_top * static_cast<double>(j) / static_cast<double>(n_filters_ + 1));
    }
    weights_.assign(n_filters_ * n_bins_, 0.0);
    for (std::size_t m = 0; m < n_filters_; ++m) {
        const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        for (std::size_t k = 0; k < n_bins_; ++k) {
            const double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
            double w = 0.0;
            if (f >= lo && f <= mid) {
                w = (f - lo) / (mid - lo);
            } else if (f > mid && f <= hi) {
                w = (hi - f) / (hi - mid);
            }
            weights_[m * n_bins_ + k] = w;
        }
    }
    const auto first = static_cast<std::size_t>(config.mfcc_first);
    const double nf = static_cast<double>(n_filters_);
    dct_.assign(n_coeffs_ * n_filters_, 0.0);
    for (std::size_t c = 0; c < n_coeffs_; ++c) {
        const std::size_t q = first + c;
        const double scale = q == 0 ? std::sqrt(1.0 / nf) : std::sqrt(2.0 / nf);
        for (std::size_t m = 0; m < n_filters_; ++m) {
            dct_[c * n_filters_ + m] =
                scale * std::cos(std::numbers::pi * static_cast<double>(q) * (static_cast<double>(m) + 0.5) / nf);
        }
    }
}

std::vector<double> MfccExtractor::log_mel(std::span<const double> mags) const {
    if (mags.size() != n_bins_) {
        throw std::invalid_argument("MFCC: spectrum length does not match the filterbank");
    }
    std::vector<double> out(n_filters_);
    for (std::size_t m = 0; m < n_filters_; ++m) {
        const double* w = &weights_[m * n_bins_];
        double e = 0.0;
        for (std::size_t k = 0; k < n_bins_; ++k) e += w[k] * mags[k] * mags[k];
        out[m] = std::log(std::max(e, kMelLogFloor));
    }
    return out;
}

std::vector<double> MfccExtractor::compute(std::span<const double> mags) const {
    const auto logs = log_mel(mags);
    std::vector<double> out(n_coeffs_, 0.0);
    for (std::size_t c = 0; c < n_coeffs_; ++c) {
        double s = 0.0;
        for (std::size_t m = 0; m < n_filters_; ++m) s += dct_[c * n_filters_ + m] * logs[m];
        out[c] = s;
    }
    return out;
}

std::vector<double> mfcc(const Spectrogram& spec, std::size_t frame, const FeatureConfig& config) {
    const MfccExtractor extractor(spec.sample_rate(), spec.plan().fft_size, config);
    return extractor.compute(spec.row(frame));
}

std::vector<double> zero_crossings(const AudioPart& part, const FramePlan& plan) {
    const auto frames = frame_signal(part, plan);
    std::vector<double> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        double jumps = 0.0;
        for (std::size_t i = 1; i < f.size(); ++i) {
            const bool pos = f[i] >= 0.0;
            const bool prev_pos = f[i - 1] >= 0.0;
            if (pos != prev_pos) jumps += 2.0;
        }
        out.push_back(0.5 * jumps);
    }
    return out;
}

std::array<double, kAutocorrLags> autocorr_features(const AudioPart& part) {
    const auto& x = part.buffer.samples;
    std::array<double, kAutocorrLags> out{};
    double energy = 0.0;
    for (double v : x) energy += v * v;
    if (energy == 0.0) return out;
    for (std::size_t lag = 1; lag <= kAutocorrLags; ++lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < x.size(); ++i) s += x[i] * x[i + lag];
        out[lag - 1] = std::clamp(s / energy, -1.0, 1.0);
    }
    return out;
}

FeatureVector extract_features(const AudioPart& part, const FeatureConfig& config) {
    FeatureVector fv;
    fv.schema = feature_schema(config);
    auto& out = fv.values;
    out.reserve(fv.schema->size());

    const FramePlan plan =
        with_context("frame plan", [&] { return make_frame_plan(part.buffer.samples.size(), config.n_frames); });
    const Spectrogram spec = with_context("spectrogram", [&] { return compute_spectrogram(part, plan); });
    const std::size_t n_frames = spec.n_frames();

    with_context("intensity", [&] {
        const auto bands = make_subband_plan(spec.sample_rate(), config.n_subbands, plan.fft_size);
        std::vector<double> intensity(n_frames);
        std::vector<std::vector<double>> ratios(bands.bands.size());
        for (std::size_t n = 0; n < n_frames; ++n) {
            intensity[n] = frame_intensity(spec, n);
            const auto r = subband_ratios(spec, bands, n);
            if (r.silent) continue;
            for (std::size_t i = 0; i < r.ratios.size(); ++i) ratios[i].push_back(r.ratios[i]);
        }
        push_stats(out, intensity);
        for (const auto& band : ratios) push_stats(out, band);
    });

    with_context("timbre", [&] {
        std::vector<double> centroids, rolloffs, fluxes;
        for (std::size_t n = 0; n < n_frames; ++n) {
            const auto c = spectral_centroid(spec, n);
            if (!c.silent) centroids.push_back(c.value);
            const auto r = rolloff(spec, n);
            if (!r.silent) rolloffs.push_back(r.value);
            if (n > 0) fluxes.push_back(spectral_flux(spec, n));
        }
        push_stats(out, centroids);
        push_stats(out, rolloffs);
        push_stats(out, fluxes);
    });

    with_context("mfcc", [&] {
        const MfccExtractor extractor(spec.sample_rate(), plan.fft_size, config);
        const auto n_coeffs = static_cast<std::size_t>(config.mfcc_count);
        std::vector<std::vector<double>> coeffs(n_coeffs, std::vector<double>(n_frames));
        for (std::size_t n = 0; n < n_frames; ++n) {
            const auto c = extractor.compute(spec.row(n));
            for (std::size_t q = 0; q < n_coeffs; ++q) coeffs[q][n] = c[q];
        }
        for (const auto& series : coeffs) push_stats(out, series);
    });

    with_context("rhythm", [&] {
        const auto tempo = tempo_and_clarity(onset_envelope(part));
        out.push_back(tempo.bpm);
        out.push_back(tempo.clarity);
    });

    with_context("harmony", [&] {
        out.push_back(mode_strength(spec, config.mode_sign));
        out.push_back(inharmonicity(part, spec));
    });

    with_context("temporal", [&] {
        push_stats(out, zero_crossings(part, plan));
        const auto ac = autocorr_features(part);
        out.insert(out.end(), ac.begin(), ac.end());
    });

    if (out.size() != fv.schema->size()) {
        throw Error("feature vector has " + std::to_string(out.size()) + " values, schema expects " +
                    std::to_string(fv.schema->size()));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out[i])) {
            throw Error("feature '" + fv.schema->name(i) + "' is not finite");
        }
    }
    return fv;
}

}  // namespace moodtag
