#include "moodtag/musical.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "moodtag/fft.hpp"

namespace moodtag {

namespace {

// Linear interpolation of a sequence at a fractional index.
double sample_at(std::span<const double> xs, double pos) {
    if (pos < 0.0) return 0.0;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= xs.size()) return i < xs.size() ? xs[i] : 0.0;
    const double frac = pos - static_cast<double>(i);
    return xs[i] + frac * (xs[i + 1] - xs[i]);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double best_key_correlation(const std::array<double, 12>& chroma, const std::array<double, 12>& profile) {
    double best = -1.0;
    std::array<double, 12> rotated{};
    for (std::size_t tonic = 0; tonic < 12; ++tonic) {
        for (std::size_t pc = 0; pc < 12; ++pc) rotated[(pc + tonic) % 12] = profile[pc];
        best = std::max(best, pearson(chroma, rotated));
    }
    return best;
}

// Offset in (-0.5, 0.5) of the vertex of the parabola through three points.
double parabolic_offset(double left, double centre, double right) {
    const double denom = left - 2.0 * centre + right;
    if (denom >= 0.0) return 0.0;
    return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

constexpr double kVoicingThreshold = 0.5;   // normalized autocorrelation peak
constexpr double kPeriodCandidateRatio = 0.5;  // of the strongest peak
constexpr double kPeakFloorRatio = 0.05;    // spectral peaks below -26 dB are ignored
constexpr std::size_t kMaxPeaks = 50;
constexpr double kFundamentalSnap = 0.03;  // relative search radius around the lag pitch

struct Partial {
    double freq;
    double power;
};

// Local maxima at or above floor_ratio of the row maximum, with frequency and
// power refined by a parabola through the log magnitudes. At most max_peaks
// of the strongest are kept.
std::vector<Partial> spectral_peaks(std::span<const double> mags, double bin_hz, double floor_ratio = kPeakFloorRatio,
                                    std::size_t max_peaks = kMaxPeaks) {
    std::vector<Partial> peaks;
    if (mags.size() < 3) return peaks;
    const double top = *std::max_element(mags.begin(), mags.end());
    if (top <= 0.0) return peaks;
    const double floor = std::max(floor_ratio * top, std::numeric_limits<double>::min());
    for (std::size_t k = 1; k + 1 < mags.size(); ++k) {
        if (mags[k] < floor || mags[k] <= mags[k - 1] || mags[k] < mags[k + 1]) continue;
        const double l = std::log(std::max(mags[k - 1], 1e-300));
        const double c = std::log(mags[k]);
        const double r = std::log(std::max(mags[k + 1], 1e-300));
        const double delta = parabolic_offset(l, c, r);
        const double log_peak = c - 0.25 * (l - r) * delta;
        const double amp = std::exp(log_peak);
        peaks.push_back({(static_cast<double>(k) + delta) * bin_hz, amp * amp});
    }
    if (peaks.size() > max_peaks) {
        std::partial_sort(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(max_peaks), peaks.end(),
                          [](const Partial& a, const Partial& b) { return a.power > b.power; });
        peaks.resize(max_peaks);
    }
    return peaks;
}

}  // namespace

OnsetEnvelope onset_envelope(const AudioPart& part) {
    const auto& x = part.buffer.samples;
    if (part.buffer.sample_rate <= 0) {
        throw std::invalid_argument("onset_envelope: part has no sample rate");
    }
    if (x.size() < kRhythmFrameLen) {
        throw std::invalid_argument("onset_envelope: part shorter than one rhythm frame");
    }
    const std::size_t n_frames = (x.size() - kRhythmFrameLen) / kRhythmHop + 1;
    const FftPlan plan(kRhythmFrameLen);
    const auto window = hann_window(kRhythmFrameLen);
    const std::span<const double> all(x);

    OnsetEnvelope env;
    env.frame_rate = static_cast<double>(part.buffer.sample_rate) / kRhythmHop;
    env.values.assign(n_frames, 0.0);
    std::vector<double> previous;
    for (std::size_t t = 0; t < n_frames; ++t) {
        auto mags = magnitude_spectrum(all.subspan(t * kRhythmHop, kRhythmFrameLen), plan, window);
        if (t > 0) {
            double flux = 0.0;
            for (std::size_t k = 0; k < mags.size(); ++k) flux += std::max(0.0, mags[k] - previous[k]);
            env.values[t] = flux;
        }
        previous = std::move(mags);
    }
    const double mean = std::accumulate(env.values.begin(), env.values.end(), 0.0) / static_cast<double>(n_frames);
    for (double& v : env.values) v = std::max(0.0, v - mean);
    return env;
}

TempoEstimate tempo_and_clarity(const OnsetEnvelope& envelope) {
    const auto& e = envelope.values;
    if (envelope.frame_rate <= 0.0) {
        throw std::invalid_argument("tempo_and_clarity: envelope has no frame rate");
    }
    if (static_cast<double>(e.size()) < 4.0 * envelope.frame_rate) {
        throw std::invalid_argument("tempo_and_clarity: envelope shorter than 4 s");
    }
    std::vector<double> acf(e.size(), 0.0);
    for (std::size_t lag = 0; lag < e.size(); ++lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < e.size(); ++t) s += e[t] * e[t + lag];
        acf[lag] = s;
    }
    if (acf[0] <= 0.0) return {};

    const double lag_per_bpm = 60.0 * envelope.frame_rate;
    const double min_lag = lag_per_bpm / kMaxTempoBpm;
    const double max_lag = lag_per_bpm / kMinTempoBpm;

    // Candidate periods are scored by the autocorrelation summed over their
    // first four multiples, which favours the true beat over its sub-multiples.
    constexpr int kHarmonics = 4;
    constexpr double kBpmStep = 0.01;
    double best_bpm = 0.0;
    double best_score = 0.0;
    const auto steps = static_cast<int>(std::lround((kMaxTempoBpm - kMinTempoBpm) / kBpmStep));
    for (int s = 0; s <= steps; ++s) {
        const double bpm = kMinTempoBpm + s * kBpmStep;
        const double period = lag_per_bpm / bpm;
        double score = 0.0;
        for (int m = 1; m <= kHarmonics; ++m) score += sample_at(acf, m * period);
        if (score > best_score) {
            best_score = score;
            best_bpm = bpm;
        }
    }

    double peak = 0.0;
    const auto first = static_cast<std::size_t>(std::ceil(min_lag));
    const auto last = std::min(static_cast<std::size_t>(std::floor(max_lag)), acf.size() - 1);
    for (std::size_t lag = first; lag <= last; ++lag) peak = std::max(peak, acf[lag]);

    return {best_bpm, std::clamp(peak / acf[0], 0.0, 1.0)};
}

std::array<double, 12> chromagram(const Spectrogram& spec) {
    constexpr double kLowHz = 65.406;    // C2
    constexpr double kHighHz = 2093.005; // C7
    const double bin_hz = spec.bin_frequency(1);
    std::array<double, 12> chroma{};
    for (std::size_t n = 0; n < spec.n_frames(); ++n) {
        // Peaks rather than raw bins: a window's main lobe spans several bins
        // and at low pitches would leak into the neighbouring pitch classes.
        for (const auto& p : spectral_peaks(spec.row(n), bin_hz, 0.0, spec.n_bins())) {
            if (p.freq < kLowHz || p.freq > kHighHz) continue;
            const auto midi = std::lround(69.0 + 12.0 * std::log2(p.freq / 440.0));
            chroma[static_cast<std::size_t>(((midi % 12) + 12) % 12)] += p.power;
        }
    }
    return chroma;
}

double mode_strength(const Spectrogram& spec, ModeSign sign) {
    const auto chroma = chromagram(spec);
    if (*std::max_element(chroma.begin(), chroma.end()) <= 0.0) return 0.0;
    const double major = best_key_correlation(chroma, kMajorKeyProfile);
    const double minor = best_key_correlation(chroma, kMinorKeyProfile);
    return sign == ModeSign::MajorMinusMinor ? major - minor : minor - major;
}

std::optional<double> estimate_f0(std::span<const double> frame, int sample_rate) {
    if (frame.empty() || sample_rate <= 0) return std::nullopt;
    const auto min_lag = static_cast<std::size_t>(std::ceil(sample_rate / kMaxPitchHz));
    const auto max_lag = std::min(static_cast<std::size_t>(std::floor(sample_rate / kMinPitchHz)), frame.size() - 2);
    if (max_lag <= min_lag) return std::nullopt;

    const std::size_t n = next_power_of_two(2 * frame.size());
    const FftPlan plan(n);
    std::vector<std::complex<double>> buf(n);
    std::copy(frame.begin(), frame.end(), buf.begin());
    plan.forward(buf);
    for (auto& c : buf) c = std::norm(c);
    plan.inverse(buf);
    const double energy = buf[0].real();
    if (energy <= 0.0) return std::nullopt;
    std::vector<double> acf(max_lag + 2);
    for (std::size_t lag = 0; lag < acf.size(); ++lag) acf[lag] = buf[lag].real() / energy;

    std::vector<std::size_t> peaks;
    double strongest = 0.0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
        if (acf[lag] > acf[lag - 1] && acf[lag] >= acf[lag + 1]) {
            peaks.push_back(lag);
            strongest = std::max(strongest, acf[lag]);
        }
    }
    if (strongest < kVoicingThreshold) return std::nullopt;
    for (std::size_t lag : peaks) {
        if (acf[lag] >= kPeriodCandidateRatio * strongest) {
            const double period = static_cast<double>(lag) + parabolic_offset(acf[lag - 1], acf[lag], acf[lag + 1]);
            return sample_rate / period;
        }
    }
    return std::nullopt;
}

double inharmonicity(const AudioPart& part, const Spectrogram& spec) {
    const auto frames = frame_signal(part, spec.plan());
    const double bin_hz = static_cast<double>(spec.sample_rate()) / static_cast<double>(spec.plan().fft_size);
    double total = 0.0;
    std::size_t voiced = 0;
    for (std::size_t n = 0; n < frames.size(); ++n) {
        const auto f0 = estimate_f0(frames[n], spec.sample_rate());
        if (!f0) continue;
        const auto peaks = spectral_peaks(spec.row(n), bin_hz);
        // The lag-domain pitch is coarse; a spectral peak close to it fixes
        // the fundamental precisely.
        double fundamental = *f0;
        double closest = kFundamentalSnap * fundamental;
        for (const auto& p : peaks) {
            const double d = std::abs(p.freq - *f0);
            if (d < closest) {
                closest = d;
                fundamental = p.freq;
            }
        }
        double weighted = 0.0;
        double power = 0.0;
        for (const auto& p : peaks) {
            const double ratio = p.freq / fundamental;
            const double deviation = std::abs(ratio - std::round(ratio));  // in [0, 0.5]
            weighted += p.power * 2.0 * deviation;
            power += p.power;
        }
        if (power <= 0.0) continue;
        total += weighted / power;
        ++voiced;
    }
    return voiced ? std::clamp(total / static_cast<double>(voiced), 0.0, 1.0) : 0.0;
}

double inharmonicity(const AudioPart& part) {
    const auto plan = make_frame_plan(part.buffer.samples.size(), kDefaultFrameCount);
    return inharmonicity(part, compute_spectrogram(part, plan));
}

}  // namespace moodtag
