#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "moodtag/features.hpp"
#include "moodtag/musical.hpp"
#include "moodtag/synthetic.hpp"

using namespace moodtag;

namespace {

AudioPart part_of(AudioBuffer b) { return synthetic::as_part(std::move(b)); }

double midi_hz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

AudioPart triad(int root, int third, int fifth) {
    return part_of(synthetic::tones({{midi_hz(root), 0.3}, {midi_hz(third), 0.3}, {midi_hz(fifth), 0.3}}, 15.0, 22050));
}

double mode_of(const AudioPart& part) {
    const auto spec = compute_spectrogram(part, make_frame_plan(part.buffer.samples.size()));
    return mode_strength(spec);
}

}  // namespace

TEST_CASE("onset envelope of silence and of a steady tone") {
    const auto silent = part_of({std::vector<double>(kCanonicalPartSamples, 0.0), 22050});
    const auto env = onset_envelope(silent);
    CHECK(env.values.size() == (kCanonicalPartSamples - 2048) / 1024 + 1);
    CHECK(env.frame_rate == doctest::Approx(22050.0 / 1024));
    for (double v : env.values) CHECK(v == 0.0);

    const auto steady = onset_envelope(part_of(synthetic::sine(440.0, 15.0, 22050)));
    // Against the tone's own Hann-windowed peak magnitude (amplitude * N / 4).
    const double tone_peak = 0.5 * 2048 / 4.0;
    double rest = 0.0;
    for (std::size_t i = 3; i < steady.values.size(); ++i) rest = std::max(rest, steady.values[i]);
    CHECK(rest < 1e-4 * tone_peak);
}

TEST_CASE("onset envelope peaks at clicks") {
    const auto env = onset_envelope(part_of(synthetic::click_train(120.0, 15.0, 22050)));
    std::vector<double> sorted = env.values;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    // Each click at t = 0.5 j lands in the frame starting just before it.
    std::size_t found = 0;
    for (int j = 1; j < 29; ++j) {
        const double t = 0.5 * j;
        const auto frame = static_cast<std::size_t>(t * 22050 / 1024);
        double local = 0.0;
        for (std::size_t f = frame > 1 ? frame - 1 : 0; f <= frame + 1 && f < env.values.size(); ++f) {
            local = std::max(local, env.values[f]);
        }
        if (local >= 10.0 * median && local > 0.0) ++found;
    }
    CHECK(found == 28);
}

TEST_CASE("click train tempo") {
    for (double bpm : {120.0, 90.0}) {
        CAPTURE(bpm);
        const auto t = tempo_and_clarity(onset_envelope(part_of(synthetic::click_train(bpm, 15.0, 22050))));
        CHECK(std::abs(t.bpm - bpm) <= 2.0);
        CHECK(t.clarity > 0.5);
        CHECK(t.clarity <= 1.0);
    }
}

TEST_CASE("tempo of silence and amplitude invariance") {
    const auto silent = tempo_and_clarity(onset_envelope(part_of({std::vector<double>(kCanonicalPartSamples), 22050})));
    CHECK(silent.bpm == 0.0);
    CHECK(silent.clarity == 0.0);

    auto clicks = synthetic::click_train(100.0, 15.0, 22050);
    const auto a = tempo_and_clarity(onset_envelope(part_of(clicks)));
    for (auto& x : clicks.samples) x *= 0.25;
    const auto b = tempo_and_clarity(onset_envelope(part_of(clicks)));
    CHECK(a.bpm == doctest::Approx(b.bpm));
    CHECK(a.clarity == doctest::Approx(b.clarity));

    OnsetEnvelope short_env{std::vector<double>(40, 1.0), 21.5};
    CHECK_THROWS_AS(tempo_and_clarity(short_env), std::invalid_argument);
}

TEST_CASE("chroma folds onto pitch classes") {
    const auto part = part_of(synthetic::sine(midi_hz(57), 15.0, 22050));  // A3
    const auto spec = compute_spectrogram(part, make_frame_plan(kCanonicalPartSamples));
    const auto chroma = chromagram(spec);
    CHECK(std::max_element(chroma.begin(), chroma.end()) - chroma.begin() == 9);
}

TEST_CASE("major and minor triads") {
    const double major = mode_of(triad(60, 64, 67));
    const double minor = mode_of(triad(60, 63, 67));
    CHECK(major > 0.0);
    CHECK(minor < 0.0);

    // One octave up keeps the sign.
    CHECK(mode_of(triad(72, 76, 79)) > 0.0);
    CHECK(mode_of(triad(72, 75, 79)) < 0.0);

    const auto spec = compute_spectrogram(triad(60, 64, 67), make_frame_plan(kCanonicalPartSamples));
    CHECK(mode_strength(spec, ModeSign::MinorMinusMajor) == doctest::Approx(-major));
}

TEST_CASE("mode of noise and silence") {
    CHECK(std::abs(mode_of(part_of(synthetic::white_noise(15.0, 22050, 7)))) < 0.2);
    CHECK(mode_of(part_of({std::vector<double>(kCanonicalPartSamples), 22050})) == 0.0);
}

TEST_CASE("pitch estimate") {
    const auto tone = synthetic::sine(220.0, 0.2, 22050);
    const auto f0 = estimate_f0(std::span<const double>(tone.samples).first(2667), 22050);
    REQUIRE(f0);
    CHECK(*f0 == doctest::Approx(220.0).epsilon(0.01));

    const std::vector<double> zeros(2667, 0.0);
    CHECK_FALSE(estimate_f0(zeros, 22050));
    const auto noise = synthetic::white_noise(0.2, 22050, 3);
    CHECK_FALSE(estimate_f0(std::span<const double>(noise.samples).first(2667), 22050));
}

TEST_CASE("inharmonicity ordering") {
    const double pure = inharmonicity(part_of(synthetic::sine(220.0, 15.0, 22050)));
    const double harmonic =
        inharmonicity(part_of(synthetic::tones({{220, 0.4}, {440, 0.2}, {660, 0.15}, {880, 0.1}}, 15.0, 22050)));
    const double inharmonic = inharmonicity(part_of(synthetic::tones({{220, 0.4}, {330, 0.2}}, 15.0, 22050)));
    CHECK(pure < 1e-3);
    CHECK(harmonic < 0.05);
    CHECK(inharmonic > harmonic);
    for (double v : {pure, harmonic, inharmonic}) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(inharmonicity(part_of({std::vector<double>(kCanonicalPartSamples), 22050})) == 0.0);
}
