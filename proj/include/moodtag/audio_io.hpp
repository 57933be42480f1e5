#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace moodtag {

inline constexpr int kCanonicalSampleRate = 22050;
inline constexpr double kPartSeconds = 15.0;
inline constexpr std::size_t kCanonicalPartSamples = 330750;  // 15 s at 22 050 Hz
inline constexpr double kDefaultPeakTarget = 0.99;

// Mono signal in [-1, 1].
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 0;

    double duration() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// A fixed-length excerpt of a recording; the unit every feature is computed on.
struct AudioPart {
    AudioBuffer buffer;
    std::string source_id;
    double start_offset = 0.0;  // seconds into the source
};

// Decodes a RIFF/WAVE byte image. Integer PCM (8/16/24/32-bit) and 32/64-bit
// IEEE float are accepted; channels are folded to mono by their mean.
// Throws DecodeError naming the chunk at fault.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);
AudioBuffer read_wav(const std::filesystem::path& path);

// 16-bit mono PCM encoding, the inverse of the decoder's 1/32768 scaling.
// Out-of-range samples saturate.
std::vector<std::uint8_t> encode_wav16(const AudioBuffer& buffer);
void write_wav16(const std::filesystem::path& path, const AudioBuffer& buffer);

// Kaiser-windowed sinc interpolation (64 taps). When downsampling the kernel
// cutoff follows the output Nyquist frequency.
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

// Scales the buffer so that max |x| == target_peak. Throws Error("silent input")
// for an all-zero buffer.
AudioBuffer normalize_peak(const AudioBuffer& buffer, double target_peak = kDefaultPeakTarget);

// Cuts [start, start + 15 s). Throws std::out_of_range when the window runs
// past the end of the buffer.
AudioPart extract_part(const AudioBuffer& buffer, double start_seconds, std::string source_id = {});

struct PreprocessOptions {
    int sample_rate = kCanonicalSampleRate;
    double peak_target = kDefaultPeakTarget;
};

// decode output -> resample -> cut -> peak normalize. The normalization runs
// last so the part always ends at exactly the target peak.
AudioPart preprocess(const AudioBuffer& decoded, double start_seconds, std::string source_id,
                     const PreprocessOptions& options = {});

}  // namespace moodtag
