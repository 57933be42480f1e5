#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace moodtag {

enum class StdConvention {
    Population,  // divisor N
    Sample,      // divisor N - 1
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

// Two-pass mean and standard deviation. Empty input yields {0, 0}; the
// sample convention on a single value yields std 0.
inline MeanStd mean_std(std::span<const double> xs, StdConvention convention = StdConvention::Population) {
    if (xs.empty()) return {};
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const std::size_t n = xs.size();
    const double divisor = convention == StdConvention::Sample ? static_cast<double>(n - 1) : static_cast<double>(n);
    return {mean, divisor > 0.0 ? std::sqrt(ss / divisor) : 0.0};
}

}  // namespace moodtag
