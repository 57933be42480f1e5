#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace moodtag {

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

// Iterative radix-2 decimation-in-time FFT of a fixed power-of-two size.
// Twiddles and the bit-reversal permutation are computed once per plan.
class FftPlan {
public:
    explicit FftPlan(std::size_t size);

    std::size_t size() const { return size_; }

    // In place. The inverse is unscaled: inverse(forward(x)) == size * x.
    void forward(std::span<std::complex<double>> data) const;
    void inverse(std::span<std::complex<double>> data) const;

private:
    void transform(std::span<std::complex<double>> data, bool inverse) const;

    std::size_t size_;
    std::vector<std::complex<double>> twiddles_;
    std::vector<std::size_t> bit_reverse_;
};

}  // namespace moodtag
