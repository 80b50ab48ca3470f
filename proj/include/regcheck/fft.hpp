#pragma once

#include <span>
#include <vector>

#include "regcheck/spectral_field.hpp"

namespace regcheck::fft {

/// Real-to-complex transform of one n^3 block, normalized by 1/n^3.
void forward(const Grid& grid, std::span<const double> in, std::span<Complex> out);
/// Complex-to-real synthesis of one half-spectrum block (no normalization).
void inverse(const Grid& grid, std::span<const Complex> in, std::span<double> out);

/// Grid samples of each component after 2/3-rule truncation.
std::vector<std::vector<double>> dealiased_samples(const SpectralField& f);
/// Transform per-component grid samples and truncate to the 2/3-rule cube.
SpectralField dealiased_field(const Grid& grid, Rank rank, const std::vector<std::vector<double>>& samples);

}  // namespace regcheck::fft
