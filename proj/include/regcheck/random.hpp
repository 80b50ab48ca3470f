#pragma once

#include <cstdint>
#include <random>

#include "regcheck/spectral_field.hpp"

namespace regcheck {

/// The single random source for every ensemble. The uniform and normal
/// conversions are written out here instead of using std distributions, whose
/// output is implementation-defined, so a seed gives the same fields on any
/// standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal by Box-Muller; the second variate is cached.
    double normal();
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Zero-mean random field whose modes satisfy |m_i| <= max_mode on every axis,
/// with Gaussian coefficients decaying like exp(-|m|^2 / (2 max_mode)).
///
/// The coefficients depend only on (seed state, max_mode), never on n, so the
/// same draw on two grids describes the same continuous field.
SpectralField random_band_limited(const Grid& grid, Rank rank, int max_mode, Rng& rng);

/// Random field with i.i.d. normal grid samples (not band-limited).
SpectralField random_grid_field(const Grid& grid, Rank rank, Rng& rng);

}  // namespace regcheck
