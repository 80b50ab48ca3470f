#include "regcheck/random.hpp"

#include <cmath>
#include <numbers>

namespace regcheck {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

SpectralField random_band_limited(const Grid& grid, Rank rank, int max_mode, Rng& rng) {
    if (max_mode < 1 || 3 * max_mode >= grid.n())
        throw std::invalid_argument("random_band_limited: max_mode must be in [1, n/3)");
    SpectralField f(grid, rank);
    const int n = grid.n();
    auto index = [n](int m) { return m >= 0 ? m : m + n; };
    // Visit the half lattice m3 > 0, plus m3 = 0 with (m1, m2) > 0 lexicographically,
    // and set each conjugate partner explicitly.
    for (int c = 0; c < f.component_count(); ++c)
        for (int m1 = -max_mode; m1 <= max_mode; ++m1)
            for (int m2 = -max_mode; m2 <= max_mode; ++m2)
                for (int m3 = 0; m3 <= max_mode; ++m3) {
                    if (m3 == 0 && (m1 < 0 || (m1 == 0 && m2 <= 0))) continue;
                    const double k2 = m1 * m1 + m2 * m2 + m3 * m3;
                    const double scale = std::exp(-k2 / (2.0 * max_mode)) / std::sqrt(2.0);
                    const Complex v(scale * rng.normal(), scale * rng.normal());
                    f.at(c, index(m1), index(m2), m3) = v;
                    if (m3 == 0) f.at(c, index(-m1), index(-m2), 0) = std::conj(v);
                }
    return f;
}

SpectralField random_grid_field(const Grid& grid, Rank rank, Rng& rng) {
    std::vector<double> v(grid.physical_size() * components(rank));
    for (auto& x : v) x = rng.normal();
    return SpectralField::from_physical(grid, rank, v);
}

}  // namespace regcheck
