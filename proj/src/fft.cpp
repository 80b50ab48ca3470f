#include "regcheck/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace regcheck::fft {
namespace {

struct Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
};

// FFTW_ESTIMATE keeps plan selection independent of timing, so transforms are
// bit-reproducible run to run.
const Plans& plans_for(int n) {
    static std::mutex mutex;
    static std::map<int, Plans> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    const std::size_t real_size = static_cast<std::size_t>(n) * n * n;
    const std::size_t complex_size = static_cast<std::size_t>(n) * n * (n / 2 + 1);
    double* r = fftw_alloc_real(real_size);
    fftw_complex* c = fftw_alloc_complex(complex_size);
    Plans p;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.r2c = fftw_plan_dft_r2c_3d(n, n, n, r, c, flags);
    p.c2r = fftw_plan_dft_c2r_3d(n, n, n, c, r, flags | FFTW_DESTROY_INPUT);
    fftw_free(r);
    fftw_free(c);
    if (!p.r2c || !p.c2r) throw std::runtime_error("fftw: plan creation failed");
    return cache.emplace(n, p).first->second;
}

}  // namespace

void forward(const Grid& grid, std::span<const double> in, std::span<Complex> out) {
    if (in.size() != grid.physical_size() || out.size() != grid.spectral_size())
        throw std::invalid_argument("fft::forward: size mismatch");
    const Plans& p = plans_for(grid.n());
    // r2c does not modify its input, but the FFTW signature is non-const.
    fftw_execute_dft_r2c(p.r2c, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / static_cast<double>(grid.physical_size());
    for (auto& v : out) v *= scale;
}

void inverse(const Grid& grid, std::span<const Complex> in, std::span<double> out) {
    if (out.size() != grid.physical_size() || in.size() != grid.spectral_size())
        throw std::invalid_argument("fft::inverse: size mismatch");
    const Plans& p = plans_for(grid.n());
    std::vector<Complex> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

std::vector<std::vector<double>> dealiased_samples(const SpectralField& f) {
    SpectralField t = f;
    t.dealias();
    std::vector<std::vector<double>> out(t.component_count());
    for (int c = 0; c < t.component_count(); ++c) out[c] = t.component_to_physical(c);
    return out;
}

SpectralField dealiased_field(const Grid& grid, Rank rank, const std::vector<std::vector<double>>& samples) {
    if (static_cast<int>(samples.size()) != components(rank))
        throw std::invalid_argument("dealiased_field: component count mismatch");
    SpectralField out(grid, rank);
    for (int c = 0; c < components(rank); ++c) forward(grid, samples[c], out.component(c));
    out.dealias();
    return out;
}

}  // namespace regcheck::fft
