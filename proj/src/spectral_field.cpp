#include "regcheck/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "regcheck/fft.hpp"

namespace regcheck {

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int n, double length) : n_(n), length_(length) {
    if (n < 8 || (n & (n - 1)) != 0)
        throw std::invalid_argument("Grid: n must be a power of two >= 8, got " + std::to_string(n));
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("Grid: box length must be positive");
}

Grid Grid::standard() { return Grid(32, 2.0 * std::numbers::pi); }

double Grid::fundamental() const { return 2.0 * std::numbers::pi / length_; }

std::array<double, 3> Grid::wavevector(int i1, int i2, int i3) const {
    const auto m = frequencies(i1, i2, i3);
    return {wavenumber(m[0]), wavenumber(m[1]), wavenumber(m[2])};
}

int Grid::dealias_cutoff() const { return (n_ - 1) / 3; }

const char* rank_name(Rank r) {
    switch (r) {
        case Rank::scalar: return "scalar";
        case Rank::vector: return "vector";
        case Rank::tensor: return "tensor";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// MultiIndex

MultiIndex::MultiIndex(int a1, int a2, int a3, int max_order) : exponents{a1, a2, a3} {
    if (a1 < 0 || a2 < 0 || a3 < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    if (order() > max_order)
        throw std::invalid_argument("MultiIndex: order " + std::to_string(order()) + " exceeds maximum " +
                                    std::to_string(max_order));
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
    MultiIndex r;
    for (int a = 0; a < 3; ++a) r.exponents[a] = exponents[a] + o.exponents[a];
    return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const {
    MultiIndex r;
    for (int a = 0; a < 3; ++a) {
        r.exponents[a] = exponents[a] - o.exponents[a];
        if (r.exponents[a] < 0) throw std::invalid_argument("MultiIndex: difference is not a multi-index");
    }
    return r;
}

bool MultiIndex::dominated_by(const MultiIndex& o) const {
    for (int a = 0; a < 3; ++a)
        if (exponents[a] > o.exponents[a]) return false;
    return true;
}

MultiIndex MultiIndex::unit(int axis) {
    MultiIndex r;
    r.exponents[axis] = 1;
    return r;
}

std::vector<MultiIndex> MultiIndex::of_order(int order) {
    std::vector<MultiIndex> out;
    for (int a1 = order; a1 >= 0; --a1)
        for (int a2 = order - a1; a2 >= 0; --a2) {
            MultiIndex m;
            m.exponents = {a1, a2, order - a1 - a2};
            out.push_back(m);
        }
    return out;
}

std::vector<MultiIndex> MultiIndex::below(const MultiIndex& alpha) {
    std::vector<MultiIndex> out;
    for (int a1 = 0; a1 <= alpha[0]; ++a1)
        for (int a2 = 0; a2 <= alpha[1]; ++a2)
            for (int a3 = 0; a3 <= alpha[2]; ++a3) {
                MultiIndex m;
                m.exponents = {a1, a2, a3};
                out.push_back(m);
            }
    return out;
}

double binomial(const MultiIndex& alpha, const MultiIndex& beta) {
    double r = 1.0;
    for (int a = 0; a < 3; ++a) {
        const int n = alpha[a], k = beta[a];
        if (k < 0 || k > n) return 0.0;
        double c = 1.0;
        for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
        r *= c;
    }
    return r;
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(Grid grid, Rank rank)
    : grid_(grid), rank_(rank), coeffs_(grid.spectral_size() * components(rank)) {}

SpectralField SpectralField::from_physical(const Grid& grid, Rank rank, std::span<const double> values) {
    const std::size_t block = grid.physical_size();
    if (values.size() != block * components(rank))
        throw std::invalid_argument("transform_to_spectral: expected " + std::to_string(block * components(rank)) +
                                    " samples, got " + std::to_string(values.size()));
    SpectralField f(grid, rank);
    for (int c = 0; c < components(rank); ++c) fft::forward(grid, values.subspan(c * block, block), f.component(c));
    return f;
}

std::vector<double> SpectralField::component_to_physical(int c) const {
    std::vector<double> out(grid_.physical_size());
    fft::inverse(grid_, component(c), out);
    return out;
}

std::vector<double> SpectralField::to_physical() const {
    const std::size_t block = grid_.physical_size();
    std::vector<double> out(block * component_count());
    for (int c = 0; c < component_count(); ++c)
        fft::inverse(grid_, component(c), std::span<double>(out).subspan(c * block, block));
    return out;
}

SpectralField SpectralField::scalar_component(int c) const {
    SpectralField out(grid_, Rank::scalar);
    std::ranges::copy(component(c), out.component(0).begin());
    return out;
}

void SpectralField::set_component(int c, const SpectralField& scalar) {
    require_rank(scalar, Rank::scalar, "set_component");
    require_same_grid(*this, scalar, "set_component");
    std::ranges::copy(scalar.component(0), component(c).begin());
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    require_same_grid(*this, o, "operator+=");
    if (rank_ != o.rank_) throw std::invalid_argument("operator+=: rank mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    require_same_grid(*this, o, "operator-=");
    if (rank_ != o.rank_) throw std::invalid_argument("operator-=: rank mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& v : coeffs_) v *= s;
    return *this;
}

SpectralField SpectralField::operator-() const {
    SpectralField r = *this;
    r *= -1.0;
    return r;
}

void SpectralField::axpy(double a, const SpectralField& x) {
    require_same_grid(*this, x, "axpy");
    if (rank_ != x.rank_) throw std::invalid_argument("axpy: rank mismatch");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * x.coeffs_[i];
}

double SpectralField::max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& v : coeffs_) m = std::max(m, std::abs(v));
    return m;
}

double SpectralField::energy() const {
    double e = 0.0;
    const int n = grid_.n(), h = grid_.half();
    for (int c = 0; c < component_count(); ++c) {
        auto comp = component(c);
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < h; ++i3)
                    e += hermitian_weight(grid_, i3) * std::norm(comp[grid_.spectral_index(i1, i2, i3)]);
    }
    return e;
}

void SpectralField::dealias() {
    const int n = grid_.n(), h = grid_.half(), K = grid_.dealias_cutoff();
    std::vector<char> keep_full(n), keep_last(h);
    for (int i = 0; i < n; ++i) keep_full[i] = std::abs(grid_.frequency(i)) <= K;
    for (int i = 0; i < h; ++i) keep_last[i] = i <= K;
    for (int c = 0; c < component_count(); ++c) {
        Complex* comp = component(c).data();
        std::size_t idx = 0;
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2) {
                const bool row = keep_full[i1] && keep_full[i2];
                for (int i3 = 0; i3 < h; ++i3, ++idx)
                    if (!row || !keep_last[i3]) comp[idx] = 0.0;
            }
    }
}

void SpectralField::remove_mean() {
    for (int c = 0; c < component_count(); ++c) component(c)[0] = 0.0;
}

double SpectralField::hermitian_defect() const {
    const int n = grid_.n();
    double defect = 0.0;
    for (int c = 0; c < component_count(); ++c) {
        auto comp = component(c);
        for (int i3 : {0, n / 2})
            for (int i1 = 0; i1 < n; ++i1)
                for (int i2 = 0; i2 < n; ++i2) {
                    const int j1 = (n - i1) % n, j2 = (n - i2) % n;
                    const Complex a = comp[grid_.spectral_index(i1, i2, i3)];
                    const Complex b = comp[grid_.spectral_index(j1, j2, i3)];
                    defect = std::max(defect, std::abs(a - std::conj(b)));
                }
    }
    const double scale = max_abs_coefficient();
    return scale > 0.0 ? defect / scale : 0.0;
}

double SpectralField::evaluate(int c, const std::array<double, 3>& x) const {
    const int n = grid_.n(), h = grid_.half();
    // Per-axis phase tables; the Nyquist index uses the real cosine so that the
    // interpolant is real off the grid.
    std::array<std::vector<Complex>, 3> phase;
    for (int a = 0; a < 3; ++a) {
        phase[a].resize(n);
        for (int i = 0; i < n; ++i) {
            const int m = grid_.frequency(i);
            const double arg = grid_.fundamental() * m * x[a];
            phase[a][i] = (m == -n / 2) ? Complex(std::cos(arg), 0.0) : std::polar(1.0, arg);
        }
    }
    auto comp = component(c);
    double sum = 0.0;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2) {
            const Complex p12 = phase[0][i1] * phase[1][i2];
            for (int i3 = 0; i3 < h; ++i3) {
                const Complex v = comp[grid_.spectral_index(i1, i2, i3)];
                if (v == Complex(0.0, 0.0)) continue;
                sum += hermitian_weight(grid_, i3) * (v * p12 * phase[2][i3]).real();
            }
        }
    return sum;
}

void require_same_grid(const SpectralField& a, const SpectralField& b, const char* what) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

void require_rank(const SpectralField& f, Rank r, const char* what) {
    if (f.rank() != r)
        throw std::invalid_argument(std::string(what) + ": expected " + rank_name(r) + " field, got " +
                                    rank_name(f.rank()));
}

SpectralField sample_field(const Grid& grid, Rank rank,
                           const std::function<void(const std::array<double, 3>&, std::span<double>)>& fn) {
    const int n = grid.n(), nc = components(rank);
    const std::size_t block = grid.physical_size();
    std::vector<double> values(block * nc);
    std::vector<double> point(nc);
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3) {
                fn({grid.coordinate(i1), grid.coordinate(i2), grid.coordinate(i3)}, point);
                const std::size_t p = grid.physical_index(i1, i2, i3);
                for (int c = 0; c < nc; ++c) values[c * block + p] = point[c];
            }
    return SpectralField::from_physical(grid, rank, values);
}

// ---------------------------------------------------------------------------
// Differential operators

namespace {

// (i k)^alpha for one wavevector.
Complex derivative_multiplier(const std::array<double, 3>& k, const MultiIndex& alpha) {
    Complex m(1.0, 0.0);
    for (int a = 0; a < 3; ++a)
        for (int p = 0; p < alpha[a]; ++p) m *= Complex(0.0, k[a]);
    return m;
}

}  // namespace

SpectralField derivative(const SpectralField& f, const MultiIndex& alpha) {
    SpectralField out = f;
    if (alpha.order() == 0) return out;
    const Grid& g = f.grid();
    for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const Complex m = derivative_multiplier(k, alpha);
        for (int c = 0; c < out.component_count(); ++c) out.component(c)[idx] *= m;
    });
    return out;
}

SpectralField gradient(const SpectralField& f) {
    if (f.rank() == Rank::tensor) throw std::invalid_argument("gradient: tensor input not supported");
    const Grid& g = f.grid();
    const Rank out_rank = f.rank() == Rank::scalar ? Rank::vector : Rank::tensor;
    SpectralField out(g, out_rank);
    const int nc = f.component_count();
    for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < nc; ++j) out.component(i * nc + j)[idx] = Complex(0.0, k[i]) * f.component(j)[idx];
    });
    return out;
}

SpectralField divergence(const SpectralField& f) {
    const Grid& g = f.grid();
    if (f.rank() == Rank::vector) {
        SpectralField out(g, Rank::scalar);
        for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int) {
            Complex s = 0.0;
            for (int j = 0; j < 3; ++j) s += Complex(0.0, k[j]) * f.component(j)[idx];
            out.component(0)[idx] = s;
        });
        return out;
    }
    if (f.rank() == Rank::tensor) {
        SpectralField out(g, Rank::vector);
        for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int) {
            for (int i = 0; i < 3; ++i) {
                Complex s = 0.0;
                for (int j = 0; j < 3; ++j) s += Complex(0.0, k[j]) * f.component(tensor_component(i, j))[idx];
                out.component(i)[idx] = s;
            }
        });
        return out;
    }
    throw std::invalid_argument("divergence: scalar input");
}

SpectralField curl(const SpectralField& f) {
    require_rank(f, Rank::vector, "curl");
    const Grid& g = f.grid();
    SpectralField out(g, Rank::vector);
    for_each_mode(g, [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const Complex a = f.component(0)[idx], b = f.component(1)[idx], c = f.component(2)[idx];
        const Complex I(0.0, 1.0);
        out.component(0)[idx] = I * (k[1] * c - k[2] * b);
        out.component(1)[idx] = I * (k[2] * a - k[0] * c);
        out.component(2)[idx] = I * (k[0] * b - k[1] * a);
    });
    return out;
}

SpectralField laplacian(const SpectralField& f) {
    SpectralField out = f;
    for_each_mode(f.grid(), [&](std::size_t idx, const std::array<double, 3>& k, int) {
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        for (int c = 0; c < out.component_count(); ++c) out.component(c)[idx] *= -k2;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Products

SpectralField pointwise_product(const SpectralField& f, const SpectralField& g) {
    require_same_grid(f, g, "pointwise_product");
    const SpectralField* scalar = nullptr;
    const SpectralField* other = nullptr;
    if (f.rank() == Rank::scalar) {
        scalar = &f;
        other = &g;
    } else if (g.rank() == Rank::scalar) {
        scalar = &g;
        other = &f;
    } else {
        throw std::invalid_argument("pointwise_product: one factor must be scalar");
    }
    const auto s = fft::dealiased_samples(*scalar);
    auto o = fft::dealiased_samples(*other);
    for (auto& comp : o)
        for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= s[0][i];
    return fft::dealiased_field(f.grid(), other->rank(), o);
}

std::vector<double> magnitude(const SpectralField& f) {
    std::vector<double> out(f.grid().physical_size(), 0.0);
    for (int c = 0; c < f.component_count(); ++c) {
        const auto v = f.component_to_physical(c);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i] * v[i];
    }
    for (auto& v : out) v = std::sqrt(v);
    return out;
}

SpectralField outer(const SpectralField& a, const SpectralField& b) {
    require_rank(a, Rank::vector, "outer");
    require_rank(b, Rank::vector, "outer");
    require_same_grid(a, b, "outer");
    const auto pa = fft::dealiased_samples(a);
    const auto pb = fft::dealiased_samples(b);
    std::vector<std::vector<double>> t(9, std::vector<double>(a.grid().physical_size()));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t p = 0; p < t[0].size(); ++p) t[tensor_component(i, j)][p] = pa[i][p] * pb[j][p];
    return fft::dealiased_field(a.grid(), Rank::tensor, t);
}

}  // namespace regcheck
