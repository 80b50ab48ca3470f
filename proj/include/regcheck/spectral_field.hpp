#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace regcheck {

using Complex = std::complex<double>;

/// Uniform periodic grid of n^3 points on the box [0, L)^3.
///
/// Spectral storage follows the real-to-complex layout: n x n x (n/2 + 1)
/// coefficients with the last axis holding the non-negative frequencies.
class Grid {
public:
    Grid(int n, double length);
    /// n = 32, L = 2*pi.
    static Grid standard();

    int n() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return length_ / n_; }
    double fundamental() const;  // 2*pi / L

    std::size_t physical_size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
    std::size_t spectral_size() const { return static_cast<std::size_t>(n_) * n_ * (n_ / 2 + 1); }
    int half() const { return n_ / 2 + 1; }

    /// Integer frequency of index i on a full axis: i for i < n/2, i - n otherwise.
    int frequency(int index) const { return index < n_ / 2 ? index : index - n_; }
    /// Frequency triple of spectral index (i1, i2, i3), i3 in [0, n/2].
    std::array<int, 3> frequencies(int i1, int i2, int i3) const {
        return {frequency(i1), frequency(i2), i3 == n_ / 2 ? -n_ / 2 : i3};
    }
    /// Wavenumber used by every multiplier. The Nyquist index -n/2 has no
    /// conjugate partner, so it is assigned wavenumber 0 (kept, never differentiated).
    double wavenumber(int m) const { return m == -n_ / 2 ? 0.0 : fundamental() * m; }
    std::array<double, 3> wavevector(int i1, int i2, int i3) const;

    /// True when any axis sits on the unpaired Nyquist index -n/2.
    bool is_nyquist(int i1, int i2, int i3) const { return i1 == n_ / 2 || i2 == n_ / 2 || i3 == n_ / 2; }

    /// Largest per-axis |m| kept by the 2/3 rule.
    int dealias_cutoff() const;

    std::size_t spectral_index(int i1, int i2, int i3) const {
        return (static_cast<std::size_t>(i1) * n_ + i2) * half() + i3;
    }
    std::size_t physical_index(int i1, int i2, int i3) const {
        return (static_cast<std::size_t>(i1) * n_ + i2) * n_ + i3;
    }
    /// Grid coordinate of index i along any axis.
    double coordinate(int i) const { return spacing() * i; }

    bool operator==(const Grid& other) const = default;

private:
    int n_;
    double length_;
};

enum class Rank { scalar = 1, vector = 3, tensor = 9 };

constexpr int components(Rank r) { return static_cast<int>(r); }
const char* rank_name(Rank r);

/// Tensor component (i, j), row-major.
constexpr int tensor_component(int i, int j) { return 3 * i + j; }

/// Derivative multi-index (a1, a2, a3).
struct MultiIndex {
    std::array<int, 3> exponents{0, 0, 0};

    static constexpr int default_max_order = 4;

    MultiIndex() = default;
    MultiIndex(int a1, int a2, int a3, int max_order = default_max_order);

    int order() const { return exponents[0] + exponents[1] + exponents[2]; }
    int operator[](int axis) const { return exponents[axis]; }
    MultiIndex operator+(const MultiIndex& other) const;
    MultiIndex operator-(const MultiIndex& other) const;
    /// Componentwise <=.
    bool dominated_by(const MultiIndex& other) const;
    bool operator==(const MultiIndex& other) const = default;

    static MultiIndex unit(int axis);
    /// All multi-indices of exactly the given order, in lexicographically descending order.
    static std::vector<MultiIndex> of_order(int order);
    /// All beta <= alpha componentwise.
    static std::vector<MultiIndex> below(const MultiIndex& alpha);
};

/// Product of per-axis binomial coefficients C(alpha, beta).
double binomial(const MultiIndex& alpha, const MultiIndex& beta);

/// Periodic scalar, vector or tensor field held as Fourier-series coefficients.
///
/// Coefficients are normalized so that f(x) = sum_k c_k exp(i k.x): the zero
/// mode is the grid mean and mean(|f|^2) equals the coefficient energy.
class SpectralField {
public:
    SpectralField(Grid grid, Rank rank);

    /// Real grid samples, component-major, each component n^3 row-major.
    static SpectralField from_physical(const Grid& grid, Rank rank, std::span<const double> values);

    const Grid& grid() const { return grid_; }
    Rank rank() const { return rank_; }
    int component_count() const { return components(rank_); }

    std::span<Complex> component(int c) {
        return {coeffs_.data() + c * grid_.spectral_size(), grid_.spectral_size()};
    }
    std::span<const Complex> component(int c) const {
        return {coeffs_.data() + c * grid_.spectral_size(), grid_.spectral_size()};
    }
    std::span<Complex> coefficients() { return coeffs_; }
    std::span<const Complex> coefficients() const { return coeffs_; }

    Complex& at(int c, int i1, int i2, int i3) {
        return coeffs_[c * grid_.spectral_size() + grid_.spectral_index(i1, i2, i3)];
    }
    const Complex& at(int c, int i1, int i2, int i3) const {
        return coeffs_[c * grid_.spectral_size() + grid_.spectral_index(i1, i2, i3)];
    }

    /// Physical samples of all components, component-major.
    std::vector<double> to_physical() const;
    /// Physical samples of one component.
    std::vector<double> component_to_physical(int c) const;

    /// Extract one component as a scalar field.
    SpectralField scalar_component(int c) const;
    /// Overwrite component c with a scalar field.
    void set_component(int c, const SpectralField& scalar);

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
    SpectralField operator-() const;

    /// a*x + y, componentwise.
    void axpy(double a, const SpectralField& x);

    /// Max coefficient modulus over all components.
    double max_abs_coefficient() const;
    /// Grid mean of component c.
    double mean(int c = 0) const { return component(c)[0].real(); }
    /// Sum of |c_k|^2 over the full (Hermitian-expanded) lattice, all components.
    double energy() const;

    /// Zero every mode outside the 2/3-rule cube.
    void dealias();
    /// Zero the k = 0 mode of every component.
    void remove_mean();

    /// Largest deviation from Hermitian symmetry on the self-conjugate planes,
    /// relative to the largest coefficient.
    double hermitian_defect() const;

    /// Spectral evaluation at an arbitrary point (trigonometric interpolation).
    double evaluate(int c, const std::array<double, 3>& x) const;

    static SpectralField zeros_like(const SpectralField& f) { return SpectralField(f.grid_, f.rank_); }

private:
    Grid grid_;
    Rank rank_;
    std::vector<Complex> coeffs_;
};

/// Multiplicity of a stored half-spectrum coefficient in the full lattice (1 or 2).
inline double hermitian_weight(const Grid& g, int i3) {
    return (i3 == 0 || i3 == g.n() / 2) ? 1.0 : 2.0;
}

/// Visit every stored mode as fn(spectral_index, wavevector, i3).
template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
    const int n = g.n(), h = g.half();
    std::vector<double> full(n), last(h);
    for (int i = 0; i < n; ++i) full[i] = g.wavenumber(g.frequency(i));
    for (int i = 0; i < h; ++i) last[i] = g.wavenumber(i == n / 2 ? -n / 2 : i);
    std::size_t idx = 0;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < h; ++i3) fn(idx++, std::array<double, 3>{full[i1], full[i2], last[i3]}, i3);
}

/// |k| for a wavevector.
inline double norm_of(const std::array<double, 3>& k) { return std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); }

void require_same_grid(const SpectralField& a, const SpectralField& b, const char* what);
void require_rank(const SpectralField& f, Rank r, const char* what);

/// Sample a closed-form field on the grid. `fn(x, out)` writes every
/// component at point x.
SpectralField sample_field(const Grid& grid, Rank rank,
                           const std::function<void(const std::array<double, 3>&, std::span<double>)>& fn);

/// Spectral derivative d^alpha applied componentwise: multiplier (i k)^alpha.
SpectralField derivative(const SpectralField& f, const MultiIndex& alpha);
/// Gradient: scalar -> vector, vector v -> tensor (grad v)_{ij} = d_i v_j.
SpectralField gradient(const SpectralField& f);
/// Divergence: vector -> scalar, tensor A -> vector (div A)_i = sum_j d_j A_{ij}.
SpectralField divergence(const SpectralField& f);
/// Curl of a vector field.
SpectralField curl(const SpectralField& f);
SpectralField laplacian(const SpectralField& f);

/// Pointwise product with 2/3-rule dealiasing. Scalar times any rank, or two
/// scalars. Inputs are truncated, multiplied on the grid and the result truncated.
SpectralField pointwise_product(const SpectralField& f, const SpectralField& g);

/// Pointwise Euclidean magnitude of all components, on the grid.
std::vector<double> magnitude(const SpectralField& f);

/// Outer product (a (x) b)_{ij} = a_i b_j of two vector fields, dealiased.
SpectralField outer(const SpectralField& a, const SpectralField& b);

}  // namespace regcheck
