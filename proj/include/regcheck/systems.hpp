#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "regcheck/spectral_field.hpp"

namespace regcheck {

/// Which PDE system a state belongs to. The tag fixes the unknowns:
///   sel_aux        (u vector, Vt = grad V tensor), with the director V frozen
///   mhd            (u, b vectors)
///   ns_stationary  (u)
///   harmonic_map   (V unit vector)
enum class SystemKind { sel_aux, mhd, ns_stationary, harmonic_map };

const char* kind_name(SystemKind kind);
/// Inverse of kind_name; throws std::invalid_argument on unknown names.
SystemKind parse_kind(std::string_view name);
std::vector<Rank> field_ranks(SystemKind kind);
std::vector<std::string> field_names(SystemKind kind);
/// True for unknowns that must stay divergence-free (u, b).
bool is_solenoidal(SystemKind kind, int field);

/// Unknowns of one system plus optional tensor forcing potentials.
///
/// F forces the velocity equation through div F; G forces the second
/// equation through div G (mhd, harmonic_map, the stationary SEL director
/// equation) or through grad(div G) in the auxiliary tensor equation.
struct SystemState {
    SystemKind kind = SystemKind::ns_stationary;
    std::vector<SpectralField> fields;
    std::optional<SpectralField> forcing_f;
    std::optional<SpectralField> forcing_g;
    /// The given director of the auxiliary system (sel_aux only).
    std::optional<SpectralField> frozen;

    /// All-zero unknowns of the right ranks, no forcing, no frozen field.
    static SystemState zero(SystemKind kind, const Grid& grid);

    const Grid& grid() const;
    /// Shape checks, divergence of solenoidal fields below div_tol (relative
    /// to max(1, coefficient scale)) and |V| = 1 at grid points within unit_tol.
    void validate(double div_tol = 1e-10, double unit_tol = 1e-10) const;
};

/// One quadratic or cubic integrand. `value` has the rank of the unknown of
/// `equation`; the evolution reads d_t x = Lap x + sum sign * [P] value + force,
/// with the Leray projection applied when `projected` is set.
struct NonlinearTerm {
    std::string name;
    int equation = 0;
    double sign = 1.0;
    bool projected = false;
    SpectralField value;
};

struct NonlinearTerms {
    SystemKind kind = SystemKind::ns_stationary;
    std::vector<NonlinearTerm> terms;

    /// Lookup by name; throws std::out_of_range if absent.
    const NonlinearTerm& get(std::string_view name) const;
    /// Per-equation sum of sign * [P] value.
    std::vector<SpectralField> tendencies(const Grid& grid) const;
};

/// Dealiased nonlinear integrands of the evolution form of each system.
///   sel_aux: B1 = div(u (x) u), B2 = div(Vt . Vt), B3 = grad(u Vt), B4 = grad(|Vt|^2 V)
///   mhd:     B1 = div(u (x) u), B2 = div(b (x) b), B3 = div(b (x) u), B4 = div(u (x) b)
///   ns_stationary: B1 = div(u (x) u);  harmonic_map: B1 = |grad V|^2 V
/// Throws std::invalid_argument for sel_aux without a frozen director.
NonlinearTerms assemble_nonlinear(const SystemState& state);

/// Per-equation force of the evolution form: P div F and, for the second
/// equation, grad(div G) (sel_aux) or div G (mhd, harmonic_map). Zero when absent.
std::vector<SpectralField> forcing_terms(const SystemState& state);

/// (A . B)_{ij} = sum_k A_ik B_jk on the grid, dealiased.
SpectralField contract_rows(const SpectralField& a, const SpectralField& b);
/// (u A)_j = sum_l u_l A_lj, dealiased.
SpectralField vector_times_tensor(const SpectralField& u, const SpectralField& a);
/// |A|^2 v with the cubic formed on the grid and truncated once at the end.
SpectralField squared_norm_times(const SpectralField& a, const SpectralField& v);
SpectralField transpose(const SpectralField& tensor);

/// Quadratic momentum stress N of the stationary velocity equation
/// -Lap U + div N + grad P = div F:  U(x)U + gradV.gradV (sel_aux), U(x)U - B(x)B (mhd), U(x)U (ns).
SpectralField momentum_stress(const SystemState& state);
/// Zero-mean pressure (-Lap)^{-1} div div (N - F). Throws for harmonic_map.
SpectralField momentum_pressure(const SystemState& state);

/// Residuals of the stationary equations in direct (differential) form,
/// left side minus forcing, one vector field per equation. For sel_aux the
/// director equation uses the frozen V, and grad V replaces Vt.
std::vector<SpectralField> stationary_defect(const SystemState& state);

/// Forcing potentials (F, G) that make the target an exact stationary
/// solution. A vector residual r is lifted to F_ij = -d_j (-Lap)^{-1} r_i, so
/// that div F = r. Throws std::invalid_argument when the target violates its
/// invariants or when a residual has a nonzero mean (no divergence-form lift).
std::pair<SpectralField, SpectralField> manufacture_forcing(const SystemState& target);
/// Copy of the target with manufactured forcing attached.
SystemState with_manufactured_forcing(const SystemState& target);

/// amp (sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0) in units of the box wavenumber.
SpectralField taylor_green(const Grid& grid, double amp);
/// (cos x3, sin x3, 0): unit length, harmonic-map solution.
SpectralField helix_director(const Grid& grid);
/// amp * ABC flow with A = B = C = 1 (an eigenfield of curl).
SpectralField abc_field(const Grid& grid, double amp);
/// Closed form of the Taylor-Green pressure, amp^2/16 (cos 2x1 + cos 2x2)(cos 2x3 + 2).
SpectralField taylor_green_pressure(const Grid& grid, double amp);

/// Steady targets (no forcing attached yet).
SystemState steady_target(SystemKind kind, const Grid& grid, double amp);

}  // namespace regcheck
