#include "regcheck/systems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "regcheck/fft.hpp"
#include "regcheck/operators.hpp"

namespace regcheck {

namespace {

using Samples = std::vector<std::vector<double>>;

Samples zero_samples(const Grid& g, int count) { return Samples(count, std::vector<double>(g.physical_size(), 0.0)); }

void require_tensor_forcing(const std::optional<SpectralField>& f, const Grid& g, const char* what) {
    if (!f) return;
    if (f->rank() != Rank::tensor) throw std::invalid_argument(std::string(what) + " must be a 3x3 tensor field");
    if (!(f->grid() == g)) throw std::invalid_argument(std::string(what) + " lives on a different grid");
}

// Lift a zero-mean vector r to the tensor F_ij = -d_j (-Lap)^{-1} r_i, so div F = r.
SpectralField lift_to_tensor(const SpectralField& r) {
    return -transpose(gradient(inv_laplacian(r)));
}

double scale_of(const SpectralField& f) { return std::max(1.0, f.max_abs_coefficient()); }

// Grid-level kernels shared by the public product helpers and the fused
// assembly, which transforms every unknown to the grid once per call.

// a_i b_j; when `symmetric` only the upper triangle is formed and transformed.
SpectralField outer_of_samples(const Grid& g, const Samples& a, const Samples& b, bool symmetric) {
    SpectralField out(g, Rank::tensor);
    std::vector<double> buf(g.physical_size());
    for (int i = 0; i < 3; ++i)
        for (int j = symmetric ? i : 0; j < 3; ++j) {
            for (std::size_t p = 0; p < buf.size(); ++p) buf[p] = a[i][p] * b[j][p];
            fft::forward(g, buf, out.component(tensor_component(i, j)));
            if (symmetric && j != i) {
                auto src = out.component(tensor_component(i, j));
                std::copy(src.begin(), src.end(), out.component(tensor_component(j, i)).begin());
            }
        }
    out.dealias();
    return out;
}

// sum_k A_ik A_jk, symmetric in (i, j).
SpectralField row_gram_of_samples(const Grid& g, const Samples& a) {
    SpectralField out(g, Rank::tensor);
    std::vector<double> buf(g.physical_size());
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            std::fill(buf.begin(), buf.end(), 0.0);
            for (int k = 0; k < 3; ++k) {
                const auto& x = a[tensor_component(i, k)];
                const auto& y = a[tensor_component(j, k)];
                for (std::size_t p = 0; p < buf.size(); ++p) buf[p] += x[p] * y[p];
            }
            fft::forward(g, buf, out.component(tensor_component(i, j)));
            if (j != i) {
                auto src = out.component(tensor_component(i, j));
                std::copy(src.begin(), src.end(), out.component(tensor_component(j, i)).begin());
            }
        }
    out.dealias();
    return out;
}

SpectralField vector_times_tensor_of_samples(const Grid& g, const Samples& u, const Samples& a) {
    auto out = zero_samples(g, 3);
    for (int j = 0; j < 3; ++j)
        for (int l = 0; l < 3; ++l) {
            const auto& x = u[l];
            const auto& y = a[tensor_component(l, j)];
            for (std::size_t p = 0; p < x.size(); ++p) out[j][p] += x[p] * y[p];
        }
    return fft::dealiased_field(g, Rank::vector, out);
}

SpectralField squared_norm_times_of_samples(const Grid& g, const Samples& a, Samples v) {
    std::vector<double> sq(g.physical_size(), 0.0);
    for (const auto& comp : a)
        for (std::size_t p = 0; p < sq.size(); ++p) sq[p] += comp[p] * comp[p];
    for (auto& comp : v)
        for (std::size_t p = 0; p < sq.size(); ++p) comp[p] *= sq[p];
    return fft::dealiased_field(g, Rank::vector, v);
}

}  // namespace

const char* kind_name(SystemKind kind) {
    switch (kind) {
        case SystemKind::sel_aux: return "sel_aux";
        case SystemKind::mhd: return "mhd";
        case SystemKind::ns_stationary: return "ns_stationary";
        case SystemKind::harmonic_map: return "harmonic_map";
    }
    return "unknown";
}

SystemKind parse_kind(std::string_view name) {
    for (auto k : {SystemKind::sel_aux, SystemKind::mhd, SystemKind::ns_stationary, SystemKind::harmonic_map})
        if (name == kind_name(k)) return k;
    throw std::invalid_argument("unknown system kind '" + std::string(name) + "'");
}

std::vector<Rank> field_ranks(SystemKind kind) {
    switch (kind) {
        case SystemKind::sel_aux: return {Rank::vector, Rank::tensor};
        case SystemKind::mhd: return {Rank::vector, Rank::vector};
        case SystemKind::ns_stationary: return {Rank::vector};
        case SystemKind::harmonic_map: return {Rank::vector};
    }
    return {};
}

std::vector<std::string> field_names(SystemKind kind) {
    switch (kind) {
        case SystemKind::sel_aux: return {"u", "Vt"};
        case SystemKind::mhd: return {"u", "b"};
        case SystemKind::ns_stationary: return {"u"};
        case SystemKind::harmonic_map: return {"V"};
    }
    return {};
}

bool is_solenoidal(SystemKind kind, int field) {
    switch (kind) {
        case SystemKind::sel_aux: return field == 0;
        case SystemKind::mhd: return true;
        case SystemKind::ns_stationary: return true;
        case SystemKind::harmonic_map: return false;
    }
    return false;
}

SystemState SystemState::zero(SystemKind kind, const Grid& grid) {
    SystemState s;
    s.kind = kind;
    for (Rank r : field_ranks(kind)) s.fields.emplace_back(grid, r);
    return s;
}

const Grid& SystemState::grid() const {
    if (fields.empty()) throw std::logic_error("SystemState has no fields");
    return fields.front().grid();
}

void SystemState::validate(double div_tol, double unit_tol) const {
    const auto ranks = field_ranks(kind);
    if (fields.size() != ranks.size())
        throw std::invalid_argument(std::string(kind_name(kind)) + " expects " + std::to_string(ranks.size()) +
                                    " fields, got " + std::to_string(fields.size()));
    const Grid& g = grid();
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].rank() != ranks[i])
            throw std::invalid_argument("field '" + field_names(kind)[i] + "' must be " + rank_name(ranks[i]));
        if (!(fields[i].grid() == g)) throw std::invalid_argument("fields live on different grids");
        if (is_solenoidal(kind, static_cast<int>(i))) {
            const double d = divergence(fields[i]).max_abs_coefficient();
            if (d > div_tol * scale_of(fields[i]))
                throw std::invalid_argument("field '" + field_names(kind)[i] + "' is not divergence-free (max |div| " +
                                            std::to_string(d) + ")");
        }
    }
    require_tensor_forcing(forcing_f, g, "forcing F");
    require_tensor_forcing(forcing_g, g, "forcing G");

    auto check_unit = [&](const SpectralField& v, const char* what) {
        if (v.rank() != Rank::vector || !(v.grid() == g))
            throw std::invalid_argument(std::string(what) + " must be a vector field on the state grid");
        for (double m : magnitude(v))
            if (std::abs(m - 1.0) > unit_tol)
                throw std::invalid_argument(std::string(what) + " is not unit length at every grid point");
    };
    if (kind == SystemKind::harmonic_map) check_unit(fields[0], "director V");
    if (frozen) {
        if (kind != SystemKind::sel_aux) throw std::invalid_argument("a frozen director only belongs to sel_aux");
        check_unit(*frozen, "frozen director V");
    }
}

const NonlinearTerm& NonlinearTerms::get(std::string_view name) const {
    for (const auto& t : terms)
        if (t.name == name) return t;
    throw std::out_of_range("no nonlinear term named '" + std::string(name) + "'");
}

std::vector<SpectralField> NonlinearTerms::tendencies(const Grid& grid) const {
    std::vector<SpectralField> out;
    for (Rank r : field_ranks(kind)) out.emplace_back(grid, r);
    for (const auto& t : terms) out[t.equation].axpy(t.sign, t.projected ? leray_project(t.value) : t.value);
    return out;
}

SpectralField transpose(const SpectralField& tensor) {
    require_rank(tensor, Rank::tensor, "transpose");
    SpectralField out(tensor.grid(), Rank::tensor);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            auto src = tensor.component(tensor_component(j, i));
            std::copy(src.begin(), src.end(), out.component(tensor_component(i, j)).begin());
        }
    return out;
}

SpectralField contract_rows(const SpectralField& a, const SpectralField& b) {
    require_rank(a, Rank::tensor, "contract_rows");
    require_rank(b, Rank::tensor, "contract_rows");
    require_same_grid(a, b, "contract_rows");
    if (&a == &b) return row_gram_of_samples(a.grid(), fft::dealiased_samples(a));
    const auto pa = fft::dealiased_samples(a);
    const auto pb = fft::dealiased_samples(b);
    auto out = zero_samples(a.grid(), 9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            auto& o = out[tensor_component(i, j)];
            for (int k = 0; k < 3; ++k) {
                const auto& x = pa[tensor_component(i, k)];
                const auto& y = pb[tensor_component(j, k)];
                for (std::size_t p = 0; p < o.size(); ++p) o[p] += x[p] * y[p];
            }
        }
    return fft::dealiased_field(a.grid(), Rank::tensor, out);
}

SpectralField vector_times_tensor(const SpectralField& u, const SpectralField& a) {
    require_rank(u, Rank::vector, "vector_times_tensor");
    require_rank(a, Rank::tensor, "vector_times_tensor");
    require_same_grid(u, a, "vector_times_tensor");
    return vector_times_tensor_of_samples(u.grid(), fft::dealiased_samples(u), fft::dealiased_samples(a));
}

SpectralField squared_norm_times(const SpectralField& a, const SpectralField& v) {
    require_rank(v, Rank::vector, "squared_norm_times");
    require_same_grid(a, v, "squared_norm_times");
    return squared_norm_times_of_samples(a.grid(), fft::dealiased_samples(a), fft::dealiased_samples(v));
}

NonlinearTerms assemble_nonlinear(const SystemState& state) {
    state.validate();
    NonlinearTerms out;
    out.kind = state.kind;
    const Grid& g = state.grid();
    const auto& f = state.fields;
    switch (state.kind) {
        case SystemKind::sel_aux: {
            if (!state.frozen) throw std::invalid_argument("sel_aux needs the frozen director V");
            const auto pu = fft::dealiased_samples(f[0]);
            const auto pvt = fft::dealiased_samples(f[1]);
            out.terms.push_back({"B1", 0, -1.0, true, divergence(outer_of_samples(g, pu, pu, true))});
            out.terms.push_back({"B2", 0, -1.0, true, divergence(row_gram_of_samples(g, pvt))});
            out.terms.push_back({"B3", 1, -1.0, false, gradient(vector_times_tensor_of_samples(g, pu, pvt))});
            out.terms.push_back(
                {"B4", 1, +1.0, false, gradient(squared_norm_times_of_samples(g, pvt, fft::dealiased_samples(*state.frozen)))});
            break;
        }
        case SystemKind::mhd: {
            const auto pu = fft::dealiased_samples(f[0]);
            const auto pb = fft::dealiased_samples(f[1]);
            const auto bu = outer_of_samples(g, pb, pu, false);
            out.terms.push_back({"B1", 0, -1.0, true, divergence(outer_of_samples(g, pu, pu, true))});
            out.terms.push_back({"B2", 0, +1.0, true, divergence(outer_of_samples(g, pb, pb, true))});
            out.terms.push_back({"B3", 1, -1.0, false, divergence(bu)});
            out.terms.push_back({"B4", 1, +1.0, false, divergence(transpose(bu))});
            break;
        }
        case SystemKind::ns_stationary: {
            const auto pu = fft::dealiased_samples(f[0]);
            out.terms.push_back({"B1", 0, -1.0, true, divergence(outer_of_samples(g, pu, pu, true))});
            break;
        }
        case SystemKind::harmonic_map:
            out.terms.push_back({"B1", 0, +1.0, false, squared_norm_times(gradient(f[0]), f[0])});
            break;
    }
    return out;
}

std::vector<SpectralField> forcing_terms(const SystemState& state) {
    const Grid& g = state.grid();
    std::vector<SpectralField> out;
    for (Rank r : field_ranks(state.kind)) out.emplace_back(g, r);
    const bool has_velocity = state.kind != SystemKind::harmonic_map;
    if (has_velocity && state.forcing_f) out[0] = leray_project(divergence(*state.forcing_f));
    if (state.forcing_g) {
        const auto dg = divergence(*state.forcing_g);
        switch (state.kind) {
            case SystemKind::sel_aux: out[1] = gradient(dg); break;
            case SystemKind::mhd: out[1] = dg; break;
            case SystemKind::harmonic_map: out[0] = dg; break;
            case SystemKind::ns_stationary:
                throw std::invalid_argument("ns_stationary takes no second forcing G");
        }
    }
    return out;
}

SpectralField momentum_stress(const SystemState& state) {
    const auto& u = state.fields.at(0);
    switch (state.kind) {
        case SystemKind::sel_aux: {
            if (!state.frozen) throw std::invalid_argument("sel_aux needs the frozen director V");
            const auto gv = gradient(*state.frozen);
            return outer(u, u) + contract_rows(gv, gv);
        }
        case SystemKind::mhd: return outer(u, u) - outer(state.fields.at(1), state.fields.at(1));
        case SystemKind::ns_stationary: return outer(u, u);
        case SystemKind::harmonic_map: break;
    }
    throw std::invalid_argument("harmonic_map has no momentum equation");
}

SpectralField momentum_pressure(const SystemState& state) {
    SpectralField n = momentum_stress(state);
    if (state.forcing_f) n -= *state.forcing_f;
    return inv_laplacian(divergence(divergence(n)));
}

std::vector<SpectralField> stationary_defect(const SystemState& state) {
    state.validate();
    std::vector<SpectralField> out;
    const auto& f = state.fields;
    auto minus_div = [](SpectralField r, const std::optional<SpectralField>& force) {
        if (force) r -= divergence(*force);
        return r;
    };
    if (state.kind != SystemKind::harmonic_map) {
        SpectralField r = -laplacian(f[0]) + divergence(momentum_stress(state)) + gradient(momentum_pressure(state));
        out.push_back(minus_div(std::move(r), state.forcing_f));
    }
    switch (state.kind) {
        case SystemKind::sel_aux: {
            const auto& v = *state.frozen;
            SpectralField r = -laplacian(v) + divergence(outer(v, f[0])) - squared_norm_times(gradient(v), v);
            out.push_back(minus_div(std::move(r), state.forcing_g));
            break;
        }
        case SystemKind::mhd: {
            SpectralField r = -laplacian(f[1]) + divergence(outer(f[1], f[0])) - divergence(outer(f[0], f[1]));
            out.push_back(minus_div(std::move(r), state.forcing_g));
            break;
        }
        case SystemKind::ns_stationary: break;
        case SystemKind::harmonic_map: {
            SpectralField r = -laplacian(f[0]) - squared_norm_times(gradient(f[0]), f[0]);
            out.push_back(minus_div(std::move(r), state.forcing_g));
            break;
        }
    }
    return out;
}

std::pair<SpectralField, SpectralField> manufacture_forcing(const SystemState& target) {
    SystemState bare = target;
    bare.forcing_f.reset();
    bare.forcing_g.reset();
    bare.validate();
    if (bare.kind == SystemKind::sel_aux && !bare.frozen)
        throw std::invalid_argument("sel_aux target needs the director V");
    const auto residuals = stationary_defect(bare);

    const Grid& g = bare.grid();
    SpectralField forcing_f(g, Rank::tensor), forcing_g(g, Rank::tensor);
    std::size_t next = 0;
    auto lift = [&](SpectralField& dst, const char* what) {
        const auto& r = residuals[next++];
        for (int c = 0; c < 3; ++c)
            if (std::abs(r.mean(c)) > 1e-12 * scale_of(r))
                throw std::invalid_argument(std::string(what) +
                                            " residual has a nonzero mean; it is not the divergence of a periodic tensor");
        dst = lift_to_tensor(r);
    };
    if (bare.kind != SystemKind::harmonic_map) lift(forcing_f, "momentum");
    if (bare.kind != SystemKind::ns_stationary) lift(forcing_g, "second-equation");
    return {std::move(forcing_f), std::move(forcing_g)};
}

SystemState with_manufactured_forcing(const SystemState& target) {
    auto [ff, gg] = manufacture_forcing(target);
    SystemState out = target;
    if (out.kind != SystemKind::harmonic_map) out.forcing_f = std::move(ff);
    if (out.kind != SystemKind::ns_stationary) out.forcing_g = std::move(gg);
    return out;
}

SpectralField taylor_green(const Grid& grid, double amp) {
    const double k = grid.fundamental();
    return sample_field(grid, Rank::vector, [&](const std::array<double, 3>& x, std::span<double> out) {
        const double s1 = std::sin(k * x[0]), c1 = std::cos(k * x[0]);
        const double s2 = std::sin(k * x[1]), c2 = std::cos(k * x[1]);
        const double c3 = std::cos(k * x[2]);
        out[0] = amp * s1 * c2 * c3;
        out[1] = -amp * c1 * s2 * c3;
        out[2] = 0.0;
    });
}

SpectralField helix_director(const Grid& grid) {
    const double k = grid.fundamental();
    return sample_field(grid, Rank::vector, [&](const std::array<double, 3>& x, std::span<double> out) {
        out[0] = std::cos(k * x[2]);
        out[1] = std::sin(k * x[2]);
        out[2] = 0.0;
    });
}

SpectralField abc_field(const Grid& grid, double amp) {
    const double k = grid.fundamental();
    return sample_field(grid, Rank::vector, [&](const std::array<double, 3>& x, std::span<double> out) {
        const double a = k * x[0], b = k * x[1], c = k * x[2];
        out[0] = amp * (std::sin(c) + std::cos(b));
        out[1] = amp * (std::sin(a) + std::cos(c));
        out[2] = amp * (std::sin(b) + std::cos(a));
    });
}

SpectralField taylor_green_pressure(const Grid& grid, double amp) {
    const double k = grid.fundamental();
    return sample_field(grid, Rank::scalar, [&](const std::array<double, 3>& x, std::span<double> out) {
        out[0] = amp * amp / 16.0 * (std::cos(2 * k * x[0]) + std::cos(2 * k * x[1])) * (std::cos(2 * k * x[2]) + 2.0);
    });
}

SystemState steady_target(SystemKind kind, const Grid& grid, double amp) {
    SystemState s;
    s.kind = kind;
    switch (kind) {
        case SystemKind::sel_aux: {
            auto v = helix_director(grid);
            s.fields = {taylor_green(grid, amp), gradient(v)};
            s.frozen = std::move(v);
            break;
        }
        case SystemKind::mhd: s.fields = {taylor_green(grid, amp), abc_field(grid, amp)}; break;
        case SystemKind::ns_stationary: s.fields = {taylor_green(grid, amp)}; break;
        case SystemKind::harmonic_map: s.fields = {helix_director(grid)}; break;
    }
    return s;
}

}  // namespace regcheck
