#include "nc/core.hpp"

#include <cmath>
#include <numbers>

#include "nc/numerics.hpp"

namespace nc {

TimeGrid::TimeGrid(double t_start_, double dt_, std::size_t n_steps_)
    : t_start(t_start_), dt(dt_), n_steps(n_steps_)
{
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("TimeGrid: dt must be positive and finite");
    if (n_steps == 0)
        throw std::invalid_argument("TimeGrid: n_steps must be positive");
    if (!std::isfinite(t_start))
        throw std::invalid_argument("TimeGrid: t_start must be finite");
}

std::size_t TimeGrid::index_of(double t) const
{
    const double k = std::round((t - t_start) / dt);
    if (k < 0.0 || k > static_cast<double>(n_steps))
        throw std::out_of_range("TimeGrid: time outside grid");
    return static_cast<std::size_t>(k);
}

ModuliState::ModuliState(Vec psi_, Vec dpsi_, Vec ddpsi_)
    : psi(std::move(psi_)), dpsi(std::move(dpsi_)), ddpsi(std::move(ddpsi_))
{
    if (psi.empty())
        throw std::invalid_argument("ModuliState: dimension must be >= 1");
    if (dpsi.size() != psi.size() || ddpsi.size() != psi.size())
        throw std::invalid_argument("ModuliState: psi, dpsi, ddpsi lengths differ");
    require_finite(psi, "psi");
    require_finite(dpsi, "dpsi");
    require_finite(ddpsi, "ddpsi");
}

ModuliState ModuliState::static_state(const Vec& psi)
{
    return ModuliState(psi, Vec(psi.size(), 0.0), Vec(psi.size(), 0.0));
}

Radii::Radii(Vec a_) : a(std::move(a_))
{
    for (double v : a)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::domain_error("Radii: every radius must be positive and finite");
}

OperatorCoefficients OperatorCoefficients::einstein() { return {1.0, 0.5, 0.5, CrossSum::full}; }

OperatorCoefficients OperatorCoefficients::einstein_diagonal()
{
    return {1.0, 0.5, 0.5, CrossSum::diagonal};
}

OperatorCoefficients OperatorCoefficients::general(double beta)
{
    return {1.0, beta, 0.0, CrossSum::full};
}

double OperatorCoefficients::cross_sum(const Vec& x) const
{
    if (cross == CrossSum::diagonal) {
        Vec sq(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
        return pairwise_sum(sq);
    }
    const double s = pairwise_sum(x);
    return s * s;
}

double OperatorCoefficients::isotropic_weight(std::size_t n) const
{
    const double dn = static_cast<double>(n);
    return c2 * dn + c3 * (cross == CrossSum::full ? dn * dn : dn);
}

const char* to_string(CrossSum c) { return c == CrossSum::full ? "full" : "diagonal"; }

CrossSum cross_sum_from_string(const std::string& s)
{
    if (s == "full") return CrossSum::full;
    if (s == "diagonal") return CrossSum::diagonal;
    throw std::invalid_argument("unknown cross-sum convention: " + s);
}

void require_finite(const Vec& v, const char* what)
{
    for (double x : v)
        if (!std::isfinite(x))
            throw std::domain_error(std::string(what) + ": non-finite value");
}

Radii radii_from_moduli(const Vec& psi)
{
    require_finite(psi, "radii_from_moduli");
    Vec a(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        a[i] = std::exp(psi[i]);
        if (!std::isfinite(a[i]) || a[i] == 0.0)
            throw std::range_error("radii_from_moduli: radius not representable");
    }
    return Radii(std::move(a));
}

Vec moduli_from_radii(const Radii& r)
{
    Vec psi(r.a.size());
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::log(r.a[i]);
    return psi;
}

double spatial_volume(const Vec& psi)
{
    require_finite(psi, "spatial_volume");
    const double v = std::exp(pairwise_sum(psi));
    if (!std::isfinite(v) || v == 0.0)
        throw std::range_error("spatial_volume: volume not representable");
    return v;
}

MetricNorms metric_norms(const Vec& psi, Norm21Reading reading)
{
    require_finite(psi, "metric_norms");
    constexpr double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
    Vec g(psi.size()), g2(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        g[i] = four_pi_sq * std::exp(2.0 * psi[i]);
        g2[i] = g[i] * g[i];
    }
    MetricNorms out;
    out.frobenius = std::sqrt(pairwise_sum(g2));
    if (reading == Norm21Reading::diagonal_sum)
        out.norm21 = pairwise_sum(g);
    else
        out.norm21 = static_cast<double>(psi.size()) * out.frobenius;
    return out;
}

KinematicScalars kinematic_scalars(const ModuliState& s)
{
    const std::size_t n = s.n();
    Vec d2(n), pairs_sq, pairs_lin, diffs;
    pairs_sq.reserve(n * n);
    pairs_lin.reserve(n * n);
    diffs.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = s.dpsi[i] * s.dpsi[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double prod = s.dpsi[i] * s.dpsi[j];
            const double diff = s.dpsi[i] - s.dpsi[j];
            pairs_sq.push_back(prod * prod);
            pairs_lin.push_back(prod);
            diffs.push_back(diff * diff);
        }
    }
    const double sum_dd = pairwise_sum(s.ddpsi);
    const double sum_d2 = pairwise_sum(d2);

    KinematicScalars k;
    k.kretschmann = 4.0 * sum_dd + 4.0 * sum_d2 + 2.0 * pairwise_sum(pairs_sq);
    k.kretschmann_linear_cross = 4.0 * sum_dd + 4.0 * sum_d2 + 2.0 * pairwise_sum(pairs_lin);
    k.expansion = sum_d2;
    k.expansion_trace = pairwise_sum(s.dpsi);
    k.shear_sq = pairwise_sum(diffs);
    return k;
}

GeometryObservables observables(const ModuliState& state, Norm21Reading reading)
{
    const auto k = kinematic_scalars(state);
    const auto norms = metric_norms(state.psi, reading);
    GeometryObservables g;
    g.volume = spatial_volume(state.psi);
    g.norm21 = norms.norm21;
    g.frobenius = norms.frobenius;
    g.kretschmann = k.kretschmann;
    g.expansion = k.expansion;
    g.shear_sq = k.shear_sq;
    return g;
}

}  // namespace nc
