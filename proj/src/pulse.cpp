#include "nc/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nc/dynamics.hpp"
#include "nc/numerics.hpp"

namespace nc {

namespace {

const double kSqrtHalfPi = std::sqrt(std::numbers::pi / 2.0);

void require_width(double theta)
{
    if (!(theta > 0.0) || !std::isfinite(theta))
        throw std::domain_error("pulse width theta must be positive");
}

double relative_gap(double perturbed, double reference)
{
    return std::abs(perturbed - reference) / std::max(std::abs(reference), 1.0);
}

}  // namespace

GaussianPulse::GaussianPulse(Vec A_, Vec theta_) : A(std::move(A_)), theta(std::move(theta_))
{
    if (A.size() != theta.size() || A.empty())
        throw std::invalid_argument("GaussianPulse: amplitude and width vectors must match");
    for (double w : theta) require_width(w);
    require_finite(A, "GaussianPulse amplitudes");
}

GaussianPulse GaussianPulse::isotropic(std::size_t n, double A, double theta)
{
    return GaussianPulse(Vec(n, A), Vec(n, theta));
}

bool GaussianPulse::anisotropic() const
{
    for (std::size_t i = 1; i < A.size(); ++i)
        if (A[i] != A[0] || theta[i] != theta[0]) return true;
    return false;
}

double GaussianPulse::max_width() const { return *std::max_element(theta.begin(), theta.end()); }

double gaussian_pulse_integral(double A, double theta, double t)
{
    require_width(theta);
    return A * theta * kSqrtHalfPi * std::erf(t / (std::numbers::sqrt2 * theta));
}

double gaussian_pulse_asymptote(double A, double theta)
{
    require_width(theta);
    return A * theta * kSqrtHalfPi;
}

double pulse_value(double A, double theta, double t)
{
    return A * std::exp(-t * t / (2.0 * theta * theta));
}

double pulse_derivative(double A, double theta, double t)
{
    return -(t / (theta * theta)) * pulse_value(A, theta, t);
}

ModuliState perturbed_moduli(const Vec& psiE, const GaussianPulse& pulse, double t)
{
    if (t < 0.0) throw std::domain_error("perturbed_moduli: t must be >= 0");
    if (psiE.size() != pulse.n()) throw std::invalid_argument("perturbed_moduli: dimension mismatch");
    const std::size_t n = psiE.size();
    Vec psi(n), d(n), dd(n);
    for (std::size_t i = 0; i < n; ++i) {
        psi[i] = psiE[i] + gaussian_pulse_integral(pulse.A[i], pulse.theta[i], t);
        d[i] = pulse_value(pulse.A[i], pulse.theta[i], t);
        dd[i] = pulse_derivative(pulse.A[i], pulse.theta[i], t);
    }
    return ModuliState(std::move(psi), std::move(d), std::move(dd));
}

Radii perturbed_radii(const Radii& aE, const GaussianPulse& pulse, double t)
{
    if (aE.n() != pulse.n()) throw std::invalid_argument("perturbed_radii: dimension mismatch");
    Vec a(aE.n());
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] = aE.a[i] * std::exp(gaussian_pulse_integral(pulse.A[i], pulse.theta[i], t));
    return Radii(std::move(a));
}

Radii attractor(const Radii& aE, const GaussianPulse& pulse)
{
    if (aE.n() != pulse.n()) throw std::invalid_argument("attractor: dimension mismatch");
    Vec a(aE.n());
    for (std::size_t i = 0; i < a.size(); ++i)
        a[i] = aE.a[i] * std::exp(gaussian_pulse_asymptote(pulse.A[i], pulse.theta[i]));
    return Radii(std::move(a));
}

double pulse_source_term(const GaussianPulse& pulse, double t, const OperatorCoefficients& coeffs)
{
    const std::size_t n = pulse.n();
    Vec g(n), dg(n), g2(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = pulse_value(pulse.A[i], pulse.theta[i], t);
        dg[i] = pulse_derivative(pulse.A[i], pulse.theta[i], t);
        g2[i] = g[i] * g[i];
    }
    return coeffs.c1 * pairwise_sum(dg) + coeffs.c2 * pairwise_sum(g2) + coeffs.c3 * coeffs.cross_sum(g);
}

PrintedSourceForms printed_source_forms(const GaussianPulse& pulse, double t)
{
    const std::size_t n = pulse.n();
    Vec g(n), dg(n), g2(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = pulse_value(pulse.A[i], pulse.theta[i], t);
        dg[i] = pulse_derivative(pulse.A[i], pulse.theta[i], t);
        g2[i] = g[i] * g[i];
    }
    const double lin = pairwise_sum(dg);
    const double diag = pairwise_sum(g2);
    const double s = pairwise_sum(g);
    return {lin + 0.5 * diag + 0.5 * s * s, lin + diag + s * s};
}

ConstantPerturbation constant_perturbation(const Vec& psiE, const ConstantPulse& pulse, double t,
                                           const OperatorCoefficients& coeffs)
{
    const std::size_t n = psiE.size();
    Vec psi(n), d(n, pulse.A), dd(n, 0.0), a(n);
    for (std::size_t i = 0; i < n; ++i) {
        psi[i] = psiE[i] + pulse.A * t;
        a[i] = std::exp(psiE[i]) * std::exp(pulse.A * t);
    }
    ConstantPerturbation out;
    out.state = ModuliState(std::move(psi), std::move(d), std::move(dd));
    out.radii = Radii(std::move(a));
    out.residual = h_residual(out.state, coeffs);
    return out;
}

double perturbed_norm(const Radii& aE, const GaussianPulse& pulse, double t)
{
    const Radii a = perturbed_radii(aE, pulse, t);
    Vec sq(aE.n());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        const double d = a.a[i] - aE.a[i];
        sq[i] = d * d;
    }
    return std::sqrt(pairwise_sum(sq));
}

double perturbed_norm_bound(const Radii& aE, const GaussianPulse& pulse)
{
    double a_max = 0.0, y_max = 0.0;
    for (std::size_t i = 0; i < aE.n(); ++i) {
        a_max = std::max(a_max, aE.a[i]);
        y_max = std::max(y_max, std::abs(gaussian_pulse_asymptote(pulse.A[i], pulse.theta[i])));
    }
    const double rn = std::sqrt(static_cast<double>(aE.n()));
    return rn * a_max * std::exp(y_max) - rn * a_max;
}

double constant_perturbed_norm(const Radii& aE, const ConstantPulse& pulse, double t)
{
    Vec sq(aE.n());
    const double f = std::expm1(pulse.A * t);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = aE.a[i] * aE.a[i] * f * f;
    return std::sqrt(pairwise_sum(sq));
}

RelaxationReport relaxation_check(const KasnerExponents& p, const GaussianPulse& pulse,
                                  const std::vector<double>& t_grid, double tolerance)
{
    if (!check_kasner(p).valid) throw precondition_error("relaxation_check: invalid Kasner exponents");
    if (p.p.size() != pulse.n()) throw std::invalid_argument("relaxation_check: dimension mismatch");
    const std::size_t n = p.p.size();
    const Vec psi0(n, 0.0);

    RelaxationReport rep;
    rep.tolerance = tolerance;
    rep.threshold_time = 10.0 * pulse.max_width();
    for (double t : t_grid) {
        const ModuliState base = kasner_solution(psi0, p, t);
        Vec psi = base.psi, d = base.dpsi, dd = base.ddpsi;
        for (std::size_t i = 0; i < n; ++i) {
            psi[i] += gaussian_pulse_integral(pulse.A[i], pulse.theta[i], t);
            d[i] += pulse_value(pulse.A[i], pulse.theta[i], t);
            dd[i] += pulse_derivative(pulse.A[i], pulse.theta[i], t);
        }
        const auto k0 = kinematic_scalars(base);
        const auto k1 = kinematic_scalars(ModuliState(psi, d, dd));
        RelaxationSample s{t, relative_gap(k1.kretschmann, k0.kretschmann),
                           relative_gap(k1.expansion, k0.expansion),
                           relative_gap(k1.shear_sq, k0.shear_sq)};
        rep.samples.push_back(s);
        if (t > rep.threshold_time) {
            rep.max_dK_after = std::max(rep.max_dK_after, s.dK);
            rep.max_dchi_after = std::max(rep.max_dchi_after, s.dchi);
            rep.max_dshear_after = std::max(rep.max_dshear_after, s.dshear);
        }
    }
    auto crossing = [&](auto member) {
        double c = -1.0;
        for (auto it = rep.samples.rbegin(); it != rep.samples.rend(); ++it) {
            if ((*it).*member >= tolerance) break;
            c = it->t;
        }
        return c;
    };
    rep.crossing_K = crossing(&RelaxationSample::dK);
    rep.crossing_chi = crossing(&RelaxationSample::dchi);
    rep.crossing_shear = crossing(&RelaxationSample::dshear);
    rep.relaxed = rep.max_dK_after < tolerance && rep.max_dchi_after < tolerance &&
                  rep.max_dshear_after < tolerance;
    return rep;
}

}  // namespace nc
