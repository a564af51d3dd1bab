#include "nc/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "nc/parallel.hpp"

namespace nc {

namespace {

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error(std::string(what) + " must be positive");
}

double factor_of(Normalization norm)
{
    return norm == Normalization::gaussian ? 1.0 : 0.5;
}

}  // namespace

const char* to_string(Normalization n)
{
    switch (n) {
    case Normalization::gaussian: return "gaussian";
    case Normalization::ordered_half: return "ordered_half";
    case Normalization::printed: return "printed";
    }
    return "?";
}

Normalization normalization_from_string(const std::string& s)
{
    if (s == "gaussian") return Normalization::gaussian;
    if (s == "ordered_half") return Normalization::ordered_half;
    if (s == "printed") return Normalization::printed;
    throw std::invalid_argument("unknown normalization: " + s);
}

double GrowthLaw::log_value(double t) const
{
    return std::log(prefactor) + rate * t + (transient ? transient(t) : 0.0);
}

double GrowthLaw::operator()(double t) const { return std::exp(log_value(t)); }

double ordered_double_integral(const CovarianceKernel& kernel, double t, bool force_quadrature)
{
    if (!kernel.regulated()) throw unsupported_kernel("ordered_double_integral: kernel must be regulated");
    if (t < 0.0) throw std::domain_error("ordered_double_integral: t must be >= 0");
    if (t == 0.0) return 0.0;
    const double C = kernel.C, s = kernel.varsigma;
    if (!force_quadrature) {
        if (kernel.kind == KernelKind::OU) return C * (t + s * std::expm1(-t / s));
        if (kernel.kind == KernelKind::SquaredExp)
            return C * (t * std::sqrt(std::numbers::pi) / (2.0 * s) * std::erf(t / s) +
                        0.5 * std::expm1(-(t * t) / (s * s)));
    }
    auto inner = [&](double t1) {
        return adaptive_simpson([&](double t2) { return kernel_eval(kernel, t1 - t2); }, 0.0, t1, 1e-13);
    };
    return adaptive_simpson(inner, 0.0, t, 1e-12);
}

double cumulant_expectation(const CovarianceKernel& kernel, double zeta, double t, Normalization norm)
{
    return std::exp(factor_of(norm) * zeta * zeta * ordered_double_integral(kernel, t));
}

GrowthLaw growth_law_ou(double aE, std::size_t n, double zeta, double C, double varsigma, Normalization norm)
{
    require_positive(aE, "aE");
    require_positive(C, "C");
    require_positive(varsigma, "varsigma");
    if (n == 0) throw std::invalid_argument("growth_law_ou: n must be >= 1");
    GrowthLaw law;
    law.prefactor = aE * std::sqrt(static_cast<double>(n));
    law.normalization = norm;
    const double z2c = zeta * zeta * C;
    if (norm == Normalization::printed) {
        law.rate = 0.5 * z2c;
        law.transient = [z2c, varsigma](double t) { return -0.5 * z2c * std::expm1(-t / varsigma); };
        law.transient_form = "0.5 zeta^2 C (1 - exp(-t/varsigma))";
        return law;
    }
    const double f = factor_of(norm);
    law.rate = f * z2c;
    law.transient = [f, z2c, varsigma](double t) { return f * z2c * varsigma * std::expm1(-t / varsigma); };
    law.transient_form = norm == Normalization::gaussian ? "-zeta^2 C varsigma (1 - exp(-t/varsigma))"
                                                         : "-0.5 zeta^2 C varsigma (1 - exp(-t/varsigma))";
    return law;
}

GrowthLaw growth_law_se(double aE, std::size_t n, double mu, double C, double varsigma, Normalization norm)
{
    require_positive(aE, "aE");
    require_positive(C, "C");
    require_positive(varsigma, "varsigma");
    if (n == 0) throw std::invalid_argument("growth_law_se: n must be >= 1");
    GrowthLaw law;
    law.prefactor = aE * std::sqrt(static_cast<double>(n));
    law.normalization = norm;
    const double m2c = mu * mu * C;
    const double sqpi = std::sqrt(std::numbers::pi);
    if (norm == Normalization::printed) {
        law.rate = 0.5 * m2c;
        law.transient = [m2c, varsigma, sqpi](double t) {
            return 0.5 * m2c * t * -std::erfc(t / varsigma) +
                   0.5 * m2c * std::exp(-(t * t) / (varsigma * varsigma)) / sqpi;
        };
        law.transient_form = "0.5 C mu^2 t (erf(t/varsigma) - 1) + 0.5 C mu^2 exp(-t^2/varsigma^2) / sqrt(pi)";
        return law;
    }
    const double f = factor_of(norm);
    const double slope = sqpi / (2.0 * varsigma);
    law.rate = f * m2c * slope;
    law.transient = [f, m2c, slope, varsigma](double t) {
        return f * m2c * (-t * slope * std::erfc(t / varsigma) + 0.5 * std::expm1(-(t * t) / (varsigma * varsigma)));
    };
    law.transient_form = norm == Normalization::gaussian
                             ? "mu^2 C (t sqrt(pi)/(2 varsigma) (erf(t/varsigma) - 1) - (1 - exp(-t^2/varsigma^2))/2)"
                             : "0.5 mu^2 C (t sqrt(pi)/(2 varsigma) (erf(t/varsigma) - 1) - (1 - exp(-t^2/varsigma^2))/2)";
    return law;
}

double norm_growth_ou(double aE, std::size_t n, double zeta, double C, double varsigma, double t,
                      Normalization norm)
{
    return growth_law_ou(aE, n, zeta, C, varsigma, norm)(t);
}

double norm_growth_se(double aE, std::size_t n, double mu, double C, double varsigma, double t,
                      Normalization norm)
{
    return growth_law_se(aE, n, mu, C, varsigma, norm)(t);
}

double asymptotic_rate(const CovarianceKernel& kernel, double zeta, Normalization norm)
{
    if (!kernel.regulated()) throw unsupported_kernel("asymptotic_rate: kernel must be regulated");
    if (norm == Normalization::printed) return 0.5 * zeta * zeta * kernel.C;
    return 0.5 * factor_of(norm) * zeta * zeta * kernel.line_integral();
}

double default_burn_in(double varsigma) { return std::max(10.0 * varsigma, 1.0); }

double lyapunov_from_series(std::span<const double> t, std::span<const double> values, double burn_in)
{
    if (t.size() != values.size()) throw std::invalid_argument("lyapunov_from_series: length mismatch");
    Vec x, y;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(values[k] > 0.0)) throw std::domain_error("lyapunov_from_series: values must be positive");
        if (t[k] >= burn_in) {
            x.push_back(t[k]);
            y.push_back(std::log(values[k]));
        }
    }
    if (x.size() < 10) throw precondition_error("lyapunov_from_series: fewer than 10 points after burn-in");
    return least_squares(x, y).slope;
}

double moment_lce(std::span<const double> values, double ell, double t)
{
    if (ell < 1.0) throw std::domain_error("moment_lce: ell must be >= 1");
    if (!(t > 0.0)) throw std::domain_error("moment_lce: t must be positive");
    if (values.size() < 2) throw std::invalid_argument("moment_lce: degenerate ensemble");
    Vec p(values.size());
    for (std::size_t r = 0; r < p.size(); ++r) {
        if (values[r] < 0.0 || !std::isfinite(values[r])) throw std::domain_error("moment_lce: invalid norm value");
        p[r] = std::pow(values[r], ell);
    }
    const MeanSE m = mean_se(p);
    if (!(m.mean > 0.0)) throw std::invalid_argument("moment_lce: degenerate ensemble");
    if (m.se / m.mean >= 0.2) throw precondition_error("moment_lce: ensemble too small for this moment");
    return std::log(m.mean) / t;
}

Vec kl_spectrum(const CovarianceKernel& kernel, const TimeGrid& grid)
{
    const Eigen::MatrixXd g = gram_matrix(kernel, grid) * grid.dt;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("kl_spectrum: eigen-solve failed");
    const Eigen::VectorXd ev = es.eigenvalues();
    const double j0 = kernel.J0();
    if (ev.minCoeff() < -1e-8 * j0 * grid.dt) throw kernel_not_psd("kl_spectrum: Gram matrix is not PSD");
    Vec out(ev.data(), ev.data() + ev.size());
    std::reverse(out.begin(), out.end());
    return out;
}

KlReport kl_alternative_bound(const CovarianceKernel& kernel, const TimeGrid& grid, double zeta, double aE,
                              std::size_t n, double t)
{
    if (!kernel.regulated()) throw unsupported_kernel("kl_alternative_bound: kernel must be regulated");
    require_positive(aE, "aE");
    KlReport rep;
    rep.eigenvalues = kl_spectrum(kernel, grid);
    rep.trace = pairwise_sum(rep.eigenvalues);
    rep.trace_expected = kernel.J0() * (grid.t_end() - grid.t_start);
    rep.trace_rel_error = std::abs(rep.trace - rep.trace_expected) / rep.trace_expected;
    rep.C1 = kernel.J0();
    rep.C2 = 0.5 * kernel.line_integral();

    const double span = std::abs(t - grid.t_start);
    const double pref = std::sqrt(static_cast<double>(n)) * aE;
    rep.cumulant = cumulant_expectation(kernel, zeta, span);
    BoundReport& b = rep.bound;
    b.name = "kl_parseval";
    b.empirical_value = pref * rep.cumulant;
    b.bound_value = pref * std::exp(zeta * (std::sqrt(rep.C1) + 0.5 * zeta * rep.C2) * span);
    b.tolerance = 1e-12;
    b.holds = b.empirical_value <= b.bound_value * (1.0 + b.tolerance);
    b.params = {{"zeta", zeta}, {"aE", aE}, {"n", static_cast<double>(n)}, {"t", t},
                {"C1", rep.C1}, {"C2", rep.C2}, {"trace_rel_error", rep.trace_rel_error}};
    return rep;
}

double stable_class_moment(const CovarianceKernel& kernel, double zeta)
{
    return std::exp(0.5 * zeta * zeta * kernel.J0());
}

double stable_class_residual(const CovarianceKernel& kernel, double zeta, std::size_t n, NoiseMode mode,
                             const OperatorCoefficients& coeffs)
{
    const double xi0 = kernel.derivative_variance();
    const double nn = static_cast<double>(n);
    const double m = (coeffs.cross == CrossSum::full && mode == NoiseMode::shared) ? nn * nn : nn;
    return zeta * zeta * xi0 * (coeffs.c2 * nn + coeffs.c3 * m);
}

MeanSE mgf_of_integral_mc(const FieldSpec& spec, double zeta, double t, std::size_t N)
{
    const FieldGenerator gen(spec);
    const std::size_t k = spec.grid.index_of(t);
    Vec vals(N);
    parallel_for(N, [&](std::size_t r) {
        const NoisePath p = gen.path(r);
        const Vec& u = p.component(0);
        vals[r] = std::exp(zeta * trapezoid(std::span<const double>(u.data(), k + 1), spec.grid.dt));
    });
    return mean_se(vals);
}

MeanSE mgf_of_value_mc(const FieldSpec& spec, double zeta, double t, std::size_t N)
{
    const FieldGenerator gen(spec);
    const std::size_t k = spec.grid.index_of(t);
    Vec vals(N);
    parallel_for(N, [&](std::size_t r) { vals[r] = std::exp(zeta * gen.path(r).component(0)[k]); });
    return mean_se(vals);
}

StableResidualMC stable_class_residual_mc(const FieldSpec& spec, double zeta, double t_eval, std::size_t N,
                                          const OperatorCoefficients& coeffs)
{
    if (N < 2) throw std::invalid_argument("stable_class_residual_mc: need N >= 2");
    const FieldGenerator gen(spec);
    const std::size_t k = spec.grid.index_of(t_eval);
    if (k == 0 || k + 1 >= spec.grid.size())
        throw std::invalid_argument("stable_class_residual_mc: t_eval must be interior to the grid");
    const double dt = spec.grid.dt;
    const std::size_t n = spec.n_components;
    Vec vals(N);
    parallel_for(N, [&](std::size_t r) {
        const NoisePath p = gen.path(r);
        Vec d(n), dd(n), psi(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const Vec& u = p.component(i);
            d[i] = zeta * (u[k + 1] - u[k - 1]) / (2.0 * dt);
            dd[i] = zeta * (u[k + 1] - 2.0 * u[k] + u[k - 1]) / (dt * dt);
        }
        Vec sq(n);
        for (std::size_t i = 0; i < n; ++i) sq[i] = d[i] * d[i];
        vals[r] = coeffs.c1 * pairwise_sum(dd) + coeffs.c2 * pairwise_sum(sq) + coeffs.c3 * coeffs.cross_sum(d);
    });
    const MeanSE m = mean_se(vals);
    StableResidualMC out;
    out.analytic = stable_class_residual(spec.kernel, zeta, n, spec.mode, coeffs);
    out.mc_mean = m.mean;
    out.mc_se = m.se;
    out.z_score = m.se > 0.0 ? (m.mean - out.analytic) / m.se : 0.0;
    return out;
}

SupCheck stable_class_sup(const FieldSpec& spec, double zeta, std::size_t N, double factor)
{
    const FieldGenerator gen(spec);
    SupCheck out;
    out.N = N;
    out.analytic_mean = stable_class_moment(spec.kernel, zeta);
    out.threshold = factor * out.analytic_mean;
    std::vector<char> exceed(N, 0);
    parallel_for(N, [&](std::size_t r) {
        const NoisePath p = gen.path(r);
        double mx = -INFINITY;
        for (const Vec& u : p.values)
            for (double v : u) mx = std::max(mx, v);
        exceed[r] = std::exp(zeta * mx) >= out.threshold ? 1 : 0;
    });
    out.exceed_count = static_cast<std::size_t>(std::count(exceed.begin(), exceed.end(), 1));
    out.exceed_probability = static_cast<double>(out.exceed_count) / static_cast<double>(N);
    return out;
}

std::vector<Vec> perturbed_norm_ensemble(const FieldSpec& spec, double zeta, double aE,
                                         const std::vector<std::size_t>& indices, std::size_t N)
{
    require_positive(aE, "aE");
    for (std::size_t k : indices)
        if (k >= spec.grid.size()) throw std::out_of_range("perturbed_norm_ensemble: index outside grid");
    const FieldGenerator gen(spec);
    const std::size_t n = spec.n_components;
    std::vector<Vec> out(indices.size(), Vec(N));
    parallel_for(N, [&](std::size_t r) {
        const NoisePath p = gen.path(r);
        std::vector<Vec> integ(n);
        for (std::size_t i = 0; i < n; ++i) integ[i] = cumulative_integral(p.component(i), spec.grid.dt);
        for (std::size_t j = 0; j < indices.size(); ++j) {
            Vec sq(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = aE * std::expm1(zeta * integ[i][indices[j]]);
                sq[i] = d * d;
            }
            out[j][r] = std::sqrt(pairwise_sum(sq));
        }
    });
    return out;
}

}  // namespace nc
