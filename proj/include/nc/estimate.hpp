#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nc/core.hpp"
#include "nc/numerics.hpp"
#include "nc/randfield.hpp"

namespace nc {

// Normalization of the second-order cumulant.
//   gaussian:     exp(zeta^2 * I(t)), the moment generating function of the Gaussian integral
//   ordered_half: exp(zeta^2 * I(t) / 2), one half times the time-ordered double integral
//   printed:      the literal closed forms of the norm-growth laws (growth laws only)
// I(t) is the double integral of J over 0 <= s2 <= s1 <= t.
enum class Normalization { gaussian, ordered_half, printed };

const char* to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

struct GrowthLaw {
    double prefactor = 1.0;
    double rate = 0.0;
    std::function<double(double)> transient;
    std::string transient_form;
    Normalization normalization = Normalization::gaussian;

    double log_value(double t) const;
    double operator()(double t) const;
};

// Time-ordered double integral of the kernel; closed form for OU and squared-exponential,
// nested quadrature when forced.
double ordered_double_integral(const CovarianceKernel& kernel, double t, bool force_quadrature = false);

double cumulant_expectation(const CovarianceKernel& kernel, double zeta, double t,
                            Normalization norm = Normalization::gaussian);

GrowthLaw growth_law_ou(double aE, std::size_t n, double zeta, double C, double varsigma,
                        Normalization norm = Normalization::gaussian);
GrowthLaw growth_law_se(double aE, std::size_t n, double mu, double C, double varsigma,
                        Normalization norm = Normalization::gaussian);

double norm_growth_ou(double aE, std::size_t n, double zeta, double C, double varsigma, double t,
                      Normalization norm = Normalization::gaussian);
double norm_growth_se(double aE, std::size_t n, double mu, double C, double varsigma, double t,
                      Normalization norm = Normalization::gaussian);

// Large-t log-slope of the growth law.
double asymptotic_rate(const CovarianceKernel& kernel, double zeta, Normalization norm = Normalization::gaussian);

double default_burn_in(double varsigma);

double lyapunov_from_series(std::span<const double> t, std::span<const double> values, double burn_in);

// (1/t) log E{x^ell}.
double moment_lce(std::span<const double> values, double ell, double t);

struct BoundReport {
    std::string name;
    double bound_value = 0.0;
    double empirical_value = 0.0;
    double tolerance = 0.0;
    bool holds = false;
    std::map<std::string, double> params;
};

struct KlReport {
    BoundReport bound;  // cumulant value against the exponential envelope
    Vec eigenvalues;    // descending
    double trace = 0.0;
    double trace_expected = 0.0;
    double trace_rel_error = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double cumulant = 0.0;
};

// Eigenvalues of the covariance Gram matrix scaled by dt.
Vec kl_spectrum(const CovarianceKernel& kernel, const TimeGrid& grid);

KlReport kl_alternative_bound(const CovarianceKernel& kernel, const TimeGrid& grid, double zeta, double aE,
                              std::size_t n, double t);

BoundReport markov_bound(double expected_norm, double L);
// Expected value and tail frequency both taken from the sample.
BoundReport markov_bound(std::span<const double> samples, double L);

Vec default_beta_grid();

BoundReport chernoff_tail(std::span<const double> samples, double L, std::span<const double> beta_grid);

// samples[r][i]: component i of realization r, each confined to [lo[i], hi[i]].
BoundReport hoeffding_bound(const std::vector<Vec>& samples, const Vec& lo, const Vec& hi, double L,
                            double expected_mean);

struct MaximalReport {
    BoundReport expectation;
    BoundReport tail;
    bool vacuous_edge = false;
};

MaximalReport maximal_bound(const std::vector<Vec>& samples, double sub_gaussian_C, double L);

struct GammaBasin {
    double probability = 0.0;
    bool inside = false;
};

GammaBasin gamma_basin(std::span<const double> final_norms, double L, double gamma);

double stable_class_moment(const CovarianceKernel& kernel, double zeta);

// nζ²Ξ(0) under the default operator; Ξ(0) = -J''(0).
double stable_class_residual(const CovarianceKernel& kernel, double zeta, std::size_t n,
                             NoiseMode mode = NoiseMode::iid,
                             const OperatorCoefficients& coeffs = OperatorCoefficients::einstein());

// Monte-Carlo helpers over a generated field.
MeanSE mgf_of_integral_mc(const FieldSpec& spec, double zeta, double t, std::size_t N);
MeanSE mgf_of_value_mc(const FieldSpec& spec, double zeta, double t, std::size_t N);

struct StableResidualMC {
    double analytic = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double z_score = 0.0;
};

// psi_hat = psi_E + zeta U with derivatives taken by finite differences of each path.
StableResidualMC stable_class_residual_mc(const FieldSpec& spec, double zeta, double t_eval, std::size_t N,
                                          const OperatorCoefficients& coeffs = OperatorCoefficients::einstein());

struct SupCheck {
    double analytic_mean = 0.0;
    double threshold = 0.0;
    double exceed_probability = 0.0;
    std::size_t exceed_count = 0;
    std::size_t N = 0;
};

// sup over the grid and components of a_i/a^E = exp(zeta U_i), against factor * exp(zeta^2 J(0) / 2).
SupCheck stable_class_sup(const FieldSpec& spec, double zeta, std::size_t N, double factor = 5.0);

// ||a_hat(t) - a^E|| with a_hat_i = aE exp(zeta int_0^t U_i), sampled at the given grid indices.
// Result is indexed [time][path].
std::vector<Vec> perturbed_norm_ensemble(const FieldSpec& spec, double zeta, double aE,
                                         const std::vector<std::size_t>& indices, std::size_t N);

}  // namespace nc
