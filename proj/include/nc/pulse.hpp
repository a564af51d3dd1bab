#pragma once

#include <vector>

#include "nc/core.hpp"

namespace nc {

struct GaussianPulse {
    Vec A;
    Vec theta;

    GaussianPulse() = default;
    GaussianPulse(Vec A, Vec theta);
    static GaussianPulse isotropic(std::size_t n, double A, double theta);

    std::size_t n() const { return A.size(); }
    bool anisotropic() const;
    double max_width() const;
};

struct ConstantPulse {
    double A = 0.0;
};

// Integral of A exp(-tau^2 / 2 theta^2) over [0, t].
double gaussian_pulse_integral(double A, double theta, double t);
double gaussian_pulse_asymptote(double A, double theta);

// G(t) = A exp(-t^2 / 2 theta^2) and its time derivative -(A t / theta^2) exp(...), which is
// the first Hermite function form -(A / (sqrt2 theta)) H1(t / (sqrt2 theta)) exp(...).
double pulse_value(double A, double theta, double t);
double pulse_derivative(double A, double theta, double t);

ModuliState perturbed_moduli(const Vec& psiE, const GaussianPulse& pulse, double t);
Radii perturbed_radii(const Radii& aE, const GaussianPulse& pulse, double t);
Radii attractor(const Radii& aE, const GaussianPulse& pulse);

double pulse_source_term(const GaussianPulse& pulse, double t,
                         const OperatorCoefficients& coeffs = OperatorCoefficients::einstein());

// Two printed normalizations of the source term: with 1/2 weights on both quadratic sums
// and with unit weights.
struct PrintedSourceForms {
    double half_weights = 0.0;
    double unit_weights = 0.0;
};
PrintedSourceForms printed_source_forms(const GaussianPulse& pulse, double t);

struct ConstantPerturbation {
    ModuliState state;
    Radii radii;
    double residual = 0.0;
};

ConstantPerturbation constant_perturbation(const Vec& psiE, const ConstantPulse& pulse, double t,
                                           const OperatorCoefficients& coeffs =
                                               OperatorCoefficients::einstein());

double perturbed_norm(const Radii& aE, const GaussianPulse& pulse, double t);
// sqrt(n) aE exp(A theta sqrt(pi/2)) - sqrt(n) aE using the largest radius and amplitude.
double perturbed_norm_bound(const Radii& aE, const GaussianPulse& pulse);
double constant_perturbed_norm(const Radii& aE, const ConstantPulse& pulse, double t);

struct RelaxationSample {
    double t = 0.0;
    double dK = 0.0;
    double dchi = 0.0;
    double dshear = 0.0;
};

struct RelaxationReport {
    std::vector<RelaxationSample> samples;
    double threshold_time = 0.0;  // 10 * max theta
    double max_dK_after = 0.0;
    double max_dchi_after = 0.0;
    double max_dshear_after = 0.0;
    // Earliest grid time after which each relative deviation stays below tolerance (-1 if never).
    double crossing_K = -1.0;
    double crossing_chi = -1.0;
    double crossing_shear = -1.0;
    double tolerance = 1e-8;
    bool relaxed = false;
};

RelaxationReport relaxation_check(const KasnerExponents& p, const GaussianPulse& pulse,
                                  const std::vector<double>& t_grid, double tolerance = 1e-8);

}  // namespace nc
