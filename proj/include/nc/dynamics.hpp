#pragma once

#include <optional>
#include <vector>

#include "nc/core.hpp"

namespace nc {

struct LambdaTerm {
    double lambda = 0.0;
    std::optional<double> Lambda_raw;
};

struct KasnerCheck {
    double residual = 0.0;
    bool valid = false;
};

inline constexpr double kKasnerTolerance = 1e-10;

// c1*sum(psi'') + c2*sum(psi'^2) + c3*cross(psi').
double h_residual(const ModuliState& state, const OperatorCoefficients& coeffs);

// Same operator written on the radii a_i = exp(psi_i).
double d_residual(const Radii& a, const Vec& da, const Vec& dda, const OperatorCoefficients& coeffs);

ModuliState kasner_solution(const Vec& psi0, const KasnerExponents& p, double t);
KasnerCheck check_kasner(const KasnerExponents& p, double tol = kKasnerTolerance);
KasnerExponents kl_exponents(double u);

// Isotropic solution psi_i = psi_i(0) + sign*q*t whose residual equals lam.lambda.
// q is fixed by the coefficients: q^2 = lambda / isotropic_weight(n).
ModuliState lambda_solution(const Vec& psi0, const LambdaTerm& lam, std::size_t n, int sign, double t,
                            const OperatorCoefficients& coeffs = OperatorCoefficients::einstein());
double lambda_rate(double lambda, std::size_t n,
                   const OperatorCoefficients& coeffs = OperatorCoefficients::einstein());

LambdaTerm lambda_from_Lambda(double Lambda, int n);

// Two readings of the anisotropic constraint for linear solutions psi_i = q_i t.
struct LambdaConstraint {
    double statement_value = 0.0;  // first sum read over both indices
    double proof_value = 0.0;      // first sum read as the diagonal q_i^2
    double statement_residual = 0.0;
    double proof_residual = 0.0;
};

LambdaConstraint check_lambda_constraint(const Vec& q, double lambda);

enum class BetaSolutionKind { homogeneous, inhomogeneous };

struct BetaSolution {
    ModuliState state;
    double operator_value = 0.0;
};

// Log solutions psi_i(0) + q_i ln t (homogeneous, sum q = beta * sum q^2) or linear
// solutions psi_i(0) + q_i t (inhomogeneous, value beta * sum q^2).
BetaSolution general_solution_beta(const Vec& psi0, const Vec& q, double beta, double t,
                                   BetaSolutionKind kind);
double beta_isotropic_rate(double C, double beta, std::size_t n);

// Second-order finite differences of sampled moduli (component-major series) at grid index k.
// Central in the interior, one-sided at the ends.
ModuliState finite_difference_state(const std::vector<Vec>& series, double dt, std::size_t k);

}  // namespace nc
