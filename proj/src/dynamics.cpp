#include "nc/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "nc/numerics.hpp"

namespace nc {

double h_residual(const ModuliState& s, const OperatorCoefficients& c)
{
    Vec d2(s.n());
    for (std::size_t i = 0; i < s.n(); ++i) d2[i] = s.dpsi[i] * s.dpsi[i];
    return c.c1 * pairwise_sum(s.ddpsi) + c.c2 * pairwise_sum(d2) + c.c3 * c.cross_sum(s.dpsi);
}

double d_residual(const Radii& a, const Vec& da, const Vec& dda, const OperatorCoefficients& c)
{
    const std::size_t n = a.n();
    if (da.size() != n || dda.size() != n)
        throw std::invalid_argument("d_residual: derivative lengths differ from radii");
    Vec acc(n), rate(n), rate2(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(a.a[i] > 0.0)) throw std::domain_error("d_residual: radii must be positive");
        acc[i] = dda[i] / a.a[i];
        rate[i] = da[i] / a.a[i];
        rate2[i] = rate[i] * rate[i];
    }
    return c.c1 * pairwise_sum(acc) + (c.c2 - c.c1) * pairwise_sum(rate2) + c.c3 * c.cross_sum(rate);
}

ModuliState kasner_solution(const Vec& psi0, const KasnerExponents& p, double t)
{
    if (!(t > 0.0)) throw std::domain_error("kasner_solution: t must be positive");
    if (psi0.size() != p.p.size())
        throw std::invalid_argument("kasner_solution: psi0 and exponents differ in length");
    const double lt = std::log(t);
    Vec psi(p.p.size()), d(p.p.size()), dd(p.p.size());
    for (std::size_t i = 0; i < p.p.size(); ++i) {
        psi[i] = psi0[i] + p.p[i] * lt;
        d[i] = p.p[i] / t;
        dd[i] = -p.p[i] / (t * t);
    }
    return ModuliState(std::move(psi), std::move(d), std::move(dd));
}

KasnerCheck check_kasner(const KasnerExponents& p, double tol)
{
    Vec sq(p.p.size());
    for (std::size_t i = 0; i < p.p.size(); ++i) sq[i] = p.p[i] * p.p[i];
    KasnerCheck r;
    r.residual = std::abs(pairwise_sum(p.p) - pairwise_sum(sq));
    r.valid = r.residual < tol;
    return r;
}

KasnerExponents kl_exponents(double u)
{
    if (!(u >= 1.0) || !std::isfinite(u)) throw std::domain_error("kl_exponents: u must be >= 1");
    const double den = 1.0 + u + u * u;
    return {{-u / den, (1.0 + u) / den, u * (1.0 + u) / den}};
}

double lambda_rate(double lambda, std::size_t n, const OperatorCoefficients& c)
{
    if (lambda < 0.0) throw std::domain_error("lambda_rate: negative lambda gives imaginary rate");
    if (n == 0) throw std::invalid_argument("lambda_rate: n must be >= 1");
    const double w = c.isotropic_weight(n);
    if (!(w > 0.0)) throw std::domain_error("lambda_rate: coefficients admit no real rate");
    return std::sqrt(lambda / w);
}

ModuliState lambda_solution(const Vec& psi0, const LambdaTerm& lam, std::size_t n, int sign, double t,
                            const OperatorCoefficients& c)
{
    if (psi0.size() != n) throw std::invalid_argument("lambda_solution: psi0 length differs from n");
    if (sign != 1 && sign != -1) throw std::invalid_argument("lambda_solution: sign must be +1 or -1");
    const double q = sign * lambda_rate(lam.lambda, n, c);
    Vec psi(n), d(n, q), dd(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) psi[i] = psi0[i] + q * t;
    return ModuliState(std::move(psi), std::move(d), std::move(dd));
}

LambdaTerm lambda_from_Lambda(double Lambda, int n)
{
    if (n < 1) throw std::invalid_argument("lambda_from_Lambda: n must be >= 1");
    if (n == 1) throw std::domain_error("lambda_from_Lambda: factor (1+n)/(1-n) is singular at n=1");
    LambdaTerm t;
    t.lambda = Lambda * (1.0 + n) / (1.0 - n);
    t.Lambda_raw = Lambda;
    return t;
}

LambdaConstraint check_lambda_constraint(const Vec& q, double lambda)
{
    Vec sq(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) sq[i] = q[i] * q[i];
    const double s = pairwise_sum(q);
    LambdaConstraint r;
    r.statement_value = 0.5 * s * s + 0.5 * s * s;
    r.proof_value = 0.5 * pairwise_sum(sq) + 0.5 * s * s;
    r.statement_residual = r.statement_value - lambda;
    r.proof_residual = r.proof_value - lambda;
    return r;
}

double beta_isotropic_rate(double C, double beta, std::size_t n)
{
    if (!(beta > 0.0) || n == 0 || C < 0.0)
        throw precondition_error("beta_isotropic_rate: need C >= 0, beta > 0, n >= 1");
    return std::sqrt(C / (beta * static_cast<double>(n)));
}

BetaSolution general_solution_beta(const Vec& psi0, const Vec& q, double beta, double t,
                                   BetaSolutionKind kind)
{
    if (psi0.size() != q.size()) throw std::invalid_argument("general_solution_beta: length mismatch");
    const std::size_t n = q.size();
    Vec sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = q[i] * q[i];
    const double sum_q = pairwise_sum(q);
    const double sum_q2 = pairwise_sum(sq);
    Vec psi(n), d(n), dd(n);
    BetaSolution out;
    if (kind == BetaSolutionKind::homogeneous) {
        if (!(t > 0.0)) throw std::domain_error("general_solution_beta: t must be positive");
        if (std::abs(sum_q - beta * sum_q2) > 1e-10)
            throw precondition_error("general_solution_beta: sum q != beta * sum q^2");
        const double lt = std::log(t);
        for (std::size_t i = 0; i < n; ++i) {
            psi[i] = psi0[i] + q[i] * lt;
            d[i] = q[i] / t;
            dd[i] = -q[i] / (t * t);
        }
        out.operator_value = 0.0;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            psi[i] = psi0[i] + q[i] * t;
            d[i] = q[i];
            dd[i] = 0.0;
        }
        out.operator_value = beta * sum_q2;
    }
    out.state = ModuliState(std::move(psi), std::move(d), std::move(dd));
    return out;
}

ModuliState finite_difference_state(const std::vector<Vec>& series, double dt, std::size_t k)
{
    if (series.empty()) throw std::invalid_argument("finite_difference_state: empty series");
    const std::size_t len = series.front().size();
    if (len < 4) throw std::invalid_argument("finite_difference_state: need at least 4 samples");
    if (k >= len) throw std::out_of_range("finite_difference_state: index outside series");
    const std::size_t n = series.size();
    Vec psi(n), d(n), dd(n);
    const double h2 = dt * dt;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec& y = series[i];
        if (y.size() != len) throw std::invalid_argument("finite_difference_state: ragged series");
        psi[i] = y[k];
        if (k == 0) {
            d[i] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt);
            dd[i] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / h2;
        } else if (k == len - 1) {
            d[i] = (3.0 * y[k] - 4.0 * y[k - 1] + y[k - 2]) / (2.0 * dt);
            dd[i] = (2.0 * y[k] - 5.0 * y[k - 1] + 4.0 * y[k - 2] - y[k - 3]) / h2;
        } else {
            d[i] = (y[k + 1] - y[k - 1]) / (2.0 * dt);
            dd[i] = (y[k + 1] - 2.0 * y[k] + y[k - 1]) / h2;
        }
    }
    return ModuliState(std::move(psi), std::move(d), std::move(dd));
}

}  // namespace nc
