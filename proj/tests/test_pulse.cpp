#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nc/dynamics.hpp"
#include "nc/pulse.hpp"

using namespace nc;

namespace {

double quad_pulse(double A, double theta, double t)
{
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double s) { return A * std::exp(-s * s / (2.0 * theta * theta)); };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, t, 15, 1e-13);
}

const double kRootHalfPi = std::sqrt(std::numbers::pi / 2.0);

}  // namespace

TEST_CASE("pulse integral against Gauss-Kronrod")
{
    CHECK(gaussian_pulse_integral(0.0, 0.3, 5.0) == 0.0);
    CHECK(std::abs(gaussian_pulse_integral(1.0, 1.0, 10.0) - quad_pulse(1.0, 1.0, 10.0)) < 1e-10);
    CHECK(gaussian_pulse_integral(1.0, 1.0, 10.0) == doctest::Approx(kRootHalfPi).epsilon(1e-14));
    CHECK(std::abs(gaussian_pulse_integral(2.0, 0.1, 1.0) - quad_pulse(2.0, 0.1, 1.0)) < 1e-10);
    for (double A : {-1.5, -0.2, 0.3, 1.0, 4.0})
        for (double theta : {0.01, 0.05, 0.2, 1.0, 3.0})
            for (double t : {0.0, 0.01, 0.3, 1.0, 7.5})
                CHECK(std::abs(gaussian_pulse_integral(A, theta, t) - quad_pulse(A, theta, t)) < 1e-10);
    CHECK_THROWS_AS(gaussian_pulse_integral(1.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(GaussianPulse({1.0}, {-0.1}), std::domain_error);
}

TEST_CASE("perturbed moduli")
{
    const Vec psiE = {0.2, -0.3};
    const GaussianPulse p({1.0, 0.5}, {0.05, 0.1});
    CHECK(p.anisotropic());
    CHECK_FALSE(GaussianPulse::isotropic(3, 1.0, 0.1).anisotropic());
    const ModuliState s0 = perturbed_moduli(psiE, p, 0.0);
    CHECK(s0.psi[0] == psiE[0]);
    CHECK(s0.psi[1] == psiE[1]);
    const ModuliState late = perturbed_moduli(psiE, p, 5.0);
    CHECK(late.psi[0] == doctest::Approx(psiE[0] + 0.05 * kRootHalfPi).epsilon(1e-14));
    const ModuliState peaked = perturbed_moduli({0.0, 0.0}, GaussianPulse::isotropic(2, 1.0, 0.05), 1.0);
    CHECK(peaked.dpsi[0] < 1e-80);
    CHECK(peaked.dpsi[0] >= 0.0);

    // Derivative matches a central difference of the value.
    const double h = 1e-6, t = 0.07;
    const double fd = (pulse_value(1.0, 0.05, t + h) - pulse_value(1.0, 0.05, t - h)) / (2.0 * h);
    CHECK(pulse_derivative(1.0, 0.05, t) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("attractor")
{
    const Radii aE({1.0, 2.0});
    const Radii same = attractor(aE, GaussianPulse({0.0, 0.0}, {0.1, 0.1}));
    CHECK(same.a[0] == 1.0);
    CHECK(same.a[1] == 2.0);
    const Radii one = attractor(Radii({1.0}), GaussianPulse({1.0}, {1.0}));
    CHECK(one.a[0] == doctest::Approx(std::exp(kRootHalfPi)));
    CHECK(one.a[0] == doctest::Approx(3.50193).epsilon(1e-5));
    CHECK(perturbed_radii(Radii({1.0}), GaussianPulse({1.0}, {1.0}), 1000.0).a[0] == doctest::Approx(one.a[0]));
    CHECK(attractor(Radii({1.0}), GaussianPulse({-1.0}, {0.5})).a[0] < 1.0);
    for (double theta : {0.01, 0.1, 0.5}) {
        const GaussianPulse p({0.8}, {theta});
        const double star = attractor(Radii({1.3}), p).a[0];
        for (double m : {8.0, 12.0, 50.0})
            CHECK(std::abs(perturbed_radii(Radii({1.3}), p, m * theta).a[0] - star) / star < 1e-6);
    }
}

TEST_CASE("source term equals the perturbed residual")
{
    const Vec psiE = {0.1, 0.0, -0.2};
    const GaussianPulse p({0.7, -0.4, 1.1}, {0.05, 0.08, 0.1});
    for (const auto& c : {OperatorCoefficients::einstein(), OperatorCoefficients::einstein_diagonal()}) {
        for (double t = 0.0; t < 1.0; t += 0.013)
            CHECK(std::abs(h_residual(perturbed_moduli(psiE, p, t), c) - pulse_source_term(p, t, c)) < 1e-9);
    }
    // Finite-difference residual of the sampled trajectory.
    const double dt = 1e-4;
    std::vector<Vec> series(3, Vec(2001));
    for (std::size_t k = 0; k <= 2000; ++k) {
        const ModuliState s = perturbed_moduli(psiE, p, k * dt);
        for (int i = 0; i < 3; ++i) series[i][k] = s.psi[i];
    }
    for (std::size_t k : {100u, 500u, 1500u}) {
        const double fd = h_residual(finite_difference_state(series, dt, k), OperatorCoefficients::einstein());
        CHECK(fd == doctest::Approx(pulse_source_term(p, k * dt)).epsilon(1e-5));
    }
}

TEST_CASE("source term at the peak and far away")
{
    const std::size_t n = 3;
    const double A = 0.6;
    const GaussianPulse p = GaussianPulse::isotropic(n, A, 0.1);
    const double dn = static_cast<double>(n);
    CHECK(pulse_source_term(p, 0.0) == doctest::Approx(0.5 * dn * A * A + 0.5 * dn * dn * A * A));
    CHECK(pulse_source_term(p, 0.0, OperatorCoefficients::einstein_diagonal()) == doctest::Approx(dn * A * A));
    CHECK(std::abs(pulse_source_term(p, 5.0)) < 1e-100);
    CHECK(pulse_source_term(GaussianPulse::isotropic(n, 0.0, 0.1), 0.02) == 0.0);

    const PrintedSourceForms f = printed_source_forms(p, 0.03);
    CHECK(f.half_weights == doctest::Approx(pulse_source_term(p, 0.03)));
    CHECK(f.unit_weights != doctest::Approx(pulse_source_term(p, 0.03)));
}

TEST_CASE("constant perturbation")
{
    const auto diag = OperatorCoefficients::einstein_diagonal();
    const ConstantPerturbation zero = constant_perturbation(Vec(3, 0.2), {0.0}, 2.0, diag);
    CHECK(zero.residual == 0.0);
    CHECK(constant_perturbation(Vec(3, 0.0), {1.0}, 1.0, diag).residual == doctest::Approx(3.0));
    const ConstantPerturbation c = constant_perturbation(Vec(4, 0.0), {-0.5}, 2.0, diag);
    CHECK(c.residual == doctest::Approx(1.0));
    CHECK(c.radii.a[0] == doctest::Approx(std::exp(-1.0)));
    // Full cross sum: (n + n^2) A^2 / 2.
    CHECK(constant_perturbation(Vec(3, 0.0), {1.0}, 1.0, OperatorCoefficients::einstein()).residual ==
          doctest::Approx(6.0));
}

TEST_CASE("perturbed norms")
{
    const Radii aE({1.0, 1.0});
    const GaussianPulse p = GaussianPulse::isotropic(2, 1.0, 0.1);
    CHECK(perturbed_norm(aE, p, 0.0) == 0.0);
    const double lim = std::sqrt(2.0) * (std::exp(0.1 * kRootHalfPi) - 1.0);
    CHECK(perturbed_norm(aE, p, 10.0) == doctest::Approx(lim));
    CHECK(perturbed_norm_bound(aE, p) == doctest::Approx(lim));
    for (double t = 0.0; t < 3.0; t += 0.05) CHECK(perturbed_norm(aE, p, t) <= lim * (1.0 + 1e-12));

    double prev = 0.0;
    for (double t : {1.0, 10.0, 50.0, 100.0}) {
        const double v = constant_perturbed_norm(aE, {0.3}, t);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(prev > 1e12);
}

TEST_CASE("relaxation of Kasner observables")
{
    const KasnerExponents p{{-1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0}};
    std::vector<double> ts;
    for (double t = 0.005; t <= 2.0; t += 0.005) ts.push_back(t);

    const RelaxationReport none = relaxation_check(p, GaussianPulse::isotropic(3, 0.0, 0.01), ts);
    CHECK(none.max_dK_after == 0.0);
    CHECK(none.relaxed);

    const RelaxationReport r = relaxation_check(p, GaussianPulse::isotropic(3, 1.0, 0.01), ts);
    CHECK(r.relaxed);
    CHECK(r.threshold_time == doctest::Approx(0.1));
    CHECK(r.max_dK_after < 1e-8);
    CHECK(r.crossing_K > 0.0);
    CHECK(r.crossing_K <= 0.1);

    const RelaxationReport peak = relaxation_check(p, GaussianPulse::isotropic(3, 1.0, 0.01), {0.01});
    CHECK(peak.samples[0].dchi > 1e-3);
    CHECK_THROWS_AS(relaxation_check({{0.5, 0.5, 0.5}}, GaussianPulse::isotropic(3, 1.0, 0.01), ts),
                    precondition_error);
}
