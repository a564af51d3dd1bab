#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "nc/estimate.hpp"

using namespace nc;

namespace {

// Nested quadrature of the ordered double integral.
double nested_integral(const CovarianceKernel& k, double t)
{
    using boost::math::quadrature::gauss_kronrod;
    auto inner = [&](double s1) {
        return gauss_kronrod<double, 31>::integrate([&](double s2) { return kernel_eval(k, s1 - s2); }, 0.0, s1,
                                                    10, 1e-13);
    };
    return gauss_kronrod<double, 31>::integrate(inner, 0.0, t, 10, 1e-12);
}

// Largest Karhunen-Loeve eigenvalue of sigma^2 exp(-|s - t| / varsigma) on an interval of length T:
// the smallest root of c = w tan(w T / 2) with c = 1 / varsigma gives 2 c sigma^2 / (w^2 + c^2).
double ou_top_eigenvalue(double C, double varsigma, double T)
{
    const double c = 1.0 / varsigma, a = 0.5 * T, s2 = C / varsigma;
    auto f = [&](double w) { return c - w * std::tan(w * a); };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, 1e-12, std::numbers::pi / (2.0 * a) - 1e-12, tol, iters);
    const double w = 0.5 * (r.first + r.second);
    return 2.0 * c * s2 / (w * w + c * c);
}

std::vector<double> normals(std::size_t N, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> x(N);
    for (double& v : x) v = nd(rng);
    return x;
}

}  // namespace

TEST_CASE("ordered double integral against nested quadrature")
{
    for (const auto& k : {CovarianceKernel::ou(1.0, 1.0), CovarianceKernel::ou(0.7, 0.3),
                          CovarianceKernel::squared_exp(1.0, 1.0), CovarianceKernel::squared_exp(2.0, 0.4)}) {
        for (double t : {0.0, 0.1, 1.0, 3.0, 8.0}) {
            const double ref = nested_integral(k, t);
            CHECK(ordered_double_integral(k, t) == doctest::Approx(ref).epsilon(1e-9));
            CHECK(ordered_double_integral(k, t, true) == doctest::Approx(ref).epsilon(1e-7));
        }
    }
    // Late-time slope is half the line integral.
    const auto se = CovarianceKernel::squared_exp(1.0, 0.5);
    const double slope = ordered_double_integral(se, 21.0) - ordered_double_integral(se, 20.0);
    CHECK(slope == doctest::Approx(0.5 * se.line_integral()).epsilon(1e-12));
    CHECK_THROWS(ordered_double_integral(CovarianceKernel::white_limit(1.0), 1.0));
}

TEST_CASE("cumulant normalizations")
{
    const auto k = CovarianceKernel::ou(1.0, 1.0);
    const double I = 2.0 + std::expm1(-2.0);
    CHECK(cumulant_expectation(k, 0.5, 2.0) == doctest::Approx(std::exp(0.25 * I)));
    CHECK(cumulant_expectation(k, 0.5, 2.0, Normalization::ordered_half) == doctest::Approx(std::exp(0.125 * I)));
    CHECK(cumulant_expectation(k, 0.5, 0.0) == 1.0);
    CHECK(normalization_from_string("ordered_half") == Normalization::ordered_half);
    CHECK_THROWS(normalization_from_string("other"));

    CHECK(asymptotic_rate(k, 0.5) == doctest::Approx(0.25));
    CHECK(asymptotic_rate(k, 0.5, Normalization::ordered_half) == doctest::Approx(0.125));
    CHECK(asymptotic_rate(k, 0.5, Normalization::printed) == doctest::Approx(0.125));
    const auto se = CovarianceKernel::squared_exp(1.0, 1.0);
    CHECK(asymptotic_rate(se, 0.4) == doctest::Approx(0.08 * std::sqrt(std::numbers::pi)));
}

TEST_CASE("cumulant matches the Monte-Carlo moment generating function")
{
    const auto k = CovarianceKernel::ou(1.0, 1.0);
    const FieldSpec spec{k, TimeGrid(0.0, 0.01, 300), NoiseMode::shared, 1, 21};
    for (double t : {1.0, 3.0}) {
        const MeanSE m = mgf_of_integral_mc(spec, 0.3, t, 20000);
        const double exact = cumulant_expectation(k, 0.3, t);
        // Trapezoid bias is O(dt^2) on the variance.
        CHECK(std::abs(m.mean - exact) < 4.0 * m.se + 1e-4 * exact);
    }
    const MeanSE v = mgf_of_value_mc(spec, 0.5, 2.0, 20000);
    CHECK(std::abs(v.mean - stable_class_moment(k, 0.5)) < 4.0 * v.se);
}

TEST_CASE("growth laws")
{
    for (Normalization norm : {Normalization::gaussian, Normalization::ordered_half, Normalization::printed}) {
        const GrowthLaw g = growth_law_ou(1.5, 4, 0.5, 1.0, 0.8, norm);
        CHECK(g.prefactor == doctest::Approx(3.0));
        CHECK(g(0.0) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(std::log(g(5.0)) == doctest::Approx(g.log_value(5.0)));
        CHECK(g.log_value(41.0) - g.log_value(40.0) == doctest::Approx(g.rate).epsilon(1e-9));
        CHECK(norm_growth_ou(1.5, 4, 0.5, 1.0, 0.8, 5.0, norm) == doctest::Approx(g(5.0)));

        const GrowthLaw s = growth_law_se(1.0, 1, 0.4, 1.0, 1.0, norm);
        if (norm != Normalization::printed) CHECK(s(0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.log_value(41.0) - s.log_value(40.0) == doctest::Approx(s.rate).epsilon(1e-9));
    }
    // The Gaussian laws are sqrt(n) aE times the cumulant.
    const auto k = CovarianceKernel::ou(1.0, 0.8);
    CHECK(growth_law_ou(1.5, 4, 0.5, 1.0, 0.8)(3.0) == doctest::Approx(3.0 * cumulant_expectation(k, 0.5, 3.0)));
    const auto se = CovarianceKernel::squared_exp(1.0, 1.0);
    CHECK(growth_law_se(1.0, 2, 0.4, 1.0, 1.0)(3.0) ==
          doctest::Approx(std::sqrt(2.0) * cumulant_expectation(se, 0.4, 3.0)));
    CHECK(growth_law_ou(1.0, 1, 0.5, 1.0, 1.0, Normalization::printed).rate == doctest::Approx(0.125));
    CHECK(growth_law_se(1.0, 1, 0.4, 1.0, 1.0, Normalization::printed).rate == doctest::Approx(0.08));
    // The printed squared-exponential law carries an offset at t = 0.
    CHECK(growth_law_se(1.0, 1, 0.4, 1.0, 1.0, Normalization::printed)(0.0) ==
          doctest::Approx(std::exp(0.08 / std::sqrt(std::numbers::pi))));
}

TEST_CASE("Lyapunov exponent estimators")
{
    Vec t, v;
    for (int k = 0; k <= 200; ++k) {
        t.push_back(0.1 * k);
        v.push_back(2.0 * std::exp(0.3 * t.back()) * (1.0 + std::exp(-t.back())));
    }
    CHECK(lyapunov_from_series(t, v, default_burn_in(1.0)) == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(default_burn_in(0.05) == 1.0);
    CHECK(default_burn_in(2.0) == 20.0);
    CHECK_THROWS_AS(lyapunov_from_series(t, v, 19.5), precondition_error);

    const Vec flat(100, std::exp(2.0));
    CHECK(moment_lce(flat, 1.0, 1.0) == doctest::Approx(2.0));
    CHECK(moment_lce(flat, 3.0, 2.0) == doctest::Approx(3.0));
    Vec spiky(100, 0.0);
    spiky[0] = 1.0;
    CHECK_THROWS_AS(moment_lce(spiky, 1.0, 1.0), precondition_error);
    CHECK_THROWS_AS(moment_lce(flat, 0.5, 1.0), std::domain_error);
}

TEST_CASE("Karhunen-Loeve spectrum")
{
    const auto k = CovarianceKernel::ou(1.0, 1.0);
    const TimeGrid g(0.0, 5.0 / 511.0, 511);
    const Vec ev = kl_spectrum(k, g);
    CHECK(ev.size() == 512);
    for (std::size_t i = 1; i < ev.size(); ++i) CHECK(ev[i] <= ev[i - 1]);
    CHECK(ev.back() > -1e-12);
    CHECK(ev[0] == doctest::Approx(ou_top_eigenvalue(1.0, 1.0, 5.0)).epsilon(0.01));

    const KlReport r = kl_alternative_bound(k, g, 0.5, 1.0, 3, 5.0);
    CHECK(r.trace_rel_error < 0.01);
    CHECK(r.C1 == doctest::Approx(1.0));
    CHECK(r.C2 == doctest::Approx(1.0));
    CHECK(r.bound.holds);
    CHECK(r.cumulant == doctest::Approx(cumulant_expectation(k, 0.5, 5.0)));
    CHECK_THROWS_AS(kl_alternative_bound(CovarianceKernel::white_limit(1.0), g, 0.5, 1.0, 3, 5.0),
                    unsupported_kernel);
}

TEST_CASE("Markov and Chernoff bounds")
{
    CHECK(markov_bound(3.0, 6.0).bound_value == doctest::Approx(0.5));
    CHECK_THROWS_AS(markov_bound(3.0, 0.0), std::domain_error);

    const Vec x = normals(20000, 4);
    Vec ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = std::abs(x[i]);
    const BoundReport m = markov_bound(ax, 1.5);
    CHECK(m.bound_value == doctest::Approx(std::sqrt(2.0 / std::numbers::pi) / 1.5).epsilon(0.03));
    CHECK(m.holds);

    // Lower tail of a standard normal: the optimal Chernoff bound is exp(-L^2 / 2).
    const Vec grid = default_beta_grid();
    CHECK(grid.size() == 64);
    const BoundReport c = chernoff_tail(x, -2.0, grid);
    CHECK(c.holds);
    CHECK(c.bound_value == doctest::Approx(std::exp(-2.0)).epsilon(0.1));
    CHECK(c.params.at("beta_star") == doctest::Approx(2.0).epsilon(0.15));
    CHECK(c.empirical_value == doctest::Approx(0.02275).epsilon(0.1));
}

TEST_CASE("Hoeffding bound")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec> s(20000, Vec(4));
    for (auto& r : s)
        for (double& v : r) v = u(rng);
    const Vec lo(4, 0.0), hi(4, 1.0);
    const BoundReport h = hoeffding_bound(s, lo, hi, 0.2, 0.5);
    CHECK(h.bound_value == doctest::Approx(std::exp(-2.0 * 16.0 * 0.04 / 4.0)));
    CHECK(h.holds);
    CHECK(h.empirical_value < h.bound_value);
    s[3][1] = 1.5;
    CHECK_THROWS_AS(hoeffding_bound(s, lo, hi, 0.2, 0.5), precondition_error);
}

TEST_CASE("maximal inequality")
{
    for (std::size_t n : {1u, 8u, 64u}) {
        std::vector<Vec> s(5000, Vec(n));
        const Vec z = normals(5000 * n, 100 + n);
        for (std::size_t r = 0; r < s.size(); ++r)
            for (std::size_t i = 0; i < n; ++i) s[r][i] = z[r * n + i];
        const MaximalReport m = maximal_bound(s, 1.0, 3.5);
        CHECK(m.vacuous_edge == (n == 1));
        CHECK(m.expectation.bound_value == doctest::Approx(std::sqrt(2.0 * std::log(static_cast<double>(n)))));
        CHECK(m.expectation.holds);
        CHECK(m.tail.holds);
        CHECK(m.tail.bound_value == doctest::Approx(static_cast<double>(n) * std::exp(-3.5 * 3.5 / 2.0)));
    }
}

TEST_CASE("gamma basin")
{
    const Vec norms = {0.1, 0.2, 0.3, 0.4, 5.0};
    CHECK(gamma_basin(norms, 1.0, 0.8).probability == doctest::Approx(0.8));
    CHECK(gamma_basin(norms, 1.0, 0.8).inside);
    CHECK_FALSE(gamma_basin(norms, 1.0, 0.9).inside);
    CHECK_THROWS_AS(gamma_basin(norms, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(gamma_basin(norms, 1.0, 1.1), std::domain_error);
}

TEST_CASE("stable class")
{
    const auto se = CovarianceKernel::squared_exp(1.0, 1.0);
    CHECK(stable_class_moment(se, 0.3) == doctest::Approx(std::exp(0.045)));
    // iid: zeta^2 Xi (c2 n + c3 n); shared full: zeta^2 Xi (c2 n + c3 n^2).
    CHECK(stable_class_residual(se, 0.3, 3) == doctest::Approx(0.09 * 2.0 * 3.0));
    CHECK(stable_class_residual(se, 0.3, 3, NoiseMode::shared) == doctest::Approx(0.09 * 2.0 * 6.0));
    CHECK_THROWS_AS(stable_class_residual(CovarianceKernel::ou(1.0, 1.0), 0.3, 3), unsupported_kernel);

    const FieldSpec spec{se, TimeGrid(0.98, 0.01, 4), NoiseMode::iid, 3, 14};
    const StableResidualMC r = stable_class_residual_mc(spec, 0.3, 1.0, 20000);
    CHECK(r.analytic == doctest::Approx(stable_class_residual(se, 0.3, 3)));
    CHECK(std::abs(r.z_score) <= 4.0);

    const FieldSpec wide{se, TimeGrid(0.0, 0.1, 50), NoiseMode::iid, 3, 15};
    const SupCheck s = stable_class_sup(wide, 0.3, 5000);
    CHECK(s.analytic_mean == doctest::Approx(std::exp(0.045)));
    CHECK(s.threshold == doctest::Approx(5.0 * std::exp(0.045)));
    CHECK(s.exceed_count == 0);

    const FieldSpec ou{CovarianceKernel::ou(1.0, 1.0), TimeGrid(0.0, 0.1, 20), NoiseMode::iid, 2, 3};
    const auto norms = perturbed_norm_ensemble(ou, 0.3, 1.0, {0, 10, 20}, 200);
    CHECK(norms.size() == 3);
    for (double v : norms[0]) CHECK(v == 0.0);
    for (double v : norms[2]) CHECK(v >= 0.0);
}
