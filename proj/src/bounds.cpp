#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nc/estimate.hpp"

namespace nc {

namespace {

double frequency(std::span<const double> x, auto pred)
{
    std::size_t c = 0;
    for (double v : x)
        if (pred(v)) ++c;
    return static_cast<double>(c) / static_cast<double>(x.size());
}

// Relative standard error of a frequency estimate with true value p.
double binomial_rel_se(double p, std::size_t N)
{
    if (!(p > 0.0) || p >= 1.0) return 0.0;
    return std::sqrt((1.0 - p) / (p * static_cast<double>(N)));
}

void finish(BoundReport& b)
{
    b.holds = b.empirical_value <= b.bound_value * (1.0 + b.tolerance);
}

}  // namespace

BoundReport markov_bound(double expected_norm, double L)
{
    if (!(L > 0.0)) throw std::domain_error("markov_bound: L must be positive");
    BoundReport b;
    b.name = "markov";
    b.bound_value = expected_norm / L;
    b.empirical_value = std::numeric_limits<double>::quiet_NaN();
    b.params = {{"expected_norm", expected_norm}, {"L", L}};
    return b;
}

BoundReport markov_bound(std::span<const double> samples, double L)
{
    if (samples.size() < 2) throw std::invalid_argument("markov_bound: need two or more samples");
    const MeanSE m = mean_se(samples);
    BoundReport b = markov_bound(m.mean, L);
    b.empirical_value = frequency(samples, [L](double v) { return v >= L; });
    b.tolerance = m.mean > 0.0 ? 5.0 * m.se / m.mean : 0.0;
    b.params["N"] = static_cast<double>(samples.size());
    finish(b);
    return b;
}

Vec default_beta_grid() { return log_space(1e-3, 1e3, 64); }

BoundReport chernoff_tail(std::span<const double> samples, double L, std::span<const double> beta_grid)
{
    if (samples.size() < 2) throw std::invalid_argument("chernoff_tail: need two or more samples");
    if (beta_grid.empty()) throw std::invalid_argument("chernoff_tail: empty beta grid");
    for (double b : beta_grid)
        if (!(b > 0.0)) throw std::domain_error("chernoff_tail: beta grid must be positive");
    const double xmin = *std::min_element(samples.begin(), samples.end());

    double best_log = INFINITY, best_beta = beta_grid[0], best_rel = 0.0;
    Vec w(samples.size());
    for (double beta : beta_grid) {
        for (std::size_t r = 0; r < w.size(); ++r) w[r] = std::exp(-beta * (samples[r] - xmin));
        const MeanSE m = mean_se(w);
        const double lg = beta * (L - xmin) + std::log(m.mean);
        if (lg < best_log) {
            best_log = lg;
            best_beta = beta;
            best_rel = m.se / m.mean;
        }
    }
    BoundReport b;
    b.name = "chernoff";
    b.bound_value = std::exp(best_log);
    b.empirical_value = frequency(samples, [L](double v) { return v <= L; });
    b.tolerance = 5.0 * best_rel;
    b.params = {{"L", L}, {"beta_star", best_beta}, {"N", static_cast<double>(samples.size())}};
    finish(b);
    return b;
}

BoundReport hoeffding_bound(const std::vector<Vec>& samples, const Vec& lo, const Vec& hi, double L,
                            double expected_mean)
{
    if (samples.size() < 2) throw std::invalid_argument("hoeffding_bound: need two or more samples");
    const std::size_t n = lo.size();
    if (n == 0 || hi.size() != n) throw std::invalid_argument("hoeffding_bound: range vectors must match");
    if (L < 0.0) throw std::domain_error("hoeffding_bound: L must be >= 0");
    double width2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(hi[i] > lo[i])) throw std::invalid_argument("hoeffding_bound: empty range");
        width2 += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    }
    Vec means(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r) {
        if (samples[r].size() != n) throw std::invalid_argument("hoeffding_bound: sample dimension mismatch");
        for (std::size_t i = 0; i < n; ++i)
            if (samples[r][i] < lo[i] || samples[r][i] > hi[i])
                throw precondition_error("hoeffding_bound: sample outside its declared range");
        means[r] = pairwise_sum(samples[r]) / static_cast<double>(n);
    }
    const double nn = static_cast<double>(n);
    BoundReport b;
    b.name = "hoeffding";
    b.bound_value = std::exp(-2.0 * nn * nn * L * L / width2);
    b.empirical_value = frequency(means, [&](double v) { return v - expected_mean >= L; });
    b.tolerance = 5.0 * binomial_rel_se(b.bound_value, samples.size());
    b.params = {{"L", L}, {"n", nn}, {"range_sq_sum", width2}, {"N", static_cast<double>(samples.size())}};
    finish(b);
    return b;
}

MaximalReport maximal_bound(const std::vector<Vec>& samples, double sub_gaussian_C, double L)
{
    if (samples.size() < 2) throw std::invalid_argument("maximal_bound: need two or more samples");
    if (!(sub_gaussian_C > 0.0)) throw std::domain_error("maximal_bound: sub-Gaussian parameter must be positive");
    const std::size_t n = samples[0].size();
    if (n == 0) throw std::invalid_argument("maximal_bound: empty family");
    Vec mx(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r) {
        if (samples[r].size() != n) throw std::invalid_argument("maximal_bound: sample dimension mismatch");
        mx[r] = *std::max_element(samples[r].begin(), samples[r].end());
    }
    const MeanSE m = mean_se(mx);
    const double nn = static_cast<double>(n);
    const double C = sub_gaussian_C;

    MaximalReport out;
    out.vacuous_edge = n == 1;
    BoundReport& e = out.expectation;
    e.name = "maximal_expectation";
    e.bound_value = C * std::sqrt(2.0 * std::log(nn));
    e.empirical_value = m.mean;
    e.params = {{"n", nn}, {"C", C}, {"N", static_cast<double>(samples.size())}, {"se", m.se}};
    if (out.vacuous_edge) {
        // Bound is exactly 0; a centered variable meets it with equality.
        e.tolerance = 5.0 * m.se;
        e.holds = std::abs(e.empirical_value) <= e.tolerance;
    } else {
        e.tolerance = 5.0 * m.se / e.bound_value;
        finish(e);
    }

    BoundReport& t = out.tail;
    t.name = "maximal_tail";
    t.bound_value = nn * std::exp(-L * L / (2.0 * C * C));
    t.empirical_value = frequency(mx, [L](double v) { return v >= L; });
    t.tolerance = 5.0 * binomial_rel_se(std::min(t.bound_value, 1.0), samples.size());
    t.params = {{"n", nn}, {"C", C}, {"L", L}};
    finish(t);
    return out;
}

GammaBasin gamma_basin(std::span<const double> final_norms, double L, double gamma)
{
    if (!(gamma > 0.0) || gamma > 1.0) throw std::domain_error("gamma_basin: gamma must lie in (0, 1]");
    if (final_norms.empty()) throw std::invalid_argument("gamma_basin: empty ensemble");
    GammaBasin g;
    g.probability = frequency(final_norms, [L](double v) { return v <= L; });
    g.inside = g.probability >= gamma;
    return g;
}

}  // namespace nc
