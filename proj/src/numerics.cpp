#include "nc/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace nc {

namespace {

constexpr std::size_t kLeaf = 16;

double pairwise_impl(const double* x, std::size_t n)
{
    if (n <= kLeaf) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_impl(x, half) + pairwise_impl(x + half, n - half);
}

double simpson(double fa, double fm, double fb, double a, double b)
{
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double pairwise_sum(std::span<const double> x) { return pairwise_impl(x.data(), x.size()); }

MeanSE mean_se(std::span<const double> x)
{
    MeanSE r;
    r.n = x.size();
    if (x.empty()) return r;
    r.mean = pairwise_sum(x) / static_cast<double>(x.size());
    if (x.size() < 2) return r;
    std::vector<double> dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - r.mean) * (x[i] - r.mean);
    const double var = pairwise_sum(dev) / static_cast<double>(x.size() - 1);
    r.sd = std::sqrt(var);
    r.se = r.sd / std::sqrt(static_cast<double>(x.size()));
    return r;
}

double trapezoid(std::span<const double> y, double dt)
{
    if (y.size() < 2) return 0.0;
    std::vector<double> w(y.begin(), y.end());
    w.front() *= 0.5;
    w.back() *= 0.5;
    return dt * pairwise_sum(w);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares: need two or more paired points");
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n;
    const double my = pairwise_sum(y) / n;
    std::vector<double> sxy(x.size()), sxx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy[i] = (x[i] - mx) * (y[i] - my);
        sxx[i] = (x[i] - mx) * (x[i] - mx);
    }
    const double den = pairwise_sum(sxx);
    if (den == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
    LinearFit fit;
    fit.slope = pairwise_sum(sxy) / den;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth)
{
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return simpson_step(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth);
}

std::vector<double> log_space(double lo, double hi, std::size_t count)
{
    if (!(lo > 0.0) || !(hi > 0.0) || count == 0)
        throw std::invalid_argument("log_space: bounds must be positive");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double l0 = std::log(lo);
    const double step = (std::log(hi) - l0) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(l0 + step * static_cast<double>(i));
    out.back() = hi;
    return out;
}

}  // namespace nc
