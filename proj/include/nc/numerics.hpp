#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nc {

// Pairwise (cascade) summation; result does not depend on how callers chunk the work.
double pairwise_sum(std::span<const double> x);

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};

MeanSE mean_se(std::span<const double> x);

// Trapezoid rule on uniformly spaced samples.
double trapezoid(std::span<const double> y, double dt);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// Adaptive Simpson quadrature with Richardson correction.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 48);

std::vector<double> log_space(double lo, double hi, std::size_t count);

}  // namespace nc
