#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nc/core.hpp"
#include "nc/parallel.hpp"

namespace nc {

enum class KernelKind { OU, SquaredExp, WhiteLimit };
enum class NoiseMode { shared, iid };

const char* to_string(KernelKind k);
const char* to_string(NoiseMode m);
KernelKind kernel_kind_from_string(const std::string& s);
NoiseMode noise_mode_from_string(const std::string& s);

class kernel_not_psd : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class unsupported_kernel : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct CovarianceKernel {
    KernelKind kind = KernelKind::OU;
    double C = 1.0;
    double varsigma = 1.0;
    double alpha = 0.0;  // white-noise strength, E{W(t)W(s)} = alpha delta(t - s)

    static CovarianceKernel ou(double C, double varsigma);
    static CovarianceKernel squared_exp(double C, double varsigma);
    static CovarianceKernel white_limit(double alpha);

    bool regulated() const { return kind != KernelKind::WhiteLimit; }
    double J0() const;
    // Variance of the derivative field, -J''(0). Only the squared-exponential kernel has one.
    double derivative_variance() const;
    // Integral of J over the whole line.
    double line_integral() const;
};

double kernel_eval(const CovarianceKernel& k, double delta);

// Kernel actually simulated on a grid: a white limit becomes OU with correlation time dt/100
// and the same line integral alpha.
CovarianceKernel simulation_kernel(const CovarianceKernel& k, double dt);

struct NoisePath {
    TimeGrid grid;
    CovarianceKernel kernel;
    NoiseMode mode = NoiseMode::iid;
    std::size_t n_components = 1;
    std::vector<Vec> values;  // one series when shared, n_components series when iid

    const Vec& component(std::size_t i) const { return mode == NoiseMode::shared ? values.at(0) : values.at(i); }
};

struct Ensemble {
    std::vector<NoisePath> paths;
    std::uint64_t seed = 0;
    CovarianceKernel kernel;
    TimeGrid grid;
    NoiseMode mode = NoiseMode::iid;
    std::size_t n_components = 1;

    std::size_t size() const { return paths.size(); }
};

// Counter-based stream for path r, component i.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t stream_hash(std::uint64_t r, std::uint64_t i);
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t r, std::uint64_t i);

NoisePath sample_ou(const TimeGrid& grid, const CovarianceKernel& kernel, std::uint64_t seed, NoiseMode mode,
                    std::size_t n_components, std::uint64_t path_id = 0);

Eigen::MatrixXd gram_matrix(const CovarianceKernel& kernel, const TimeGrid& grid);

inline constexpr std::size_t kCholeskyCap = 4096;

// Cholesky sampler for an arbitrary regulated kernel on a fixed grid.
class GaussianSampler {
public:
    GaussianSampler(const CovarianceKernel& kernel, const TimeGrid& grid, std::size_t cap = kCholeskyCap);

    NoisePath sample(std::uint64_t seed, NoiseMode mode, std::size_t n_components, std::uint64_t path_id) const;
    Vec draw(std::mt19937_64& rng) const;
    double jitter() const { return jitter_; }

private:
    CovarianceKernel kernel_;
    TimeGrid grid_;
    Eigen::MatrixXd lower_;
    double jitter_ = 0.0;
};

NoisePath sample_gaussian_kernel(const TimeGrid& grid, const CovarianceKernel& kernel, std::uint64_t seed,
                                 NoiseMode mode, std::size_t n_components, std::uint64_t path_id = 0);

struct PsdCheck {
    double min_eigenvalue = 0.0;
    bool ok = false;
};

PsdCheck check_psd(const CovarianceKernel& kernel, const TimeGrid& grid);
PsdCheck check_psd_matrix(const Eigen::MatrixXd& gram, double j0);

struct FieldSpec {
    CovarianceKernel kernel;
    TimeGrid grid;
    NoiseMode mode = NoiseMode::iid;
    std::size_t n_components = 1;
    std::uint64_t seed = 0;
};

// Produces path r of an ensemble on demand; OU and white limits use the exact AR(1)
// recursion, the squared-exponential kernel uses a cached Cholesky factor.
class FieldGenerator {
public:
    explicit FieldGenerator(FieldSpec spec, bool force_cholesky = false);

    NoisePath path(std::size_t r) const;
    const FieldSpec& spec() const { return spec_; }

private:
    FieldSpec spec_;
    std::unique_ptr<GaussianSampler> sampler_;
};

Ensemble generate_ensemble(const FieldSpec& spec, std::size_t N, bool force_cholesky = false);

// Evaluates fn on each path without retaining the ensemble; results are ordered by path index.
template <class T>
std::vector<T> map_paths(const FieldGenerator& gen, std::size_t N,
                         const std::function<T(std::size_t, const NoisePath&)>& fn)
{
    std::vector<T> out(N);
    parallel_for(N, [&](std::size_t r) { out[r] = fn(r, gen.path(r)); });
    return out;
}

struct CovarianceEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

CovarianceEstimate estimate_covariance(const Ensemble& ensemble, std::size_t lag_steps);
// E{U(t_k) U(t_l)} across the ensemble for component 0.
CovarianceEstimate covariance_at(const Ensemble& ensemble, std::size_t k, std::size_t l);

Vec cumulative_integral(const Vec& series, double dt);
Vec path_integral(const NoisePath& path, double upto);
std::vector<Vec> path_derivative(const NoisePath& path);

// Serialization: columnar CSV (t, component, path_id, value) and a binary cache.
void write_ensemble_csv(const Ensemble& ensemble, std::ostream& os);
void write_ensemble_cache(const Ensemble& ensemble, const std::string& file);
Ensemble read_ensemble_cache(const std::string& file);

std::string format_double(double v);

}  // namespace nc
