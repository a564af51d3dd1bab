#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nc {

using Vec = std::vector<double>;

// Thrown when an operation's preconditions are violated by otherwise valid input.
class precondition_error : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct TimeGrid {
    double t_start = 0.0;
    double dt = 1.0;
    std::size_t n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double t_start, double dt, std::size_t n_steps);

    std::size_t size() const { return n_steps + 1; }
    double at(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
    double t_end() const { return at(n_steps); }
    std::size_t index_of(double t) const;
};

struct ModuliState {
    Vec psi;
    Vec dpsi;
    Vec ddpsi;

    ModuliState() = default;
    ModuliState(Vec psi, Vec dpsi, Vec ddpsi);
    std::size_t n() const { return psi.size(); }
    static ModuliState static_state(const Vec& psi);
};

struct Radii {
    Vec a;

    Radii() = default;
    explicit Radii(Vec a);
    std::size_t n() const { return a.size(); }
};

struct KasnerExponents {
    Vec p;
};

struct GeometryObservables {
    double volume = 1.0;
    double norm21 = 0.0;
    double frobenius = 0.0;
    double kretschmann = 0.0;
    double expansion = 0.0;
    double shear_sq = 0.0;
};

// How the double sum over (i, j) in the quadratic cross term is read.
// full: sum over all pairs. diagonal: only i == j survives.
enum class CrossSum { full, diagonal };

struct OperatorCoefficients {
    double c1 = 1.0;
    double c2 = 0.5;
    double c3 = 0.5;
    CrossSum cross = CrossSum::full;

    static OperatorCoefficients einstein();
    static OperatorCoefficients einstein_diagonal();
    static OperatorCoefficients general(double beta);

    // Value of the cross sum for the vector x under this convention.
    double cross_sum(const Vec& x) const;
    // Quadratic weight m such that an isotropic rate q gives c2*n*q^2 + c3*m*q^2.
    double isotropic_weight(std::size_t n) const;
};

const char* to_string(CrossSum c);
CrossSum cross_sum_from_string(const std::string& s);

Radii radii_from_moduli(const Vec& psi);
Vec moduli_from_radii(const Radii& r);
double spatial_volume(const Vec& psi);

enum class Norm21Reading { diagonal_sum, repeated_column };

struct MetricNorms {
    double norm21 = 0.0;
    double frobenius = 0.0;
};

MetricNorms metric_norms(const Vec& psi, Norm21Reading reading = Norm21Reading::diagonal_sum);

// Kretschmann scalar, expansion and shear as printed, plus two variants that appear in
// derivations: the unsquared cross form of K and the linear trace of the expansion.
struct KinematicScalars {
    double kretschmann = 0.0;
    double kretschmann_linear_cross = 0.0;
    double expansion = 0.0;
    double expansion_trace = 0.0;
    double shear_sq = 0.0;
};

KinematicScalars kinematic_scalars(const ModuliState& state);
GeometryObservables observables(const ModuliState& state,
                                Norm21Reading reading = Norm21Reading::diagonal_sum);

void require_finite(const Vec& v, const char* what);

}  // namespace nc
