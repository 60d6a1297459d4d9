#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace harmonize {

enum class DensityKind { Riesz, Bessel, Custom };

// Temporal spectral measure nu(dtau) = scale * eta(|tau|) dtau.
class SpectralDensity1D {
public:
    // eta = |tau|^-gamma, gamma in (-1, 1).
    static SpectralDensity1D riesz(double gamma);
    // eta = (1 + tau^2)^(-gamma/2), gamma > -1.
    static SpectralDensity1D bessel(double gamma);
    // tail_order q means eta(tau) = O(tau^-q) at infinity; K needs q > -1.
    static SpectralDensity1D custom(std::function<double(double)> eta, bool singular_at_zero,
                                    double tail_order, std::string label = "custom");

    SpectralDensity1D scaled(double c) const;

    DensityKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    double scale() const { return scale_; }
    double tail_order() const { return tail_order_; }
    bool singular_at_zero() const { return singular_; }
    const std::string& label() const { return label_; }

    double eta(double tau) const;
    double k() const { return k_; }

    // Spec string in the measure grammar (riesz:<g>, bessel:<g>, scaled:<c>:<spec>).
    std::string describe() const;

private:
    SpectralDensity1D() = default;
    void finish();

    DensityKind kind_ = DensityKind::Riesz;
    double gamma_ = 0.0;
    double scale_ = 1.0;
    double tail_order_ = 0.0;
    bool singular_ = false;
    std::string label_;
    std::shared_ptr<const std::function<double(double)>> custom_;
    double k_ = 0.0;
};

enum class SpatialKind { RadialPower, RadialBessel, Lebesgue, Discrete };

struct Atom {
    std::vector<double> point;
    double weight = 0.0;
};

// Spatial measure mu on R^d. Radial kinds carry density scale * w(|xi|).
class SpatialMeasure {
public:
    // w(r) = r^-alpha, needs alpha < d.
    static SpatialMeasure radial_power(double alpha, int d);
    // w(r) = (1 + r^2)^(-alpha/2).
    static SpatialMeasure radial_bessel(double alpha, int d);
    static SpatialMeasure lebesgue(int d);
    // Missing mirror atoms are added (with a warning on stderr).
    static SpatialMeasure discrete(std::vector<Atom> atoms, int d);

    SpatialMeasure scaled(double c) const;

    SpatialKind kind() const { return kind_; }
    int dim() const { return d_; }
    double alpha() const { return alpha_; }
    double scale() const { return scale_; }
    bool radial() const { return kind_ != SpatialKind::Discrete; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // Radial density w(r) including the scale factor.
    double density(double r) const;
    std::string describe() const;

private:
    SpatialMeasure() = default;

    SpatialKind kind_ = SpatialKind::Lebesgue;
    int d_ = 1;
    double alpha_ = 0.0;
    double scale_ = 1.0;
    std::vector<Atom> atoms_;
    std::vector<std::string> warnings_;
};

// Witness constants for the scaling condition (C) and the monotone
// conditions (C1)/(C2) used by the wave bounds.
enum class Monotonicity { NonIncreasing, NonDecreasing, Constant, Neither, Inconclusive };

struct ConditionReport {
    bool satisfies_C = false;
    std::vector<std::pair<double, double>> C_witness;  // (lambda, C_lambda)
    bool satisfies_C1 = false;
    std::vector<std::pair<double, double>> C1_witness;  // (K, D_K)
    bool satisfies_C2 = false;
    std::vector<std::pair<double, double>> C2_witness;  // (K, D_K)
    Monotonicity monotonicity = Monotonicity::Inconclusive;
    bool inconclusive = false;
    std::string note;
};

double eta_density(const SpectralDensity1D& m, double tau);
double k_constant(const SpectralDensity1D& m);

ConditionReport classify_conditions(const SpectralDensity1D& m, const std::vector<double>& probe_lambda,
                                    const std::vector<double>& probe_a);

// C_lambda with eta(lambda tau) <= C_lambda eta(tau). Closed form for Riesz and
// Bessel, sup over the sampling grid for Custom.
double condition_C_constant(const SpectralDensity1D& m, double lambda);
// D_K from (C1) or (C2) for the given monotone direction. Closed form for
// Riesz and Bessel, numeric sup over a >= K for Custom.
double condition_D_constant(const SpectralDensity1D& m, double K, bool c1);

// rho(t) = (2 pi)^-1 * int e^{-i tau t} nu(dtau).
double kernel_rho(const SpectralDensity1D& m, double t);

// R(t, s) = int F1_[0,t] conj(F1_[0,s]) nu(dtau).
double covariance_R(const SpectralDensity1D& m, double t, double s);

// fBm spectral constant c_H = Gamma(2H+1) sin(pi H) / (2 pi).
double fbm_constant(double H);

// Measure grammar: riesz:<g> | bessel:<g> | lebesgue | scaled:<c>:<spec>.
SpectralDensity1D parse_density(const std::string& spec);
SpatialMeasure parse_spatial(const std::string& spec, int d);

}  // namespace harmonize
