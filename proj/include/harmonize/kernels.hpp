#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "harmonize/measures.hpp"
#include "harmonize/parallel.hpp"
#include "harmonize/quadrature.hpp"

namespace harmonize {

enum class EquationKind { Heat, Wave };

const char* to_string(EquationKind k);

// Fractional heat or wave operator with radial symbol Psi(xi) = c_beta |xi|^beta.
struct OperatorSpec {
    EquationKind kind = EquationKind::Heat;
    double beta = 2.0;
    double c_beta = 1.0;
    int d = 1;
    // Deterministic offset w(t, x); empty means w == 0.
    std::function<double(double, const std::vector<double>&)> offset;
    // Optional radial symbol r -> Psi, replacing c_beta r^beta. Must be real and nonnegative.
    std::function<double(double)> symbol;

    static OperatorSpec heat(double beta, int d, double c_beta = 1.0);
    // c_beta is fixed to 1 for the wave equation.
    static OperatorSpec wave(double beta, int d);

    double psi(double r) const;
    double psi(const std::vector<double>& xi) const;
    double w(double t, const std::vector<double>& x) const { return offset ? offset(t, x) : 0.0; }
};

struct WindowedTransform {
    std::complex<double> value;
    double squared_modulus = 0.0;
};

// Fourier transform in x of the Green function: e^{-t Psi} or sin(t sqrt Psi) / sqrt Psi.
double green_fourier(const OperatorSpec& op, double t, const std::vector<double>& xi);
double green_fourier_psi(const OperatorSpec& op, double t, double psi);

// F_{0,t} H(tau) = int_0^t e^{-i tau s} H(s) ds in closed form, stable at resonance.
WindowedTransform windowed(const OperatorSpec& op, double tau, double psi, double t);
double windowed_sq(const OperatorSpec& op, double tau, double psi, double t);
// Same integral by adaptive quadrature (test oracle).
WindowedTransform windowed_numeric(const OperatorSpec& op, double tau, double psi, double t,
                                   double rel_tol = 1e-12);

// N_t(psi) = int |F_{0,t} H(tau)|^2 nu(dtau).
QuadResult n_t_quad(const OperatorSpec& op, const SpectralDensity1D& nu, double psi, double t,
                    const QuadOptions& opts = {});
// Throws QuadratureError when the quadrature does not converge.
double n_t(const OperatorSpec& op, const SpectralDensity1D& nu, double psi, double t);

// I_t = int N_t(Psi(xi)) mu(dxi). Throws DivergenceError when the shell
// classifier says the integral diverges.
QuadResult i_t(const OperatorSpec& op, const SpectralDensity1D& nu, const SpatialMeasure& mu, double t,
               const QuadOptions& opts = {1e-8, 0.0, 2000}, Exec exec = Exec::Parallel);

}  // namespace harmonize
