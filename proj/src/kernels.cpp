#include "harmonize/kernels.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <limits>

#include "harmonize/errors.hpp"

namespace harmonize {

namespace {

using cplx = std::complex<double>;

constexpr double kSmallArg = 1e-2;
constexpr double kResonanceBand = 1e-6;
// Wave windows switch to the split layout beyond this many radians of a*t.
constexpr double kLargeAT = 64.0;

// 16-point Gauss-Legendre for tiny windows where every closed form cancels.
cplx gauss16(const std::function<cplx(double)>& f, double t) {
    static const gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(16);
    cplx sum = 0.0;
    for (std::size_t i = 0; i < 16; ++i) {
        double x = 0.0;
        double w = 0.0;
        gsl_integration_glfixed_point(0.0, t, i, &x, &w, table);
        sum += w * f(x);
    }
    return sum;
}

double sinc(double x) { return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// E(w) = int_0^t e^{i w s} ds.
cplx window_exp(double w, double t) {
    const double x = 0.5 * w * t;
    return t * std::polar(1.0, x) * sinc(x);
}

cplx heat_transform(double tau, double psi, double t) {
    const cplx z(psi, tau);
    if (std::abs(z) * t < kSmallArg) {
        return gauss16([z](double s) { return std::exp(-z * s); }, t);
    }
    const double e = std::exp(-t * psi);
    const double half = std::sin(0.5 * tau * t);
    // 1 - e^{-zt} with the cos term rewritten to avoid cancellation.
    const cplx num(-std::expm1(-t * psi) + 2.0 * e * half * half, e * std::sin(tau * t));
    return num / z;
}

// tau >= 0 here; the caller conjugates for negative tau.
cplx wave_transform(double tau, double psi, double t) {
    const double a = std::sqrt(psi);
    if ((tau + a) * t < kSmallArg) {
        return gauss16(
            [tau, a](double s) {
                const double h = a == 0.0 ? s : std::sin(a * s) / a;
                return std::polar(h, -tau * s);
            },
            t);
    }
    const double gap = std::abs(tau * tau - psi);
    if (a * t >= 1.0 || gap < kResonanceBand * (tau * tau + psi + 1.0)) {
        // Product-to-sum: sin(as) = (e^{ias} - e^{-ias}) / 2i.
        return (window_exp(a - tau, t) - window_exp(-a - tau, t)) / cplx(0.0, 2.0 * a);
    }
    const double c0 = std::cos(a * t);
    const double s = a == 0.0 ? t : std::sin(a * t) / a;
    const cplx num = 1.0 - std::polar(1.0, -tau * t) * cplx(c0, tau * s);
    return num / (psi - tau * tau);
}

RealFn weighted(const RealFn& f, const SpectralDensity1D& nu) {
    return [&f, &nu](double tau) {
        const double v = f(tau);
        return v == 0.0 ? 0.0 : v * nu.eta(tau);
    };
}

std::vector<double> graded_breaks(double end) {
    std::vector<double> b;
    double x = end;
    for (int k = 0; k < 8; ++k) {
        x *= 0.25;
        b.push_back(x);
    }
    return b;
}

}  // namespace

const char* to_string(EquationKind k) { return k == EquationKind::Heat ? "heat" : "wave"; }

OperatorSpec OperatorSpec::heat(double beta, int d, double c_beta) {
    if (!(beta > 0.0)) throw PreconditionError("beta must be positive");
    if (!(c_beta > 0.0)) throw PreconditionError("c_beta must be positive");
    if (d < 1) throw PreconditionError("dimension must be positive");
    OperatorSpec op;
    op.kind = EquationKind::Heat;
    op.beta = beta;
    op.c_beta = c_beta;
    op.d = d;
    return op;
}

OperatorSpec OperatorSpec::wave(double beta, int d) {
    OperatorSpec op = heat(beta, d, 1.0);
    op.kind = EquationKind::Wave;
    return op;
}

double OperatorSpec::psi(double r) const {
    r = std::abs(r);
    if (symbol) {
        const double v = symbol(r);
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("symbol must be real, finite and nonnegative");
        return v;
    }
    return r == 0.0 ? 0.0 : c_beta * std::pow(r, beta);
}

double OperatorSpec::psi(const std::vector<double>& xi) const {
    double n2 = 0.0;
    for (double x : xi) n2 += x * x;
    return psi(std::sqrt(n2));
}

double green_fourier_psi(const OperatorSpec& op, double t, double psi) {
    if (!(t >= 0.0)) throw PreconditionError("t must be nonnegative");
    if (op.kind == EquationKind::Heat) return std::exp(-t * psi);
    const double a = std::sqrt(psi);
    return a == 0.0 ? t : std::sin(t * a) / a;
}

double green_fourier(const OperatorSpec& op, double t, const std::vector<double>& xi) {
    return green_fourier_psi(op, t, op.psi(xi));
}

WindowedTransform windowed(const OperatorSpec& op, double tau, double psi, double t) {
    if (!(t > 0.0)) throw PreconditionError("t must be positive");
    if (!(psi >= 0.0)) throw PreconditionError("psi must be nonnegative");
    WindowedTransform w;
    if (op.kind == EquationKind::Heat) {
        w.value = heat_transform(tau, psi, t);
    } else {
        // H is real, so F(-tau) = conj F(tau).
        const cplx f = wave_transform(std::abs(tau), psi, t);
        w.value = tau < 0.0 ? std::conj(f) : f;
    }
    w.squared_modulus = std::norm(w.value);
    return w;
}

double windowed_sq(const OperatorSpec& op, double tau, double psi, double t) {
    return windowed(op, tau, psi, t).squared_modulus;
}

WindowedTransform windowed_numeric(const OperatorSpec& op, double tau, double psi, double t, double rel_tol) {
    if (!(t > 0.0)) throw PreconditionError("t must be positive");
    const double a = std::sqrt(psi);
    auto h = [&](double s) {
        if (op.kind == EquationKind::Heat) return std::exp(-psi * s);
        return a == 0.0 ? s : std::sin(a * s) / a;
    };
    const RealFn re = [&](double s) { return h(s) * std::cos(tau * s); };
    const RealFn im = [&](double s) { return -h(s) * std::sin(tau * s); };
    const QuadOptions opts{rel_tol, rel_tol * std::max(t, 1.0), 4000};
    QuadResult r = integrate_interval(re, 0.0, t, opts);
    QuadResult i = integrate_interval(im, 0.0, t, opts);
    if (!r.converged || !i.converged)
        throw QuadratureError("windowed transform quadrature did not converge",
                              std::max(r.abs_error_estimate, i.abs_error_estimate));
    WindowedTransform w;
    w.value = cplx(r.value, i.value);
    w.squared_modulus = std::norm(w.value);
    return w;
}

namespace {

QuadResult heat_nt(const OperatorSpec& op, const SpectralDensity1D& nu, double psi, double t,
                   const QuadOptions& opts) {
    const double e = std::exp(-t * psi);
    const RealFn direct = [&](double tau) { return windowed_sq(op, tau, psi, t); };
    // Beyond the cutoff: [(1 + e^2) - 2 e cos(tau t)] / (tau^2 + psi^2).
    TailModel tail;
    tail.cutoff = 16.0 * M_PI / t + psi;
    tail.smooth = [e, psi](double tau) { return (1.0 + e * e) / (tau * tau + psi * psi); };
    if (e > 0.0) tail.terms.push_back({[e, psi](double tau) { return -2.0 * e / (tau * tau + psi * psi); }, t, false});
    std::vector<double> splits;
    if (psi > 0.0 && psi < tail.cutoff) splits.push_back(psi);
    return integrate_half_line(direct, &nu, splits, opts, &tail);
}

QuadResult wave_nt(const OperatorSpec& op, const SpectralDensity1D& nu, double psi, double t,
                   const QuadOptions& opts) {
    const double a = std::sqrt(psi);
    const double c0 = std::cos(a * t);
    const double s = a == 0.0 ? t : std::sin(a * t) / a;
    const RealFn direct = [&](double tau) { return windowed_sq(op, tau, psi, t); };
    // |F|^2 = [1 + c0^2 + tau^2 s^2 - 2 tau s sin(tau t) - 2 c0 cos(tau t)] / (tau^2 - psi)^2.
    const RealFn smooth = [=](double tau) {
        const double den = tau * tau - psi;
        return (1.0 + c0 * c0 + tau * tau * s * s) / (den * den);
    };
    const RealFn sin_amp = [=](double tau) {
        const double den = tau * tau - psi;
        return -2.0 * tau * s / (den * den);
    };
    const RealFn cos_amp = [=](double tau) {
        const double den = tau * tau - psi;
        return -2.0 * c0 / (den * den);
    };

    if (a * t <= kLargeAT) {
        TailModel tail;
        tail.cutoff = 2.0 * a + 32.0 / t;
        tail.smooth = smooth;
        tail.terms.push_back({sin_amp, t, true});
        tail.terms.push_back({cos_amp, t, false});
        std::vector<double> splits;
        if (a > 0.0) splits.push_back(a);
        return integrate_half_line(direct, &nu, splits, opts, &tail);
    }

    // Large a t: direct near 0 and around the resonance, oscillatory weights elsewhere.
    const double t0 = 16.0 * M_PI / t;
    const double w = 8.0 / t;
    const RealFn direct_w = weighted(direct, nu);
    QuadResult total = integrate_interval(direct_w, 0.0, t0, opts, graded_breaks(t0));
    total += integrate_interval(direct_w, a - w, a + w, opts, {a});
    const RealFn smooth_w = weighted(smooth, nu);
    total += integrate_interval(smooth_w, t0, a - w, opts);
    QuadOptions osc = opts;
    osc.abs_tol = std::max(opts.abs_tol, 0.1 * opts.rel_tol * std::abs(total.value));
    const RealFn sin_w = weighted(sin_amp, nu);
    const RealFn cos_w = weighted(cos_amp, nu);
    QuadResult part = integrate_oscillatory(sin_w, t, true, t0, a - w, osc);
    part += integrate_oscillatory(cos_w, t, false, t0, a - w, osc);
    part.converged = part.converged || part.abs_error_estimate <= 10.0 * osc.abs_tol;
    total += part;
    TailModel tail;
    tail.cutoff = a + w;
    tail.smooth = smooth;
    tail.terms.push_back({sin_amp, t, true});
    tail.terms.push_back({cos_amp, t, false});
    total += integrate_tail_model(tail, &nu, opts, std::abs(total.value));
    return total;
}

}  // namespace

QuadResult n_t_quad(const OperatorSpec& op, const SpectralDensity1D& nu, double psi, double t,
                    const QuadOptions& opts) {
    if (!(t > 0.0)) throw PreconditionError("t must be positive");
    if (!(psi >= 0.0) || !std::isfinite(psi)) throw PreconditionError("psi must be finite and nonnegative");
    QuadResult r = op.kind == EquationKind::Heat ? heat_nt(op, nu, psi, t, opts) : wave_nt(op, nu, psi, t, opts);
    // Even integrand: the half line counts once.
    r.value *= 2.0;
    r.abs_error_estimate *= 2.0;
    return r;
}

double n_t(const OperatorSpec& op, const SpectralDensity1D& nu, double psi, double t) {
    QuadResult r = n_t_quad(op, nu, psi, t);
    if (!r.converged) throw QuadratureError("N_t quadrature did not converge", r.abs_error_estimate);
    return r.value;
}

QuadResult i_t(const OperatorSpec& op, const SpectralDensity1D& nu, const SpatialMeasure& mu, double t,
               const QuadOptions& opts, Exec exec) {
    if (mu.dim() != op.d) throw PreconditionError("spatial measure dimension does not match the operator");
    const QuadOptions inner{std::max(1e-11, 1e-2 * opts.rel_tol), 0.0, 4000};
    const RealFn g = [&](double r) { return n_t_quad(op, nu, op.psi(r), t, inner).value; };
    const ConvergenceVerdict verdict = classify_convergence(g, mu, {1e-2, 0.0, 2000}, exec);
    if (verdict.verdict == Verdict::Divergent) throw DivergenceError("I_t diverges", verdict);
    return integrate_radial(g, mu, opts, exec);
}

}  // namespace harmonize
