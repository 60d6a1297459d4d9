#include "harmonize/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>

namespace harmonize {

namespace {

constexpr int kGradingLevels = 8;
constexpr int kShellFit = 6;

void init_gsl() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

// GSL calls back through a C function pointer; exceptions and non-finite
// values are parked here and reported once GSL returns.
struct Thunk {
    const RealFn* f = nullptr;
    std::exception_ptr error;
    bool non_finite = false;

    static double call(double x, void* p) {
        auto* self = static_cast<Thunk*>(p);
        if (self->error || self->non_finite) return 0.0;
        try {
            double v = (*self->f)(x);
            if (!std::isfinite(v)) {
                self->non_finite = true;
                return 0.0;
            }
            return v;
        } catch (...) {
            self->error = std::current_exception();
            return 0.0;
        }
    }

    gsl_function as_gsl() { return gsl_function{&Thunk::call, this}; }

    void rethrow() const {
        if (error) std::rethrow_exception(error);
        if (non_finite) throw DomainError("integrand returned a non-finite value");
    }
};

struct Workspace {
    explicit Workspace(int n) : size(static_cast<std::size_t>(std::max(n, 16))) {
        w = gsl_integration_workspace_alloc(size);
    }
    ~Workspace() { gsl_integration_workspace_free(w); }
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;
    std::size_t size;
    gsl_integration_workspace* w;
};

QuadResult finish(int status, double value, double err, std::size_t subdivisions, const QuadOptions& opts) {
    QuadResult r;
    r.value = value;
    r.abs_error_estimate = err;
    r.subdivisions = static_cast<int>(subdivisions);
    const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(value));
    r.converged = status == GSL_SUCCESS || err <= target;
    return r;
}

}  // namespace

QuadResult& QuadResult::operator+=(const QuadResult& other) {
    value += other.value;
    abs_error_estimate += other.abs_error_estimate;
    subdivisions += other.subdivisions;
    converged = converged && other.converged;
    return *this;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Convergent: return "Convergent";
        case Verdict::Divergent: return "Divergent";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

QuadResult integrate_interval(const RealFn& f, double a, double b, const QuadOptions& opts,
                              const std::vector<double>& breaks) {
    init_gsl();
    if (!(b > a)) {
        QuadResult zero;
        zero.converged = true;
        return zero;
    }
    Thunk thunk;
    thunk.f = &f;
    gsl_function gf = thunk.as_gsl();
    Workspace ws(opts.max_subdivisions);
    double value = 0.0;
    double err = 0.0;
    int status = 0;

    std::vector<double> pts;
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    if (pts.empty()) {
        status = gsl_integration_qags(&gf, a, b, opts.abs_tol, opts.rel_tol, ws.size, ws.w, &value, &err);
        thunk.rethrow();
        return finish(status, value, err, ws.w->size, opts);
    }

    // Panel by panel: qagp's extrapolation misjudges many short graded panels.
    pts.insert(pts.begin(), a);
    pts.push_back(b);
    const double panel_abs = opts.abs_tol / static_cast<double>(pts.size() - 1);
    QuadResult total;
    total.converged = true;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        status = gsl_integration_qags(&gf, pts[k], pts[k + 1], panel_abs, opts.rel_tol, ws.size, ws.w, &value, &err);
        thunk.rethrow();
        total += finish(status, value, err, ws.w->size, {opts.rel_tol, panel_abs, opts.max_subdivisions});
    }
    if (!total.converged)
        total.converged = total.abs_error_estimate <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total.value));
    return total;
}

QuadResult integrate_tail(const RealFn& f, double a, const QuadOptions& opts) {
    // tau = a + L (1 - u) / u with L matched to the tail's own scale; the
    // unit-scale map of qagiu crowds everything into u ~ 1/a when a is large.
    const double L = std::max(std::abs(a), 1.0);
    const RealFn g = [&f, a, L](double u) {
        if (u <= 0.0) return 0.0;
        const double v = f(a + L * (1.0 - u) / u);
        return v == 0.0 ? 0.0 : v * L / (u * u);
    };
    return integrate_interval(g, 0.0, 1.0, opts);
}

QuadResult integrate_oscillatory(const RealFn& f, double omega, bool sine, double a, double b,
                                 const QuadOptions& opts) {
    init_gsl();
    const double sign = (sine && omega < 0.0) ? -1.0 : 1.0;
    omega = std::abs(omega);
    if (omega == 0.0) {
        if (sine) {
            QuadResult zero;
            zero.converged = true;
            return zero;
        }
        return std::isinf(b) ? integrate_tail(f, a, opts) : integrate_interval(f, a, b, opts);
    }
    Thunk thunk;
    thunk.f = &f;
    gsl_function gf = thunk.as_gsl();
    Workspace ws(opts.max_subdivisions);
    double value = 0.0;
    double err = 0.0;
    int status = 0;
    const auto kind = sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE;

    if (std::isinf(b)) {
        double epsabs = opts.abs_tol;
        if (!(epsabs > 0.0)) {
            // Scale of the integral from the first integration-by-parts term.
            epsabs = opts.rel_tol * std::max(std::abs(f(a)) / std::abs(omega), 1e-300);
        }
        Workspace cycles(opts.max_subdivisions);
        gsl_integration_qawo_table* table = gsl_integration_qawo_table_alloc(omega, 1.0, kind, 50);
        status = gsl_integration_qawf(&gf, a, epsabs, ws.size, ws.w, cycles.w, table, &value, &err);
        gsl_integration_qawo_table_free(table);
    } else {
        if (!(b > a)) {
            QuadResult zero;
            zero.converged = true;
            return zero;
        }
        gsl_integration_qawo_table* table = gsl_integration_qawo_table_alloc(omega, b - a, kind, 50);
        status = gsl_integration_qawo(&gf, a, opts.abs_tol, opts.rel_tol, ws.size, ws.w, table, &value, &err);
        gsl_integration_qawo_table_free(table);
    }
    thunk.rethrow();
    return finish(status, sign * value, err, ws.w->size, opts);
}

QuadResult integrate_half_line(const RealFn& f, const SpectralDensity1D* weight,
                               const std::vector<double>& split_points, const QuadOptions& opts,
                               const TailModel* tail) {
    auto weighted = [&](const RealFn& g) -> RealFn {
        if (weight == nullptr) return g;
        return [&g, weight](double tau) {
            double v = g(tau);
            return v == 0.0 ? 0.0 : v * weight->eta(tau);
        };
    };

    std::vector<double> splits;
    for (double s : split_points) {
        double p = std::abs(s);
        if (p > 0.0 && std::isfinite(p)) splits.push_back(p);
    }
    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end()), splits.end());

    double head_end = 1.0;
    if (tail != nullptr) {
        head_end = tail->cutoff;
    } else if (!splits.empty()) {
        head_end = splits.back();
    }
    std::vector<double> breaks;
    for (double s : splits)
        if (s < head_end) breaks.push_back(s);
    const double first = breaks.empty() ? head_end : breaks.front();
    double step = first;
    for (int k = 0; k < kGradingLevels; ++k) {
        step *= 0.25;
        breaks.push_back(step);
    }

    const RealFn head_fn = weighted(f);
    QuadResult total = integrate_interval(head_fn, 0.0, head_end, opts, breaks);

    if (tail == nullptr) {
        total += integrate_tail(head_fn, head_end, opts);
        return total;
    }

    total += integrate_tail_model(*tail, weight, opts, std::abs(total.value));
    return total;
}

QuadResult integrate_tail_model(const TailModel& tail, const SpectralDensity1D* weight, const QuadOptions& opts,
                                double scale_hint) {
    auto weighted = [weight](const RealFn& g) -> RealFn {
        if (weight == nullptr) return g;
        return [&g, weight](double tau) {
            double v = g(tau);
            return v == 0.0 ? 0.0 : v * weight->eta(tau);
        };
    };
    QuadResult total;
    total.converged = true;
    if (tail.smooth) {
        const RealFn smooth_fn = weighted(tail.smooth);
        total += integrate_tail(smooth_fn, tail.cutoff, opts);
    }
    QuadOptions osc = opts;
    const double scale = std::max(std::abs(total.value), scale_hint);
    osc.abs_tol = std::max(opts.abs_tol, 0.1 * opts.rel_tol * std::max(scale, 1e-300));
    for (const OscTerm& term : tail.terms) {
        const RealFn amp = weighted(term.amplitude);
        QuadResult part = integrate_oscillatory(amp, term.omega, term.sine, tail.cutoff,
                                                std::numeric_limits<double>::infinity(), osc);
        // QAWF reports against an absolute target; judge it against the total.
        part.converged = part.converged || part.abs_error_estimate <= osc.abs_tol * 10.0;
        total += part;
    }
    return total;
}

QuadResult integrate_line(const RealFn& f, const SpectralDensity1D* weight, const std::vector<double>& split_points,
                          const QuadOptions& opts) {
    QuadResult right = integrate_half_line(f, weight, split_points, opts);
    RealFn mirrored = [&f](double tau) { return f(-tau); };
    QuadResult left = integrate_half_line(mirrored, weight, split_points, opts);
    right += left;
    return right;
}

double sphere_area(int d) {
    if (d < 1) throw PreconditionError("dimension must be positive");
    const double h = 0.5 * d;
    return 2.0 * std::pow(M_PI, h) / std::tgamma(h);
}

namespace {

RealFn radial_integrand(const RealFn& g, const SpatialMeasure& mu) {
    const double area = sphere_area(mu.dim());
    const int power = mu.dim() - 1;
    return [&g, &mu, area, power](double r) {
        double v = g(r);
        if (v == 0.0) return 0.0;
        return area * v * mu.density(r) * std::pow(r, power);
    };
}

QuadResult atom_sum(const RealFn& g, const SpatialMeasure& mu) {
    QuadResult r;
    for (const Atom& a : mu.atoms()) {
        double norm = 0.0;
        for (double x : a.point) norm += x * x;
        r.value += mu.scale() * a.weight * g(std::sqrt(norm));
    }
    r.converged = true;
    return r;
}

}  // namespace

QuadResult integrate_radial(const RealFn& g, const SpatialMeasure& mu, const QuadOptions& opts, Exec exec) {
    if (!mu.radial()) return atom_sum(g, mu);
    const RealFn h = radial_integrand(g, mu);
    // Pieces: [0, 2^-8], dyadic shells up to 2^8, then [2^8, inf).
    constexpr int kLo = -8;
    constexpr int kHi = 8;
    const std::size_t pieces = static_cast<std::size_t>(kHi - kLo) + 2;
    std::vector<QuadResult> parts(pieces);
    for_each_index(pieces, exec, [&](std::size_t i) {
        if (i == 0) {
            parts[i] = integrate_interval(h, 0.0, std::ldexp(1.0, kLo), opts);
        } else if (i == pieces - 1) {
            parts[i] = integrate_tail(h, std::ldexp(1.0, kHi), opts);
        } else {
            const int k = kLo + static_cast<int>(i) - 1;
            parts[i] = integrate_interval(h, std::ldexp(1.0, k), std::ldexp(1.0, k + 1), opts);
        }
    });
    QuadResult total;
    total.converged = true;
    for (const QuadResult& p : parts) total += p;
    const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(total.value));
    total.converged = total.converged || total.abs_error_estimate <= target;
    return total;
}

std::vector<QuadResult> radial_shells(const RealFn& g, const SpatialMeasure& mu, int k_min, int k_max,
                                      const QuadOptions& opts, Exec exec) {
    if (!mu.radial()) throw PreconditionError("radial shells need a radial measure");
    const RealFn h = radial_integrand(g, mu);
    const std::size_t n = k_max > k_min ? static_cast<std::size_t>(k_max - k_min) : 0;
    std::vector<QuadResult> shells(n);
    for_each_index(n, exec, [&](std::size_t i) {
        const int k = k_min + static_cast<int>(i);
        shells[i] = integrate_interval(h, std::ldexp(1.0, k), std::ldexp(1.0, k + 1), opts);
    });
    return shells;
}

namespace {

// Least-squares slope of log2 |S| against the shell index.
double shell_slope(const std::vector<double>& values) {
    const std::size_t n = values.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i);
        const double y = std::log2(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

// Classifies one side given shells ordered away from the finite region
// (index 0 nearest, last farthest). Returns the growth exponent per doubling.
Verdict classify_side(const std::vector<QuadResult>& ordered, double& exponent) {
    constexpr double kBand = 0.05;
    constexpr double kFlat = 0.005;
    const std::size_t n = ordered.size();
    const std::size_t m = std::min<std::size_t>(n, kShellFit);
    std::vector<double> vals;
    bool any_zero = false;
    for (std::size_t i = n - m; i < n; ++i) {
        const double v = std::abs(ordered[i].value);
        if (v == 0.0 || !std::isfinite(v)) any_zero = true;
        vals.push_back(v);
    }
    if (m < 4) {
        exponent = 0.0;
        return Verdict::Inconclusive;
    }
    if (any_zero) {
        // Vanishing far shells: the truncations are already Cauchy.
        bool all_zero = std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; });
        exponent = -std::numeric_limits<double>::infinity();
        return all_zero ? Verdict::Convergent : Verdict::Inconclusive;
    }
    exponent = shell_slope(vals);
    if (exponent <= -kBand) return Verdict::Convergent;
    // Divergence needs the truncations to keep growing across >= 4 doublings.
    bool monotone = true;
    for (std::size_t i = n - 4; i < n; ++i) monotone = monotone && ordered[i].value > 0.0;
    if (exponent >= kBand) return monotone ? Verdict::Divergent : Verdict::Inconclusive;
    // Shells flat to numerical precision: logarithmic growth of truncations.
    if (std::abs(exponent) <= kFlat && monotone) return Verdict::Divergent;
    return Verdict::Inconclusive;
}

}  // namespace

ConvergenceVerdict verdict_from_shells(const std::vector<QuadResult>& inner, const std::vector<QuadResult>& outer) {
    // Inner shells arrive in increasing k; reverse so the farthest (closest to 0) is last.
    std::vector<QuadResult> inner_rev(inner.rbegin(), inner.rend());
    ConvergenceVerdict v;
    Verdict vin = Verdict::Convergent;
    Verdict vout = Verdict::Convergent;
    v.inner_exponent = -std::numeric_limits<double>::infinity();
    v.outer_exponent = -std::numeric_limits<double>::infinity();
    if (!inner_rev.empty()) vin = classify_side(inner_rev, v.inner_exponent);
    if (!outer.empty()) vout = classify_side(outer, v.outer_exponent);
    v.growth_exponent_estimate = std::max(v.inner_exponent, v.outer_exponent);
    if (vin == Verdict::Divergent || vout == Verdict::Divergent) {
        v.verdict = Verdict::Divergent;
    } else if (vin == Verdict::Convergent && vout == Verdict::Convergent) {
        v.verdict = Verdict::Convergent;
    } else {
        v.verdict = Verdict::Inconclusive;
    }
    return v;
}

ConvergenceVerdict classify_convergence(const RealFn& g, const SpatialMeasure& mu, const QuadOptions& opts,
                                        Exec exec) {
    if (!mu.radial()) {
        ConvergenceVerdict v;
        v.verdict = Verdict::Convergent;
        v.growth_exponent_estimate = -std::numeric_limits<double>::infinity();
        v.inner_exponent = v.outer_exponent = v.growth_exponent_estimate;
        return v;
    }
    // Inner shells cover eps in {2^-16..2^-4}, outer shells R in {2^4..2^16}.
    std::vector<QuadResult> inner = radial_shells(g, mu, -16, -4, opts, exec);
    std::vector<QuadResult> outer = radial_shells(g, mu, 4, 16, opts, exec);
    return verdict_from_shells(inner, outer);
}

}  // namespace harmonize
