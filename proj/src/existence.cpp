#include "harmonize/existence.hpp"

#include <cmath>
#include <limits>

#include "harmonize/errors.hpp"

namespace harmonize {

namespace {

constexpr double kSlack = 1.0 + 1e-6;
// Shell sums only feed a slope fit, where a 1% shell error moves log2 by
// 0.014. Wave N_t oscillates in r, and tighter tolerances resolve every
// oscillation (cost doubling per shell) for no change in the exponent.
const QuadOptions kOracleShellOpts{1e-2, 0.0, 2000};
const QuadOptions kRefOpts{1e-10, 0.0, 4000};

double two_sided_mass(const SpectralDensity1D& nu, double lo, double hi) {
    const RealFn f = [&nu](double tau) { return nu.eta(tau); };
    QuadResult r = integrate_interval(f, lo, hi, kRefOpts);
    if (!r.converged) throw QuadratureError("nu mass quadrature did not converge", r.abs_error_estimate);
    return 2.0 * r.value;
}

double even_integral(const SpectralDensity1D& nu, const RealFn& f, std::vector<double> splits) {
    QuadResult r = integrate_half_line(f, &nu, splits, kRefOpts);
    if (!r.converged) throw QuadratureError("reference integral did not converge", r.abs_error_estimate);
    return 2.0 * r.value;
}

}  // namespace

const char* to_string(Decision d) {
    switch (d) {
        case Decision::Yes: return "Yes";
        case Decision::No: return "No";
        case Decision::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

const char* to_string(ConditionSource s) {
    switch (s) {
        case ConditionSource::ParabolicCond: return "parabolic-cond";
        case ConditionSource::HyperbolicCond: return "hyperbolic-cond";
        case ConditionSource::CondHyp: return "cond-hyp";
    }
    return "";
}

bool power_law_decision(double p, double alpha, double beta, int d) {
    if (!(p >= 0.0)) throw PreconditionError("p must be nonnegative");
    if (!(beta > 0.0)) throw PreconditionError("beta must be positive");
    if (d < 1) throw PreconditionError("dimension must be positive");
    return alpha < d && beta * p + alpha > d;
}

ExistenceReport decide_existence(const OperatorSpec& op, const SpectralDensity1D& nu, const SpatialMeasure& mu,
                                 bool run_oracle, Exec exec) {
    if (mu.dim() != op.d) throw PreconditionError("spatial measure dimension does not match the operator");
    ExistenceReport rep;
    const double g = nu.gamma();
    const bool closed_nu = nu.kind() != DensityKind::Custom;
    rep.reduced.exponent = std::numeric_limits<double>::quiet_NaN();

    if (op.kind == EquationKind::Heat) {
        rep.reduced.source = ConditionSource::ParabolicCond;
        if (closed_nu) {
            // Integrable Bessel densities give B(psi) ~ (1 + psi)^-2.
            rep.reduced.exponent = (nu.kind() == DensityKind::Bessel && g >= 1.0) ? 2.0 : 1.0 + g;
            rep.reduced.analytic = true;
        }
    } else {
        rep.reduced.source = ConditionSource::CondHyp;
        // The wave reduction needs (C1) or (C2); Bessel with gamma >= 1 has neither.
        if (closed_nu && (nu.kind() == DensityKind::Riesz || g < 1.0)) {
            rep.reduced.exponent = 1.0 + 0.5 * g;
            rep.reduced.analytic = true;
        } else if (closed_nu) {
            rep.reduced.source = ConditionSource::HyperbolicCond;
            rep.note = "Bessel density with gamma >= 1 fails (C1) and (C2); decided by the oracle";
        }
    }
    if (op.symbol) {
        rep.reduced.analytic = false;
        rep.note = "custom symbol: decided by the oracle";
    }

    if (rep.reduced.analytic) {
        const double p = rep.reduced.exponent;
        bool yes = false;
        switch (mu.kind()) {
            case SpatialKind::Discrete: yes = true; break;
            case SpatialKind::Lebesgue: yes = power_law_decision(p, 0.0, op.beta, op.d); break;
            case SpatialKind::RadialPower: yes = power_law_decision(p, mu.alpha(), op.beta, op.d); break;
            case SpatialKind::RadialBessel: yes = op.beta * p + mu.alpha() > op.d; break;
        }
        rep.decision = yes ? Decision::Yes : Decision::No;
    }

    if (run_oracle || !rep.reduced.analytic) {
        const QuadOptions inner{1e-6, 0.0, 4000};
        const RealFn fn = [&](double r) { return n_t_quad(op, nu, op.psi(r), 1.0, inner).value; };
        rep.oracle = classify_convergence(fn, mu, kOracleShellOpts, exec);
        rep.oracle_run = true;
    }
    if (!rep.reduced.analytic) {
        switch (rep.oracle.verdict) {
            case Verdict::Convergent: rep.decision = Decision::Yes; break;
            case Verdict::Divergent: rep.decision = Decision::No; break;
            case Verdict::Inconclusive: rep.decision = Decision::Inconclusive; break;
        }
    }
    if (rep.oracle_run) {
        const bool contradiction = (rep.decision == Decision::Yes && rep.oracle.verdict == Verdict::Divergent) ||
                                   (rep.decision == Decision::No && rep.oracle.verdict == Verdict::Convergent);
        rep.agreement = !contradiction;
        if (rep.reduced.analytic && rep.oracle.verdict == Verdict::Inconclusive && rep.note.empty())
            rep.note = "oracle inconclusive near the critical exponent; analytic rule decides";
    }
    return rep;
}

bool check_indicator_condition(const IndicatorSpec& spec) {
    auto in_unit = [](double h) { return h > 0.0 && h < 1.0; };
    switch (spec.kind) {
        case IndicatorKind::FBS: {
            if (!in_unit(spec.H)) throw PreconditionError("fBs index H must lie in (0, 1)");
            if (static_cast<int>(spec.Hj.size()) != spec.d) throw PreconditionError("fBs needs one index per axis");
            double sum = spec.H;
            for (double h : spec.Hj) {
                if (!in_unit(h)) throw PreconditionError("fBs indices must lie in (0, 1)");
                sum += h;
            }
            return sum < 1.0;
        }
        case IndicatorKind::FBF:
            if (!in_unit(spec.H)) throw PreconditionError("fBf index H must lie in (0, 1)");
            if (spec.d < 0) throw PreconditionError("dimension must be nonnegative");
            return true;
        case IndicatorKind::CustomIsotropic: {
            const double q = spec.q;
            const RealFn g = [q](double r) { return std::min(1.0, r * r) * std::pow(r, -q); };
            ConvergenceVerdict v = classify_convergence(g, SpatialMeasure::lebesgue(spec.d + 1));
            return v.verdict == Verdict::Convergent;
        }
    }
    return false;
}

bool BoundReport::all_pass() const {
    for (const BoundRow& r : rows)
        if (!r.pass) return false;
    return true;
}

double heat_reference(const SpectralDensity1D& nu, double psi) {
    const double a = 1.0 + psi;
    return even_integral(nu, [a](double tau) { return 1.0 / (tau * tau + a * a); }, {a});
}

const char* to_string(WaveForm f) {
    switch (f) {
        case WaveForm::CondHyp: return "cond-hyp";
        case WaveForm::HyperbolicCond: return "hyperbolic-cond";
        case WaveForm::HyperbolicCond2: return "hyperbolic-cond2";
    }
    return "";
}

WaveForm wave_form_from(const std::string& s) {
    if (s == "cond-hyp") return WaveForm::CondHyp;
    if (s == "hyperbolic-cond") return WaveForm::HyperbolicCond;
    if (s == "hyperbolic-cond2") return WaveForm::HyperbolicCond2;
    throw PreconditionError("unknown wave form: " + s);
}

double hyperbolic_cond2_reference(const SpectralDensity1D& nu, double psi) {
    const double b2 = 1.0 + psi;
    return even_integral(nu, [b2](double tau) { return 1.0 / (tau * tau + b2); }, {std::sqrt(b2)});
}

double wave_reference(const SpectralDensity1D& nu, double psi, WaveForm form) {
    const double b = std::sqrt(1.0 + psi);
    if (form == WaveForm::CondHyp) return nu.eta(b) / (b * b);
    if (form == WaveForm::HyperbolicCond2) return hyperbolic_cond2_reference(nu, psi) / b;
    const double i = even_integral(nu, [b](double tau) { return 1.0 / ((tau + b) * (tau + b)); }, {b});
    return i / b;
}

std::map<std::string, double> heat_constants(const SpectralDensity1D& nu, double t) {
    if (!(t > 0.0)) throw PreconditionError("t must be positive");
    // Fixed proof parameters: pi/2 < c < d < pi and e^{-t rho} = 0.1.
    const double c = 2.0 * M_PI / 3.0;
    const double d = 5.0 * M_PI / 6.0;
    const double rho = std::log(10.0) / t;
    const double sd = std::sin(d);
    const double a = sd * sd / (d * d / (t * t) + rho * rho) * two_sided_mass(nu, c / t, d / t);
    const double k = nu.k();
    std::map<std::string, double> out;
    out["C1"] = std::max(8.0 * std::max(t * t, 5.0), 20.0);
    out["C2"] = std::min(a / k, 0.5);
    out["rho"] = rho;
    out["A"] = a;
    out["K"] = k;
    return out;
}

std::map<std::string, double> wave_constants(const SpectralDensity1D& nu, double t) {
    if (!(t > 0.0)) throw PreconditionError("t must be positive");
    const ConditionReport rep = classify_conditions(nu, {1.0 / 3.0, 3.0, M_SQRT1_2}, {1.0, 1.0 / t});
    if (!rep.satisfies_C) throw PreconditionError("wave bounds need condition (C)");
    if (!rep.satisfies_C1 && !rep.satisfies_C2) throw PreconditionError("wave bounds need (C1) or (C2)");
    const bool noninc = rep.satisfies_C1;
    auto C = [&nu](double lambda) { return condition_C_constant(nu, lambda); };
    auto M = [&nu, noninc](double K) { return 2.0 * condition_D_constant(nu, K, noninc) + 2.0; };

    std::map<std::string, double> out;
    // Upper side: region constants 18 and 50 and the Plancherel piece.
    const double c_l3 = std::max({18.0, 50.0, 2.0 * M_PI * 25.0 / 8.0 * (noninc ? C(1.0 / 3.0) : C(3.0))});
    const double d_t = 12.0 * M_SQRT2 * std::max(std::pow(t, 4) / 4.0, 8.0 * (t * t + 0.5));
    const double d_w = c_l3 * M_SQRT2 * std::max(8.0, 4.0 * M_SQRT2 * C(M_SQRT1_2));
    const double d1 = std::max(d_t, d_w * t);
    const double m1 = M(1.0);
    out["C_L3"] = c_l3;
    out["D_t"] = d_t;
    out["D"] = d_w;
    out["D1"] = d1;
    out["M_1"] = m1;
    out["K1"] = d1 * m1;

    // Lower side, a t <= 1: cos c < cos(1) / sqrt 2 with c = 1.2, d = 1.5.
    const double cc = 1.2;
    const double dd = 1.5;
    const double m = 0.5 * std::cos(1.0) * std::cos(1.0) - std::cos(cc) * std::cos(cc);
    const double a_w = m * std::pow(t, 4) / (2.0 * (std::pow(dd, 4) + 1.0)) * two_sided_mass(nu, cc / t, dd / t);
    const double lambda = noninc ? 1.0 : std::sqrt(1.0 + 1.0 / (t * t));
    const double low_small = a_w / (nu.eta(1.0) * C(lambda));

    // Lower side, a t >= 1.
    double c_prime = 0.0;
    double eps = 0.0;
    if (noninc) {
        eps = 2.7;
        c_prime = (M_PI / 2.0 - 4.0 / eps) / C(1.0 / (1.0 + eps));
    } else {
        eps = 0.9;
        c_prime = (M_PI / 2.0 + 4.0 - 4.0 / eps) / C(1.0 / (1.0 - eps));
    }
    const double low_large = c_prime * t / (noninc ? 1.0 : C(std::sqrt(1.0 + t * t)));
    out["M"] = m;
    out["A_w"] = a_w;
    out["epsilon"] = eps;
    out["C_prime"] = c_prime;
    out["K2"] = std::min(low_small, low_large);
    out["D2"] = std::min(a_w / nu.k(), c_prime * t / M(1.0 / t));
    return out;
}

BoundReport verify_bounds(const OperatorSpec& op, const SpectralDensity1D& nu, const std::vector<double>& t_grid,
                          const std::vector<double>& psi_grid, WaveForm form, Exec exec) {
    for (double t : t_grid)
        if (!(t > 0.0)) throw PreconditionError("t grid must be positive");
    for (double p : psi_grid)
        if (!(p >= 0.0) || !std::isfinite(p)) throw PreconditionError("psi grid must be finite and nonnegative");

    BoundReport rep;
    rep.kind = op.kind;
    rep.form = form;
    std::vector<std::pair<double, double>> bounds;
    for (double t : t_grid) {
        if (op.kind == EquationKind::Heat) {
            auto c = heat_constants(nu, t);
            bounds.emplace_back(c["C2"], c["C1"]);
            rep.constants.emplace_back(t, std::move(c));
        } else {
            auto c = wave_constants(nu, t);
            if (form == WaveForm::CondHyp) {
                bounds.emplace_back(c["K2"], c["K1"]);
            } else if (form == WaveForm::HyperbolicCond) {
                bounds.emplace_back(c["D2"], c["D1"]);
            } else {
                // (tau^2 + b^2) <= (|tau| + b)^2 <= 2 (tau^2 + b^2).
                bounds.emplace_back(0.5 * c["D2"], c["D1"]);
            }
            rep.constants.emplace_back(t, std::move(c));
        }
    }

    const std::size_t np = psi_grid.size();
    rep.rows.resize(t_grid.size() * np);
    for_each_index(rep.rows.size(), exec, [&](std::size_t idx) {
        const std::size_t ti = idx / np;
        BoundRow& row = rep.rows[idx];
        row.t = t_grid[ti];
        row.psi = psi_grid[idx % np];
        row.n_t = n_t(op, nu, row.psi, row.t);
        row.reference = op.kind == EquationKind::Heat ? heat_reference(nu, row.psi) : wave_reference(nu, row.psi, form);
        row.lower = bounds[ti].first * row.reference;
        row.upper = bounds[ti].second * row.reference;
        row.pass = row.lower <= row.n_t * kSlack && row.n_t <= row.upper * kSlack;
    });
    return rep;
}

}  // namespace harmonize
