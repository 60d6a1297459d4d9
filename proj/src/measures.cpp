#include "harmonize/measures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>

#include "harmonize/errors.hpp"
#include "harmonize/quadrature.hpp"

namespace harmonize {

namespace {

constexpr double kKTol = 1e-11;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Log grid with 64 points per decade over [1e-6, 1e6].
const std::vector<double>& sample_grid() {
    static const std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = 0; i <= 12 * 64; ++i) g.push_back(std::pow(10.0, -6.0 + i / 64.0));
        return g;
    }();
    return grid;
}

DivergenceError divergent(const std::string& what) {
    ConvergenceVerdict v;
    v.verdict = Verdict::Divergent;
    return DivergenceError(what, v);
}

}  // namespace

SpectralDensity1D SpectralDensity1D::riesz(double gamma) {
    if (!(gamma > -1.0 && gamma < 1.0))
        throw PreconditionError("Riesz density needs gamma in (-1, 1), got " + num(gamma));
    SpectralDensity1D m;
    m.kind_ = DensityKind::Riesz;
    m.gamma_ = gamma;
    m.singular_ = gamma > 0.0;
    m.tail_order_ = gamma;
    m.label_ = "riesz";
    m.finish();
    return m;
}

SpectralDensity1D SpectralDensity1D::bessel(double gamma) {
    if (!(gamma > -1.0) || !std::isfinite(gamma))
        throw PreconditionError("Bessel density needs gamma > -1, got " + num(gamma));
    SpectralDensity1D m;
    m.kind_ = DensityKind::Bessel;
    m.gamma_ = gamma;
    m.tail_order_ = gamma;
    m.label_ = "bessel";
    m.finish();
    return m;
}

SpectralDensity1D SpectralDensity1D::custom(std::function<double(double)> eta, bool singular_at_zero,
                                            double tail_order, std::string label) {
    if (!eta) throw PreconditionError("custom density needs a function");
    if (!(tail_order > -1.0))
        throw divergent("custom density with tail order " + num(tail_order) + " has K = infinity");
    SpectralDensity1D m;
    m.kind_ = DensityKind::Custom;
    m.custom_ = std::make_shared<const std::function<double(double)>>(std::move(eta));
    m.singular_ = singular_at_zero;
    m.tail_order_ = tail_order;
    m.label_ = std::move(label);
    for (double tau : sample_grid()) {
        double v = (*m.custom_)(tau);
        if (!(v >= 0.0) || !std::isfinite(v))
            throw PreconditionError("custom density must be finite and nonnegative on (0, inf)");
    }
    // Divergence probe before trusting the quadrature value.
    const RealFn g = [&m](double r) { return m.eta(r) / (1.0 + r * r); };
    ConvergenceVerdict verdict = classify_convergence(g, SpatialMeasure::lebesgue(1), {1e-8, 0.0, 2000}, Exec::Serial);
    if (verdict.verdict == Verdict::Divergent)
        throw DivergenceError("custom density has K = infinity", verdict);
    m.finish();
    return m;
}

void SpectralDensity1D::finish() {
    const RealFn f = [](double tau) { return 1.0 / (1.0 + tau * tau); };
    QuadResult r = integrate_half_line(f, this, {1.0}, {kKTol, 0.0, 4000});
    if (!r.converged || !(r.value > 0.0) || !std::isfinite(r.value))
        throw QuadratureError("K quadrature did not converge", r.abs_error_estimate);
    k_ = 2.0 * r.value;
}

SpectralDensity1D SpectralDensity1D::scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("scale must be positive, got " + num(c));
    SpectralDensity1D m = *this;
    m.scale_ *= c;
    m.k_ *= c;
    return m;
}

double SpectralDensity1D::eta(double tau) const {
    const double a = std::abs(tau);
    switch (kind_) {
        case DensityKind::Riesz:
            if (a == 0.0) {
                if (gamma_ > 0.0) throw DomainError("Riesz density is singular at tau = 0");
                return gamma_ == 0.0 ? scale_ : 0.0;
            }
            return gamma_ == 0.0 ? scale_ : scale_ * std::pow(a, -gamma_);
        case DensityKind::Bessel:
            return scale_ * std::pow(1.0 + a * a, -0.5 * gamma_);
        case DensityKind::Custom:
            if (a == 0.0 && singular_) throw DomainError("custom density is singular at tau = 0");
            return scale_ * (*custom_)(a);
    }
    return 0.0;
}

std::string SpectralDensity1D::describe() const {
    std::string base;
    switch (kind_) {
        case DensityKind::Riesz: base = "riesz:" + num(gamma_); break;
        case DensityKind::Bessel: base = "bessel:" + num(gamma_); break;
        case DensityKind::Custom: base = label_; break;
    }
    return scale_ == 1.0 ? base : "scaled:" + num(scale_) + ":" + base;
}

SpatialMeasure SpatialMeasure::radial_power(double alpha, int d) {
    if (d < 1) throw PreconditionError("dimension must be positive");
    if (!(alpha < d)) throw PreconditionError("radial power measure needs alpha < d (local integrability)");
    SpatialMeasure m;
    m.kind_ = SpatialKind::RadialPower;
    m.alpha_ = alpha;
    m.d_ = d;
    return m;
}

SpatialMeasure SpatialMeasure::radial_bessel(double alpha, int d) {
    if (d < 1) throw PreconditionError("dimension must be positive");
    if (!std::isfinite(alpha)) throw PreconditionError("alpha must be finite");
    SpatialMeasure m;
    m.kind_ = SpatialKind::RadialBessel;
    m.alpha_ = alpha;
    m.d_ = d;
    return m;
}

SpatialMeasure SpatialMeasure::lebesgue(int d) {
    if (d < 1) throw PreconditionError("dimension must be positive");
    SpatialMeasure m;
    m.kind_ = SpatialKind::Lebesgue;
    m.d_ = d;
    return m;
}

SpatialMeasure SpatialMeasure::discrete(std::vector<Atom> atoms, int d) {
    if (d < 1) throw PreconditionError("dimension must be positive");
    // Symmetrize as (mu + mu(-.)) / 2, merging coincident points.
    std::map<std::vector<double>, double> merged;
    for (const Atom& a : atoms) {
        if (static_cast<int>(a.point.size()) != d) throw PreconditionError("atom dimension mismatch");
        if (!(a.weight >= 0.0)) throw PreconditionError("atom weights must be nonnegative");
        merged[a.point] += a.weight;
    }
    bool symmetric = true;
    for (const auto& [p, w] : merged) {
        std::vector<double> q(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[i] == 0.0 ? 0.0 : -p[i];
        auto it = merged.find(q);
        if (it == merged.end() || it->second != w) symmetric = false;
    }
    SpatialMeasure m;
    m.kind_ = SpatialKind::Discrete;
    m.d_ = d;
    if (symmetric) {
        for (const auto& [p, w] : merged) m.atoms_.push_back({p, w});
        return m;
    }
    std::map<std::vector<double>, double> sym;
    for (const auto& [p, w] : merged) {
        std::vector<double> q(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[i] == 0.0 ? 0.0 : -p[i];
        sym[p] += 0.5 * w;
        sym[q] += 0.5 * w;
    }
    for (const auto& [p, w] : sym) m.atoms_.push_back({p, w});
    m.warnings_.push_back("discrete measure was not symmetric; replaced by (mu + mu(-.))/2");
    std::cerr << "warning: " << m.warnings_.back() << "\n";
    return m;
}

SpatialMeasure SpatialMeasure::scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("scale must be positive, got " + num(c));
    SpatialMeasure m = *this;
    m.scale_ *= c;
    return m;
}

double SpatialMeasure::density(double r) const {
    switch (kind_) {
        case SpatialKind::RadialPower: return alpha_ == 0.0 ? scale_ : scale_ * std::pow(r, -alpha_);
        case SpatialKind::RadialBessel: return scale_ * std::pow(1.0 + r * r, -0.5 * alpha_);
        case SpatialKind::Lebesgue: return scale_;
        case SpatialKind::Discrete: break;
    }
    throw PreconditionError("discrete measure has no density");
}

std::string SpatialMeasure::describe() const {
    std::string base;
    switch (kind_) {
        case SpatialKind::RadialPower: base = "riesz:" + num(alpha_); break;
        case SpatialKind::RadialBessel: base = "bessel:" + num(alpha_); break;
        case SpatialKind::Lebesgue: base = "lebesgue"; break;
        case SpatialKind::Discrete: base = "discrete:" + std::to_string(atoms_.size()); break;
    }
    return scale_ == 1.0 ? base : "scaled:" + num(scale_) + ":" + base;
}

double eta_density(const SpectralDensity1D& m, double tau) { return m.eta(tau); }

double k_constant(const SpectralDensity1D& m) { return m.k(); }

double condition_C_constant(const SpectralDensity1D& m, double lambda) {
    if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
    const double g = m.gamma();
    switch (m.kind()) {
        case DensityKind::Riesz: return std::pow(lambda, -g);
        case DensityKind::Bessel:
            if (g > 0.0) return std::pow(std::min(1.0, lambda * lambda), -0.5 * g);
            if (g < 0.0) return std::pow(std::max(1.0, lambda * lambda), -0.5 * g);
            return 1.0;
        case DensityKind::Custom: break;
    }
    double sup = 0.0;
    for (double tau : sample_grid()) {
        const double base = m.eta(tau);
        if (base <= 0.0) continue;
        sup = std::max(sup, m.eta(lambda * tau) / base);
    }
    return sup;
}

namespace {

double custom_D_ratio(const SpectralDensity1D& m, double a, bool c1) {
    const double ea = m.eta(a);
    if (!(ea > 0.0)) return std::numeric_limits<double>::infinity();
    const QuadOptions opts{1e-8, 0.0, 2000};
    if (c1) {
        RealFn f = [&m](double tau) { return m.eta(tau); };
        QuadResult r = integrate_interval(f, 0.0, a, opts);
        return r.value / (a * ea);
    }
    RealFn f = [&m](double tau) { return m.eta(tau) / (tau * tau); };
    QuadResult r = integrate_tail(f, a, opts);
    return r.value / (ea / a);
}

}  // namespace

double condition_D_constant(const SpectralDensity1D& m, double K, bool c1) {
    if (!(K > 0.0)) throw PreconditionError("K must be positive");
    const double g = m.gamma();
    switch (m.kind()) {
        case DensityKind::Riesz:
            if (c1 && g >= 0.0) return 1.0 / (1.0 - g);
            if (!c1 && g <= 0.0) return 1.0 / (1.0 + g);
            throw PreconditionError("Riesz density does not satisfy the requested monotone condition");
        case DensityKind::Bessel: {
            const double ck = 1.0 + 1.0 / (K * K);
            if (c1 && g >= 0.0 && g < 1.0) return std::pow(ck, 0.5 * g) / (1.0 - g);
            if (!c1 && g <= 0.0) return std::pow(ck, -0.5 * g) / (1.0 + g);
            throw PreconditionError("Bessel density does not satisfy the requested monotone condition");
        }
        case DensityKind::Custom: break;
    }
    double sup = 0.0;
    for (double a = K; a <= 1e6; a *= std::pow(10.0, 1.0 / 8.0)) sup = std::max(sup, custom_D_ratio(m, a, c1));
    return sup;
}

ConditionReport classify_conditions(const SpectralDensity1D& m, const std::vector<double>& probe_lambda,
                                    const std::vector<double>& probe_a) {
    for (double l : probe_lambda)
        if (!(l > 0.0)) throw PreconditionError("probe lambdas must be positive");
    for (double a : probe_a)
        if (!(a > 0.0)) throw PreconditionError("probe points must be positive");

    ConditionReport rep;
    const double g = m.gamma();
    if (m.kind() != DensityKind::Custom) {
        rep.satisfies_C = true;
        for (double l : probe_lambda) rep.C_witness.emplace_back(l, condition_C_constant(m, l));
        rep.monotonicity = g > 0.0 ? Monotonicity::NonIncreasing
                                   : (g < 0.0 ? Monotonicity::NonDecreasing : Monotonicity::Constant);
        rep.satisfies_C1 = g >= 0.0 && g < 1.0;
        rep.satisfies_C2 = g <= 0.0;
        if (rep.satisfies_C1)
            for (double a : probe_a) rep.C1_witness.emplace_back(a, condition_D_constant(m, a, true));
        if (rep.satisfies_C2)
            for (double a : probe_a) rep.C2_witness.emplace_back(a, condition_D_constant(m, a, false));
        if (g == 0.0) rep.note = "constant density: both monotone directions hold";
        if (m.kind() == DensityKind::Bessel && g >= 1.0)
            rep.note = "integrable Bessel density: int_0^a eta stays bounded, so (C1) fails";
        return rep;
    }

    // Custom: sampled monotonicity and ratio tests.
    bool nonincreasing = true;
    bool nondecreasing = true;
    double prev = m.eta(sample_grid().front());
    for (std::size_t i = 1; i < sample_grid().size(); ++i) {
        const double v = m.eta(sample_grid()[i]);
        if (v > prev * (1.0 + 1e-12)) nonincreasing = false;
        if (v < prev * (1.0 - 1e-12)) nondecreasing = false;
        prev = v;
    }
    if (nonincreasing && nondecreasing) {
        rep.monotonicity = Monotonicity::Constant;
    } else if (nonincreasing) {
        rep.monotonicity = Monotonicity::NonIncreasing;
    } else if (nondecreasing) {
        rep.monotonicity = Monotonicity::NonDecreasing;
    } else {
        rep.monotonicity = Monotonicity::Neither;
    }
    rep.note = "sampled on [1e-6, 1e6]; behaviour outside the grid is not verified";

    rep.satisfies_C = !probe_lambda.empty();
    for (double l : probe_lambda) {
        const double c = condition_C_constant(m, l);
        rep.C_witness.emplace_back(l, c);
        if (!(c > 0.0) || !std::isfinite(c)) rep.satisfies_C = false;
    }

    auto ratio_test = [&](bool c1, std::vector<std::pair<double, double>>& witness) {
        std::vector<double> as = probe_a;
        std::sort(as.begin(), as.end());
        std::vector<double> ratios;
        for (double a : as) ratios.push_back(custom_D_ratio(m, a, c1));
        for (double r : ratios)
            if (!std::isfinite(r)) return false;
        if (ratios.size() >= 2) {
            const double last = ratios.back();
            const double before = ratios[ratios.size() - 2];
            if (last > 1.1 * before) {
                rep.inconclusive = true;
                return false;
            }
        }
        for (std::size_t i = 0; i < as.size(); ++i) {
            double sup = 0.0;
            for (std::size_t j = i; j < as.size(); ++j) sup = std::max(sup, ratios[j]);
            witness.emplace_back(as[i], sup);
        }
        return !as.empty();
    };
    const bool inc_ok = rep.monotonicity == Monotonicity::NonIncreasing || rep.monotonicity == Monotonicity::Constant;
    const bool dec_ok = rep.monotonicity == Monotonicity::NonDecreasing || rep.monotonicity == Monotonicity::Constant;
    if (inc_ok) rep.satisfies_C1 = ratio_test(true, rep.C1_witness);
    if (dec_ok) rep.satisfies_C2 = ratio_test(false, rep.C2_witness);
    return rep;
}

double fbm_constant(double H) {
    if (!(H > 0.0 && H < 1.0)) throw PreconditionError("Hurst index must lie in (0, 1)");
    return std::tgamma(2.0 * H + 1.0) * std::sin(M_PI * H) / (2.0 * M_PI);
}

double kernel_rho(const SpectralDensity1D& m, double t) {
    t = std::abs(t);
    const double g = m.gamma();
    if (m.kind() == DensityKind::Riesz) {
        if (!(g > 0.0))
            throw divergent("Riesz kernel needs gamma in (0, 1): the transform is not a locally integrable function");
        if (t == 0.0) throw divergent("Riesz kernel is singular at t = 0");
        return m.scale() * std::tgamma(1.0 - g) * std::sin(0.5 * M_PI * g) * std::pow(t, g - 1.0) / M_PI;
    }
    const double decay = m.tail_order();
    const QuadOptions opts{1e-10, 0.0, 4000};
    if (t == 0.0) {
        if (!(decay > 1.0)) throw divergent("rho(0) diverges: eta is not integrable");
        RealFn one = [](double) { return 1.0; };
        QuadResult r = integrate_half_line(one, &m, {1.0}, opts);
        if (!r.converged) throw QuadratureError("rho(0) quadrature did not converge", r.abs_error_estimate);
        return r.value / M_PI;
    }
    if (!(decay > 0.0)) throw divergent("rho(t) needs eta to vanish at infinity");
    TailModel tail;
    tail.cutoff = 16.0 * M_PI / t;
    tail.smooth = [](double) { return 0.0; };
    tail.terms.push_back({[](double) { return 1.0; }, t, false});
    RealFn head = [t](double tau) { return std::cos(tau * t); };
    QuadResult r = integrate_half_line(head, &m, {}, opts, &tail);
    if (!r.converged) throw QuadratureError("rho(t) quadrature did not converge", r.abs_error_estimate);
    return r.value / M_PI;
}

double covariance_R(const SpectralDensity1D& m, double t, double s) {
    if (t == 0.0 || s == 0.0) return 0.0;
    // Re[F1_t conj F1_s] = 4 sin(tau t/2) sin(tau s/2) cos(tau (t-s)/2) / tau^2.
    RealFn head = [t, s](double tau) {
        if (tau == 0.0) return t * s;
        return 4.0 * std::sin(0.5 * tau * t) * std::sin(0.5 * tau * s) * std::cos(0.5 * tau * (t - s)) / (tau * tau);
    };
    // Beyond the cutoff: [1 - cos(t tau) - cos(s tau) + cos((t-s) tau)] / tau^2.
    std::map<double, double> coef;
    coef[std::abs(t)] -= 1.0;
    coef[std::abs(s)] -= 1.0;
    coef[std::abs(t - s)] += 1.0;
    double smooth_coef = 1.0;
    TailModel tail;
    tail.cutoff = 16.0 * M_PI / std::min(std::abs(t), std::abs(s));
    for (const auto& [omega, c] : coef) {
        if (c == 0.0) continue;
        if (omega == 0.0) {
            smooth_coef += c;
            continue;
        }
        const double cc = c;
        tail.terms.push_back({[cc](double tau) { return cc / (tau * tau); }, omega, false});
    }
    tail.smooth = [smooth_coef](double tau) { return smooth_coef / (tau * tau); };
    QuadResult r = integrate_half_line(head, &m, {}, {1e-10, 0.0, 4000}, &tail);
    if (!r.converged) throw QuadratureError("covariance quadrature did not converge", r.abs_error_estimate);
    return 2.0 * r.value;
}

namespace {

struct SpecCursor {
    const std::string& text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(what + " in measure spec '" + text + "'", 1, static_cast<int>(pos) + 1);
    }

    std::string word() {
        std::size_t end = text.find(':', pos);
        if (end == std::string::npos) end = text.size();
        std::string w = text.substr(pos, end - pos);
        return w;
    }

    void advance(std::size_t n) { pos += n; }

    void expect_colon() {
        if (pos >= text.size() || text[pos] != ':') fail("expected ':'");
        ++pos;
    }

    double number() {
        std::string w = word();
        double v = 0.0;
        auto res = std::from_chars(w.data(), w.data() + w.size(), v);
        if (w.empty() || res.ec != std::errc() || res.ptr != w.data() + w.size()) fail("expected a number");
        pos += w.size();
        return v;
    }
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class Leaf>
auto parse_spec(SpecCursor& cur, const Leaf& leaf) -> decltype(leaf(std::string(), 0.0, cur)) {
    const std::string w = cur.word();
    if (w == "scaled") {
        cur.advance(w.size());
        cur.expect_colon();
        const double c = cur.number();
        cur.expect_colon();
        auto inner = parse_spec(cur, leaf);
        if (!(c > 0.0)) cur.fail("scale must be positive");
        return inner.scaled(c);
    }
    if (w == "lebesgue") {
        cur.advance(w.size());
        if (cur.pos != cur.text.size()) cur.fail("unexpected trailing input");
        return leaf(w, 0.0, cur);
    }
    if (w == "riesz" || w == "bessel") {
        cur.advance(w.size());
        cur.expect_colon();
        const std::size_t at = cur.pos;
        const double g = cur.number();
        if (cur.pos != cur.text.size()) cur.fail("unexpected trailing input");
        cur.pos = at;
        auto m = leaf(w, g, cur);
        cur.pos = cur.text.size();
        return m;
    }
    cur.fail("unknown measure kind '" + w + "'");
}

}  // namespace

SpectralDensity1D parse_density(const std::string& spec) {
    const std::string text = trim(spec);
    SpecCursor cur{text};
    return parse_spec(cur, [](const std::string& kind, double g, SpecCursor& c) {
        try {
            if (kind == "bessel") return SpectralDensity1D::bessel(g);
            return SpectralDensity1D::riesz(g);
        } catch (const PreconditionError& e) {
            c.fail(e.what());
        }
    });
}

SpatialMeasure parse_spatial(const std::string& spec, int d) {
    const std::string text = trim(spec);
    SpecCursor cur{text};
    return parse_spec(cur, [d](const std::string& kind, double a, SpecCursor& c) {
        try {
            if (kind == "lebesgue") return SpatialMeasure::lebesgue(d);
            if (kind == "bessel") return SpatialMeasure::radial_bessel(a, d);
            return SpatialMeasure::radial_power(a, d);
        } catch (const PreconditionError& e) {
            c.fail(e.what());
        }
    });
}

}  // namespace harmonize
