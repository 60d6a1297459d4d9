// Closed-form oracles, computed here independently of the library paths
// they check. Values marked "frozen" were produced by the oracle beside them.

#include <doctest.h>

#include <cmath>

#include "harmonize/kernels.hpp"
#include "harmonize/measures.hpp"
#include "harmonize/quadrature.hpp"
#include "harmonize/simulate.hpp"

using namespace harmonize;

namespace {

// Time-domain energy 2 pi int_0^t H(s)^2 ds for the unit density.
double plancherel_heat(double psi, double t) {
    if (psi == 0.0) return 2.0 * M_PI * t;
    return M_PI * (-std::expm1(-2.0 * t * psi)) / psi;
}

double plancherel_wave(double psi, double t) {
    if (psi == 0.0) return 2.0 * M_PI * t * t * t / 3.0;
    const double a = std::sqrt(psi);
    return M_PI * (t / psi - std::sin(2.0 * a * t) / (2.0 * a * psi));
}

// int_R |s|^-g / (1 + s^2) ds.
double c_gamma(double g) { return M_PI / std::cos(M_PI * g / 2.0); }

// Plain composite Simpson on [a, b]; slow but independent of QUADPACK.
template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_SUITE("oracles") {
    TEST_CASE("heat N_t matches the Plancherel energy") {
        const OperatorSpec op = OperatorSpec::heat(2.0, 1);
        const SpectralDensity1D nu = SpectralDensity1D::riesz(0.0);
        for (double t : {0.1, 0.5, 1.0, 3.0})
            for (double psi : {0.0, 1e-4, 0.3, 1.0, 7.0, 1e3, 1e6}) {
                const double want = plancherel_heat(psi, t);
                CHECK(n_t(op, nu, psi, t) == doctest::Approx(want).epsilon(1e-8));
            }
    }

    TEST_CASE("wave N_t matches the Plancherel energy") {
        const OperatorSpec op = OperatorSpec::wave(2.0, 1);
        const SpectralDensity1D nu = SpectralDensity1D::riesz(0.0);
        for (double t : {0.1, 0.5, 1.0, M_PI, 5.0})
            for (double psi : {0.0, 1e-4, 0.3, 1.0, 7.0, 1e3, 1e6}) {
                const double want = plancherel_wave(psi, t);
                CHECK(n_t(op, nu, psi, t) == doctest::Approx(want).epsilon(1e-8));
            }
    }

    TEST_CASE("Plancherel anchors") {
        CHECK(plancherel_heat(1.0, 1.0) == doctest::Approx(M_PI * (1.0 - std::exp(-2.0))).epsilon(1e-15));
        CHECK(plancherel_wave(1.0, M_PI) == doctest::Approx(M_PI * M_PI).epsilon(1e-15));
        // Frozen: the spec's CLI example quotes 2.715679, which is not pi (1 - e^-2).
        CHECK(plancherel_heat(1.0, 1.0) == doctest::Approx(2.7164243220).epsilon(1e-10));
    }

    TEST_CASE("Riesz line integral scales as C_gamma a^(-gamma-1)") {
        for (double g : {-0.5, 0.0, 0.5}) {
            const SpectralDensity1D nu = SpectralDensity1D::riesz(g);
            for (double a : {0.5, 2.0, 10.0}) {
                const RealFn f = [a](double tau) { return 1.0 / (tau * tau + a * a); };
                const QuadResult r = integrate_line(f, &nu, {a}, {1e-11, 0.0, 2000});
                CHECK(r.value == doctest::Approx(c_gamma(g) * std::pow(a, -g - 1.0)).epsilon(1e-6));
            }
        }
        // Frozen from c_gamma(0.5) * 10^-1.5.
        const SpectralDensity1D nu = SpectralDensity1D::riesz(0.5);
        const RealFn f = [](double tau) { return 1.0 / (tau * tau + 100.0); };
        CHECK(integrate_line(f, &nu, {10.0}).value == doctest::Approx(0.140496295).epsilon(1e-8));
    }

    TEST_CASE("C_gamma oracle agrees with Simpson after the substitution s = u^2") {
        // int_R |s|^-g/(1+s^2) = 4 int_0^inf u^{1-2g}/(1+u^4) du, smooth for g <= 0.5.
        for (double g : {0.0, 0.25, 0.5}) {
            auto f = [g](double u) { return std::pow(u, 1.0 - 2.0 * g) / (1.0 + u * u * u * u); };
            // Map [0, inf) to [0, 1): u = v / (1 - v).
            auto h = [&f](double v) {
                if (v >= 1.0) return 0.0;
                const double u = v / (1.0 - v);
                return f(u) / ((1.0 - v) * (1.0 - v));
            };
            CHECK(4.0 * simpson(h, 0.0, 1.0, 200000) == doctest::Approx(c_gamma(g)).epsilon(1e-7));
        }
    }

    TEST_CASE("K constants") {
        CHECK(k_constant(SpectralDensity1D::riesz(0.0)) == doctest::Approx(M_PI).epsilon(1e-10));
        CHECK(k_constant(SpectralDensity1D::riesz(0.5)) == doctest::Approx(M_PI * std::sqrt(2.0)).epsilon(1e-8));
        CHECK(k_constant(SpectralDensity1D::bessel(0.0)) == doctest::Approx(M_PI).epsilon(1e-10));
        // Bessel(2): int 1/(1+tau^2)^2 = pi/2.
        CHECK(k_constant(SpectralDensity1D::bessel(2.0)) == doctest::Approx(M_PI / 2.0).epsilon(1e-9));
    }

    TEST_CASE("Bessel line integral is sandwiched by a^(-gamma-1)") {
        for (double g : {-0.5, 0.5}) {
            const SpectralDensity1D nu = SpectralDensity1D::bessel(g);
            double lo = 1e300, hi = 0.0;
            for (double a : {2.0, 10.0, 100.0, 1e3, 1e4}) {
                const RealFn f = [a](double tau) { return 1.0 / (tau * tau + a * a); };
                const double ratio = integrate_line(f, &nu, {1.0, a}).value / std::pow(a, -g - 1.0);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
            CHECK(lo > 0.0);
            CHECK(hi / lo < 2.0);
            // The ratio tends to C_gamma with relative error O(a^(gamma-1)).
            const RealFn f = [](double tau) { return 1.0 / (tau * tau + 1e16); };
            CHECK(integrate_line(f, &nu, {1.0, 1e8}).value / std::pow(1e8, -g - 1.0) ==
                  doctest::Approx(c_gamma(g)).epsilon(1e-3));
        }
    }

    TEST_CASE("fBm spectral constant") {
        CHECK(fbm_constant(0.5) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-15));
        for (double H : {0.1, 0.3, 0.7, 0.9})
            CHECK(fbm_constant(H) == doctest::Approx(std::tgamma(2 * H + 1) * std::sin(M_PI * H) / (2 * M_PI)));
        // The isotropic constant on R^1 is the fBm constant.
        for (double H : {0.2, 0.5, 0.8}) CHECK(fbf_constant(H, 1) == doctest::Approx(fbm_constant(H)).epsilon(1e-13));
    }

    TEST_CASE("fBf constant normalizes the unit-vector variance") {
        // c * int_{R^2} |e^{-i u_1} - 1|^2 |u|^-(2H+2) du = 1 in polar form:
        // int_0^inf (1 - cos r) r^{-1-2H} dr = Gamma(1-2H) cos(pi H) / (2H) and
        // int_0^{2 pi} |cos theta|^{2H} dtheta = 2 sqrt(pi) Gamma(H + 1/2) / Gamma(H + 1).
        for (double H : {0.3, 0.7}) {
            const double radial = std::tgamma(1.0 - 2.0 * H) * std::cos(M_PI * H) / (2.0 * H);
            const double angular = 2.0 * std::sqrt(M_PI) * std::tgamma(H + 0.5) / std::tgamma(H + 1.0);
            CHECK(fbf_constant(H, 2) * 2.0 * radial * angular == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    TEST_CASE("fBm covariance from the spectral representation") {
        for (double H : {0.3, 0.5, 0.7}) {
            const SpectralDensity1D nu = SpectralDensity1D::riesz(2.0 * H - 1.0).scaled(fbm_constant(H));
            for (auto [t, s] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {0.5, 3.0}}) {
                const double want =
                    0.5 * (std::pow(t, 2 * H) + std::pow(s, 2 * H) - std::pow(std::abs(t - s), 2 * H));
                CHECK(covariance_R(nu, t, s) == doctest::Approx(want).epsilon(1e-5));
            }
        }
    }

    TEST_CASE("Bessel(2) kernel is the Cauchy pair") {
        const SpectralDensity1D nu = SpectralDensity1D::bessel(2.0);
        CHECK(kernel_rho(nu, 1.0) == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-7));
        CHECK(kernel_rho(nu, 2.0) / kernel_rho(nu, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-7));
        CHECK(kernel_rho(nu, 0.0) == doctest::Approx(0.5).epsilon(1e-9));
    }

    TEST_CASE("heat I_t in closed form") {
        // I_t = 2 pi int_R (1 - e^{-2 t xi^2}) / (2 xi^2) dxi = 2 pi sqrt(2 pi t).
        const OperatorSpec op = OperatorSpec::heat(2.0, 1);
        for (double t : {0.5, 1.0, 2.0}) {
            const QuadResult r = i_t(op, SpectralDensity1D::riesz(0.0), SpatialMeasure::lebesgue(1), t);
            CHECK(r.value == doctest::Approx(2.0 * M_PI * std::sqrt(2.0 * M_PI * t)).epsilon(1e-6));
        }
    }
}
