#include <doctest.h>

#include <cmath>

#include "harmonize/errors.hpp"
#include "harmonize/measures.hpp"
#include "harmonize/quadrature.hpp"

using namespace harmonize;

TEST_SUITE("measures") {
    TEST_CASE("factory validation") {
        CHECK_THROWS_AS(SpectralDensity1D::riesz(1.0), PreconditionError);
        CHECK_THROWS_AS(SpectralDensity1D::riesz(-1.0), PreconditionError);
        CHECK_THROWS_AS(SpectralDensity1D::bessel(-1.0), PreconditionError);
        CHECK_NOTHROW(SpectralDensity1D::bessel(5.0));
        CHECK_THROWS_AS(SpectralDensity1D::riesz(0.0).scaled(0.0), PreconditionError);
        CHECK_THROWS_AS(SpatialMeasure::radial_power(1.0, 1), PreconditionError);
        CHECK_NOTHROW(SpatialMeasure::radial_power(2.5, 3));
        CHECK_THROWS_AS(SpatialMeasure::lebesgue(0), PreconditionError);
        CHECK_THROWS_AS(SpatialMeasure::discrete({{{1.0, 2.0}, 1.0}}, 1), PreconditionError);
        CHECK_THROWS_AS(SpatialMeasure::discrete({{{1.0}, -1.0}}, 1), PreconditionError);
        CHECK_THROWS_AS(SpectralDensity1D::custom([](double) { return 1.0; }, false, -1.0), DivergenceError);
    }

    TEST_CASE("eta is even and matches its kind") {
        const SpectralDensity1D r = SpectralDensity1D::riesz(-0.4);
        const SpectralDensity1D b = SpectralDensity1D::bessel(1.5);
        for (double tau : {1e-3, 0.5, 2.0, 70.0}) {
            CHECK(r.eta(tau) == r.eta(-tau));
            CHECK(b.eta(tau) == b.eta(-tau));
            CHECK(r.eta(tau) == doctest::Approx(std::pow(tau, 0.4)));
            CHECK(b.eta(tau) == doctest::Approx(std::pow(1.0 + tau * tau, -0.75)));
            CHECK(eta_density(r.scaled(3.0), tau) == doctest::Approx(3.0 * r.eta(tau)));
        }
        CHECK_THROWS_AS(SpectralDensity1D::riesz(0.5).eta(0.0), DomainError);
        CHECK(SpectralDensity1D::riesz(-0.5).eta(0.0) == 0.0);
    }

    TEST_CASE("K is homogeneous in the scale") {
        const SpectralDensity1D b = SpectralDensity1D::bessel(0.7);
        CHECK(k_constant(b.scaled(2.5)) == doctest::Approx(2.5 * k_constant(b)).epsilon(1e-12));
        const SpectralDensity1D c = SpectralDensity1D::custom([](double) { return 1.0; }, false, 0.0);
        CHECK(k_constant(c) == doctest::Approx(M_PI).epsilon(1e-8));
        CHECK(k_constant(c.scaled(0.25)) == doctest::Approx(0.25 * M_PI).epsilon(1e-8));
    }

    TEST_CASE("condition (C) constants") {
        const SpectralDensity1D r = SpectralDensity1D::riesz(0.3);
        for (double l : {0.1, 1.0, 7.0}) CHECK(condition_C_constant(r, l) == doctest::Approx(std::pow(l, -0.3)));
        // Bessel with gamma > 0: eta(l tau)/eta(tau) <= max(1, l^-gamma).
        const SpectralDensity1D b = SpectralDensity1D::bessel(1.0);
        CHECK(condition_C_constant(b, 0.5) == doctest::Approx(2.0));
        CHECK(condition_C_constant(b, 3.0) == doctest::Approx(1.0));
        // The witness really bounds the ratio on a grid.
        for (double l : {0.2, 0.5, 4.0})
            for (double tau = 1e-3; tau < 1e3; tau *= 1.7)
                CHECK(b.eta(l * tau) <= condition_C_constant(b, l) * b.eta(tau) * (1.0 + 1e-12));
        CHECK_THROWS_AS(condition_C_constant(b, 0.0), PreconditionError);
    }

    TEST_CASE("condition (C1)/(C2) constants bound the averaged density") {
        const SpectralDensity1D r = SpectralDensity1D::riesz(0.5);
        CHECK(condition_D_constant(r, 1.0, true) == doctest::Approx(2.0));
        CHECK_THROWS_AS(condition_D_constant(r, 1.0, false), PreconditionError);
        const SpectralDensity1D b = SpectralDensity1D::bessel(0.5);
        for (double K : {0.5, 1.0, 4.0}) {
            const double D = condition_D_constant(b, K, true);
            for (double a = K; a < 1e4; a *= 3.0) {
                const RealFn f = [&b](double tau) { return b.eta(tau); };
                const double avg = integrate_interval(f, 0.0, a).value / a;
                CHECK(avg <= D * b.eta(a) * (1.0 + 1e-9));
            }
        }
        const SpectralDensity1D up = SpectralDensity1D::bessel(-0.5);
        for (double K : {0.5, 2.0}) {
            const double D = condition_D_constant(up, K, false);
            for (double a = K; a < 1e4; a *= 3.0) {
                const RealFn f = [&up](double tau) { return up.eta(tau); };
                const double avg = integrate_interval(f, 0.0, a).value / a;
                CHECK(avg >= up.eta(a) / D * (1.0 - 1e-9));
            }
        }
    }

    TEST_CASE("classifier reports at most one monotone condition for strict densities") {
        const std::vector<double> lam{0.5, 2.0, 10.0};
        const std::vector<double> as{1.0, 10.0};
        const ConditionReport inc = classify_conditions(SpectralDensity1D::bessel(1.0), lam, as);
        CHECK(inc.satisfies_C);
        CHECK_FALSE(inc.satisfies_C1);
        CHECK_FALSE(inc.satisfies_C2);
        CHECK(inc.monotonicity == Monotonicity::NonIncreasing);

        const ConditionReport dec = classify_conditions(SpectralDensity1D::riesz(0.4), lam, as);
        CHECK(dec.satisfies_C1);
        CHECK_FALSE(dec.satisfies_C2);
        REQUIRE(dec.C_witness.size() == 3);
        for (const auto& [l, c] : dec.C_witness) CHECK(c > 0.0);
        REQUIRE(dec.C1_witness.size() == 2);
        for (const auto& [k, d] : dec.C1_witness) CHECK(d > 0.0);

        const ConditionReport grow = classify_conditions(SpectralDensity1D::riesz(-0.4), lam, as);
        CHECK(grow.satisfies_C2);
        CHECK_FALSE(grow.satisfies_C1);
        CHECK(grow.monotonicity == Monotonicity::NonDecreasing);

        // gamma = 0 is constant: both hold.
        const ConditionReport flat = classify_conditions(SpectralDensity1D::riesz(0.0), lam, as);
        CHECK(flat.satisfies_C1);
        CHECK(flat.satisfies_C2);
        CHECK(flat.monotonicity == Monotonicity::Constant);

        CHECK_THROWS_AS(classify_conditions(SpectralDensity1D::riesz(0.0), {-1.0}, as), PreconditionError);
    }

    TEST_CASE("custom densities are sampled") {
        const SpectralDensity1D dec =
            SpectralDensity1D::custom([](double t) { return 1.0 / std::sqrt(1.0 + t); }, false, 0.5);
        const ConditionReport rep = classify_conditions(dec, {0.5, 2.0}, {10.0, 100.0, 1000.0});
        CHECK(rep.monotonicity == Monotonicity::NonIncreasing);
        CHECK(rep.satisfies_C);
        CHECK(rep.satisfies_C1);
        CHECK_FALSE(rep.satisfies_C2);

        const SpectralDensity1D wiggle = SpectralDensity1D::custom(
            [](double t) { return (2.0 + std::sin(t)) / (1.0 + t * t); }, false, 2.0);
        const ConditionReport w = classify_conditions(wiggle, {0.5, 2.0}, {1.0});
        CHECK(w.monotonicity == Monotonicity::Neither);
        CHECK_FALSE(w.satisfies_C1);
        CHECK_FALSE(w.satisfies_C2);
    }

    TEST_CASE("grammar round trip") {
        for (const char* s : {"riesz:0.25", "bessel:2", "scaled:3:riesz:-0.5", "scaled:2:scaled:0.5:bessel:0.5"}) {
            const SpectralDensity1D m = parse_density(s);
            const SpectralDensity1D again = parse_density(m.describe());
            CHECK(again.describe() == m.describe());
            CHECK(again.eta(1.7) == m.eta(1.7));
            CHECK(again.scale() == m.scale());
        }
        CHECK(parse_density("scaled:3:riesz:-0.5").scale() == 3.0);
        CHECK(parse_density("  bessel:1  ").kind() == DensityKind::Bessel);
        for (const char* s : {"lebesgue", "riesz:0.5", "bessel:1", "scaled:2:lebesgue"}) {
            const SpatialMeasure mu = parse_spatial(s, 2);
            const SpatialMeasure again = parse_spatial(mu.describe(), 2);
            CHECK(again.describe() == mu.describe());
            CHECK(again.density(0.8) == mu.density(0.8));
        }
    }

    TEST_CASE("grammar errors carry the column") {
        auto column_of = [](const std::string& s) {
            try {
                parse_density(s);
            } catch (const ParseError& e) {
                return e.column;
            }
            return -1;
        };
        CHECK(column_of("foo:1") == 1);
        CHECK(column_of("riesz:abc") == 7);
        CHECK(column_of("riesz") == 6);
        CHECK(column_of("riesz:0.5x") == 7);
        CHECK(column_of("scaled:-1:riesz:0") > 0);
        // Out-of-range parameters are reported at the number.
        CHECK(column_of("riesz:1.5") == 7);
        CHECK_THROWS_AS(parse_spatial("riesz:3", 2), ParseError);
    }

    TEST_CASE("asymmetric discrete measures are symmetrized with a warning") {
        const SpatialMeasure mu = SpatialMeasure::discrete({{{1.0}, 2.0}}, 1);
        CHECK(mu.warnings().size() == 1);
        double total = 0.0;
        for (const Atom& a : mu.atoms()) total += a.weight;
        CHECK(total == doctest::Approx(2.0));
        const SpatialMeasure sym = SpatialMeasure::discrete({{{1.0}, 1.0}, {{-1.0}, 1.0}}, 1);
        CHECK(sym.warnings().empty());
        CHECK_THROWS_AS(sym.density(1.0), PreconditionError);
    }

    TEST_CASE("Riesz kernel in closed form") {
        // (2 pi)^-1 int |tau|^-g e^{-i tau t} = Gamma(1-g) sin(pi g / 2) |t|^{g-1} / pi.
        for (double g : {0.3, 0.6}) {
            const SpectralDensity1D nu = SpectralDensity1D::riesz(g);
            for (double t : {0.5, 1.0, 4.0}) {
                const double want = std::tgamma(1.0 - g) * std::sin(M_PI * g / 2.0) * std::pow(t, g - 1.0) / M_PI;
                CHECK(kernel_rho(nu, t) == doctest::Approx(want).epsilon(1e-7));
                CHECK(kernel_rho(nu, -t) == doctest::Approx(want).epsilon(1e-7));
            }
        }
        CHECK_THROWS_AS(kernel_rho(SpectralDensity1D::riesz(0.0), 1.0), DivergenceError);
    }

    TEST_CASE("covariance R is symmetric and vanishes at zero") {
        const SpectralDensity1D nu = SpectralDensity1D::bessel(1.0);
        for (auto [t, s] : {std::pair{0.5, 1.5}, {1.0, 3.0}, {2.0, 0.25}}) {
            CHECK(covariance_R(nu, t, s) == doctest::Approx(covariance_R(nu, s, t)).epsilon(1e-8));
            // Cauchy-Schwarz.
            CHECK(covariance_R(nu, t, s) <=
                  std::sqrt(covariance_R(nu, t, t) * covariance_R(nu, s, s)) * (1.0 + 1e-8));
        }
        CHECK(covariance_R(nu, 1.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(fbm_constant(0.5) > 0.0);
        CHECK_THROWS_AS(fbm_constant(1.0), PreconditionError);
    }
}
