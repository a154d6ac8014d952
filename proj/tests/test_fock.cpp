// Tests for the truncated-Fock-space core: states, inner products,
// beam splitter, partial trace, moments, annihilation.

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "nlphase/states.hpp"

using namespace nlphase;
using Catch::Approx;

TEST_CASE("Truncation validates its fields") {
    REQUIRE_NOTHROW(Truncation(0, 1e-12));
    REQUIRE_THROWS_AS(Truncation(-1, 1e-12), std::invalid_argument);
    REQUIRE_THROWS_AS(Truncation(4, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(Truncation(4, 1.5), std::invalid_argument);
    REQUIRE(Truncation(7, 1e-9).dim() == 8);
}

TEST_CASE("inner_product basics") {
    const Truncation t(10, 1e-6);
    REQUIRE(std::abs(inner_product(vacuum(t), vacuum(t)) - complexd(1, 0)) < 1e-14);
    REQUIRE(std::abs(inner_product(fock_state(0, t), fock_state(1, t))) < 1e-14);

    SECTION("coherent self-overlap is 1 at tight tail") {
        const Truncation tc = adapt_coherent(1.0, 1e-14);
        const auto c = coherent(1.0, tc);
        REQUIRE(std::abs(inner_product(c, c) - complexd(1, 0)) < 1e-12);
    }
    SECTION("conjugate symmetry") {
        const auto a = coherent(0.7, t);
        const auto b = css(0.9, Parity::Even, t);
        REQUIRE(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))) < 1e-14);
    }
    SECTION("mismatched truncation rejected") {
        REQUIRE_THROWS_AS(inner_product(vacuum(t), vacuum(Truncation(11, 1e-6))),
                          std::invalid_argument);
    }
}

TEST_CASE("fidelity basics") {
    const Truncation t(12, 1e-6);
    const auto a = coherent(0.8, t);
    REQUIRE(fidelity(a, a) == Approx(1.0).margin(1e-12));
    REQUIRE(fidelity(fock_state(0, t), fock_state(1, t)) == Approx(0.0).margin(1e-14));

    SECTION("ACSS vs ideal odd cat at alpha0 = 1.4") {
        const double a0 = 1.4;
        const Truncation tt(40, 1e-9);
        const double f = fidelity(acss_closed_form(aecs_squeezing(a0), tt),
                                  css(a0, Parity::Odd, tt));
        REQUIRE(f > 0.97);
        REQUIRE(f <= 1.0 + 1e-12);
        REQUIRE(f == Approx(0.974474).margin(1e-4));
    }
}

TEST_CASE("tensor product") {
    const Truncation t(8, 1e-6);
    SECTION("vacuum x vacuum") {
        const auto s = tensor(vacuum(t), vacuum(t));
        REQUIRE(std::abs(s.coeffs()(0, 0) - complexd(1, 0)) < 1e-14);
    }
    SECTION("|1> x |2>") {
        const auto s = tensor(fock_state(1, t), fock_state(2, t));
        REQUIRE(std::abs(s.coeffs()(1, 2) - complexd(1, 0)) < 1e-14);
    }
    SECTION("norm of coherent product") {
        const Truncation tc(30, 1e-9);
        const auto s = tensor(coherent(1.0, tc), coherent(2.0, tc));
        REQUIRE(detail::squared_norm(s.coeffs()) == Approx(1.0).margin(1e-10));
    }
}

TEST_CASE("beam splitter") {
    const Truncation t(12, 1e-6);

    SECTION("eta = 1 is the identity") {
        const auto s = tensor(coherent(1.0, t), fock_state(1, t));
        REQUIRE(fidelity(beam_splitter(s, 1.0), s) == Approx(1.0).margin(1e-12));
    }
    SECTION("single photon splits at eta = 1/2") {
        const auto o = beam_splitter(tensor(fock_state(1, t), vacuum(t)), 0.5);
        REQUIRE(std::abs(o.coeffs()(1, 0)) == Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
        REQUIRE(std::abs(o.coeffs()(0, 1)) == Approx(1.0 / std::sqrt(2.0)).margin(1e-12));
    }
    SECTION("coherent inputs stay coherent; equal inputs empty port 2") {
        const Truncation tc(30, 1e-10);
        const auto o = beam_splitter(tensor(coherent(1.0, tc), coherent(1.0, tc)), 0.5);
        const auto target = tensor(coherent(std::sqrt(2.0), tc), vacuum(tc));
        REQUIRE(fidelity(o, target) > 1.0 - 1e-10);
    }
    SECTION("unitarity and sector preservation on seeded random states") {
        std::mt19937 rng(98765);
        std::normal_distribution<double> g;
        for (int rep = 0; rep < 4; ++rep) {
            Mat c = Mat::Zero(t.dim(), t.dim());
            for (int i = 0; i < t.dim(); ++i)
                for (int j = 0; i + j <= t.cutoff; ++j) c(i, j) = complexd(g(rng), g(rng));
            const TwoModeState s(c, t);
            const auto o = beam_splitter(s, 0.15 + 0.2 * rep);
            REQUIRE(detail::squared_norm(o.coeffs()) == Approx(1.0).margin(1e-10));
            for (int M = 0; M <= t.cutoff; ++M) {
                double pin = 0, pout = 0;
                for (int m = 0; m <= M; ++m) {
                    pin += std::norm(s.coeffs()(m, M - m));
                    pout += std::norm(o.coeffs()(m, M - m));
                }
                REQUIRE(pout == Approx(pin).margin(1e-10));
            }
        }
    }
    SECTION("inverse via mode swap returns the input") {
        const auto s = tensor(coherent(1.0, t), fock_state(1, t));
        const auto once = beam_splitter(s, 0.5);
        const TwoModeState swapped(once.coeffs().transpose().eval(), t);
        const auto back = beam_splitter(swapped, 0.5);
        const TwoModeState restored(back.coeffs().transpose().eval(), t);
        REQUIRE(fidelity(restored, s) > 1.0 - 1e-10);
    }
    SECTION("eta outside [0,1] rejected") {
        const auto s = tensor(vacuum(t), vacuum(t));
        REQUIRE_THROWS_AS(beam_splitter(s, -0.1), std::invalid_argument);
        REQUIRE_THROWS_AS(beam_splitter(s, 1.1), std::invalid_argument);
    }
    SECTION("tail overflow is reported") {
        // all mass at the corner: any mixing pushes it past the cutoff
        const auto s = tensor(fock_state(t.cutoff, t), fock_state(t.cutoff, t));
        REQUIRE_THROWS_AS(beam_splitter(s, 0.5), truncation_error);
    }
}

TEST_CASE("partial trace") {
    const Truncation t(8, 1e-6);
    SECTION("product state keep mode 2") {
        const auto rho = partial_trace(tensor(fock_state(0, t), fock_state(1, t)), 2);
        REQUIRE(std::abs(rho.entries()(1, 1) - complexd(1, 0)) < 1e-12);
        REQUIRE(std::abs(rho.entries()(0, 0)) < 1e-12);
    }
    SECTION("NOON(2) reduced state") {
        const auto rho = partial_trace(noon(2, t), 2);
        REQUIRE(std::abs(rho.entries()(0, 0) - complexd(0.5, 0)) < 1e-12);
        REQUIRE(std::abs(rho.entries()(1, 1)) < 1e-12);
        REQUIRE(std::abs(rho.entries()(2, 2) - complexd(0.5, 0)) < 1e-12);
    }
    SECTION("trace preserved for ECS") {
        const Truncation tc(25, 1e-9);
        const auto rho = partial_trace(ecs(1.0, Parity::Even, tc), 2);
        REQUIRE(rho.eigenvalues().sum() == Approx(1.0).margin(1e-10));
    }
    SECTION("pure product reduction is pure") {
        const Truncation tc(25, 1e-9);
        const auto rho = partial_trace(tensor(coherent(1.0, tc), css(0.8, Parity::Even, tc)), 1);
        REQUIRE(rho.eigenvalues().maxCoeff() == Approx(1.0).margin(1e-9));
    }
    SECTION("invalid mode index") {
        REQUIRE_THROWS_AS(partial_trace(noon(2, t), 3), std::invalid_argument);
    }
}

TEST_CASE("number_moment") {
    const Truncation t(10, 1e-6);
    REQUIRE(number_moment(tensor(fock_state(0, t), fock_state(3, t)), 2, 2) ==
            Approx(9.0).margin(1e-12));
    REQUIRE(number_moment(noon(4, t), 2, 1) == Approx(2.0).margin(1e-12));
    const Truncation tc = adapt_coherent(1.5);
    REQUIRE(number_moment(tensor(vacuum(tc), coherent(1.5, tc)), 2, 1) ==
            Approx(2.25).margin(1e-9));
    REQUIRE(number_moment(noon(4, t), 2, 0) == 1.0);
    REQUIRE_THROWS_AS(number_moment(noon(4, t), 2, -1), std::invalid_argument);
    REQUIRE_THROWS_AS(number_moment(noon(4, t), 3, 1), std::invalid_argument);
}

TEST_CASE("annihilate") {
    const Truncation t(10, 1e-6);
    SECTION("|1> -> |0> with weight 1") {
        const auto r = annihilate(fock_state(1, t));
        REQUIRE(r.weight == Approx(1.0).margin(1e-12));
        REQUIRE(fidelity(r.normalized(), vacuum(t)) == Approx(1.0).margin(1e-12));
    }
    SECTION("vacuum has zero weight") {
        const auto r = annihilate(vacuum(t));
        REQUIRE(r.weight == Approx(0.0).margin(1e-14));
        REQUIRE_THROWS_AS(r.normalized(), std::domain_error);
    }
    SECTION("coherent states are annihilation eigenstates") {
        const Truncation tc = adapt_coherent(1.0, 1e-13);
        const auto c = coherent(1.0, tc);
        REQUIRE(fidelity(annihilate(c).normalized(), c) == Approx(1.0).margin(1e-10));
    }
    SECTION("weight equals the mean photon number") {
        const Truncation tc = adapt_coherent(1.3, 1e-13);
        const auto c = coherent(1.3, tc);
        REQUIRE(annihilate(c).weight == Approx(number_moment(c, 1)).margin(1e-10));
    }
}

TEST_CASE("DensityMatrix validation") {
    const Truncation t(2, 1e-6);
    Eigen::MatrixXcd good(3, 3);
    good.setZero();
    good(0, 0) = 0.5;
    good(1, 1) = 0.5;
    REQUIRE_NOTHROW(DensityMatrix(good, t));

    Eigen::MatrixXcd nonherm = good;
    nonherm(0, 1) = complexd(0.3, 0.0);
    REQUIRE_THROWS_AS(DensityMatrix(nonherm, t), std::invalid_argument);

    Eigen::MatrixXcd badtrace = good;
    badtrace(0, 0) = 0.9;
    REQUIRE_THROWS_AS(DensityMatrix(badtrace, t), truncation_error);
}
