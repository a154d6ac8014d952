// Tests for the closed-form lossy bounds C_1 and C_2.

#include <catch2/catch_amalgamated.hpp>

#include "nlphase/loss_bounds.hpp"

using namespace nlphase;
using Catch::Approx;

namespace {

// Independent extended-precision evaluation of the C_2 polynomial, term by
// term in the ungrouped form, for cross-checking cancellation behavior.
long double cq2_long(const MomentSet& m, double T_) {
    const long double T = T_;
    const long double R = 1.0L - T;
    const long double n1 = m.m1, n2 = m.m2, n3 = m.m3, n4 = m.m4;
    const long double h1 = T * T * T * T * n4 + 6.0L * T * T * T * R * n3 +
                           T * T * R * (7.0L - 11.0L * T) * n2 +
                           T * R * (1.0L - 6.0L * T + 6.0L * T * T) * n1;
    const long double h2 = T * T * T * T * n2 * n2 + 2.0L * T * T * T * R * n1 * n2 +
                           T * T * R * R * n1 * n1;
    return 4.0L * (h1 - h2);
}

std::vector<std::pair<std::string, TwoModeState>> matched_families(const Truncation& t) {
    std::vector<std::pair<std::string, TwoModeState>> out;
    out.emplace_back("noon", noon(4, t));
    out.emplace_back("ecs-", ecs(match_alpha(2.0, Parity::Odd), Parity::Odd, t));
    out.emplace_back("ecs+", ecs(match_alpha(2.0, Parity::Even), Parity::Even, t));
    out.emplace_back("aecs", aecs(match_aecs_alpha0(2.0), t));
    return out;
}

}  // namespace

TEST_CASE("MomentSet and LossModel validation") {
    REQUIRE_NOTHROW(MomentSet(2, 8, 32, 128));
    REQUIRE_THROWS_AS(MomentSet(-1, 8, 32, 128), std::domain_error);
    REQUIRE_THROWS_AS(MomentSet(4, 8, 32, 128), std::domain_error);   // m2 < m1^2
    REQUIRE_THROWS_AS(MomentSet(2, 8, 32, 60), std::domain_error);    // m4 < m2^2
    REQUIRE_NOTHROW(LossModel(0.0));
    REQUIRE_NOTHROW(LossModel(1.0));
    REQUIRE_THROWS_AS(LossModel(-0.01), std::domain_error);
    REQUIRE_THROWS_AS(LossModel(1.01), std::domain_error);
}

TEST_CASE("moments_of closed forms") {
    SECTION("NOON(4) is (2, 8, 32, 128)") {
        const auto m = moments_of(StateSpec::noon(4));
        REQUIRE(m.m1 == Approx(2.0).margin(1e-12));
        REQUIRE(m.m2 == Approx(8.0).margin(1e-12));
        REQUIRE(m.m3 == Approx(32.0).margin(1e-12));
        REQUIRE(m.m4 == Approx(128.0).margin(1e-12));
    }
    SECTION("vacuum sensing mode") {
        const auto m = moments_of(StateSpec::coherent(0.0));
        REQUIRE(m.m1 == Approx(0.0).margin(1e-12));
        REQUIRE(m.m4 == Approx(0.0).margin(1e-12));
    }
    SECTION("ECS- anchor") {
        REQUIRE(moments_of(StateSpec::ecs(1.9807, Parity::Odd)).m1 == Approx(2.0).margin(2e-3));
    }
    SECTION("series path matches the Fock-space path") {
        const auto spec = StateSpec::ecs(1.7, Parity::Even);
        const auto closed = moments_of(spec);
        const Truncation t = adapt_coherent(1.7, 1e-13);
        const auto numeric = moments_of(make_probe(spec, t));
        REQUIRE(closed.m1 == Approx(numeric.m1).epsilon(1e-10));
        REQUIRE(closed.m2 == Approx(numeric.m2).epsilon(1e-10));
        REQUIRE(closed.m3 == Approx(numeric.m3).epsilon(1e-10));
        REQUIRE(closed.m4 == Approx(numeric.m4).epsilon(1e-10));
    }
}

TEST_CASE("cq1") {
    const auto m = moments_of(StateSpec::noon(4));
    REQUIRE(cq1(m, LossModel(1.0)) == Approx(16.0).margin(1e-12));
    REQUIRE(cq1(m, LossModel(0.0)) == Approx(0.0).margin(1e-14));
    // 4 [0.9025 * 4 + 0.0475 * 2] = 14.82
    REQUIRE(cq1(m, LossModel(0.95)) == Approx(14.82).margin(1e-10));
}

TEST_CASE("cq2") {
    const auto m = moments_of(StateSpec::noon(4));
    SECTION("T = 1 reduces to 4 Var(n^2)") {
        REQUIRE(cq2(m, LossModel(1.0)) == Approx(256.0).margin(1e-10));
    }
    SECTION("T = 0 vanishes") { REQUIRE(cq2(m, LossModel(0.0)) == Approx(0.0).margin(1e-14)); }
    SECTION("extended-precision cross-check") {
        const auto me = moments_of(StateSpec::ecs(1.9807, Parity::Odd));
        for (double T : {0.9, 0.95, 0.98, 1.0}) {
            const double d = cq2(me, LossModel(T));
            const long double l = cq2_long(me, T);
            REQUIRE(d == Approx(static_cast<double>(l)).epsilon(1e-12));
        }
    }
}

TEST_CASE("T = 1 algebraic reductions for all matched families") {
    const Truncation t(40, 1e-9);
    for (const auto& [name, s] : matched_families(t)) {
        INFO(name);
        const auto m = moments_of(s);
        const double var1 = 4.0 * (m.m2 - m.m1 * m.m1);
        const double var2 = 4.0 * (m.m4 - m.m2 * m.m2);
        REQUIRE(cq1(m, LossModel(1.0)) == Approx(var1).epsilon(1e-12));
        REQUIRE(cq2(m, LossModel(1.0)) == Approx(var2).epsilon(1e-12));
        REQUIRE(var1 == Approx(pure_qfi(s, 1).qfi).epsilon(1e-10));
        REQUIRE(var2 == Approx(pure_qfi(s, 2).qfi).epsilon(1e-10));
    }
}

TEST_CASE("lossy_sensitivity") {
    const auto m = moments_of(StateSpec::noon(4));
    REQUIRE(lossy_sensitivity(m, LossModel(1.0), 2).delta_phi_bound ==
            Approx(1.0 / 16.0).margin(1e-12));
    REQUIRE(std::isinf(lossy_sensitivity(m, LossModel(0.0), 1).delta_phi_bound));
    REQUIRE_THROWS_AS(lossy_sensitivity(m, LossModel(0.5), 3), std::domain_error);

    SECTION("finite and continuous on (0, 1]") {
        double prev = -1.0;
        for (double T = 0.05; T <= 1.0 + 1e-12; T += 0.05) {
            const auto b = lossy_sensitivity(m, LossModel(std::min(T, 1.0)), 1);
            REQUIRE(b.cq > 0.0);
            REQUIRE(std::isfinite(b.delta_phi_bound));
            if (prev > 0) REQUIRE(std::abs(b.cq - prev) < 4.0);  // no jumps on this grid
            prev = b.cq;
        }
    }
    SECTION("Fig. 6 ordering at spot transmissions") {
        const Truncation t(40, 1e-9);
        const auto fams = matched_families(t);
        for (int k : {1, 2})
            for (double T : {0.90, 0.95, 0.99}) {
                const double noon_dp =
                    lossy_sensitivity(moments_of(fams[0].second), LossModel(T), k)
                        .delta_phi_bound;
                for (size_t i = 1; i < fams.size(); ++i) {
                    INFO(fams[i].first << " k=" << k << " T=" << T);
                    const double dp =
                        lossy_sensitivity(moments_of(fams[i].second), LossModel(T), k)
                            .delta_phi_bound;
                    REQUIRE(dp < noon_dp);
                }
            }
    }
}
