#include <doctest.h>

#include <cmath>

#include "diffpath/model.hpp"
#include "oracles.hpp"

using namespace diffpath;

namespace {

const transmission_model kExp{model_family::exponential, 1.0};
const transmission_model kRay{model_family::rayleigh, 1.0};
const transmission_model kPow{model_family::power_law, 1.0};

cascade make_cascade(std::vector<cascade_event> events, double window) {
    return cascade("test", std::move(events), window);
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("cascade invariants are enforced") {
    CHECK_THROWS_AS(make_cascade({}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_cascade({{0, 1.0}, {1, 0.5}}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(make_cascade({{0, 0.0}, {0, 1.0}}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(make_cascade({{0, 0.0}, {1, 3.0}}, 2.0), std::invalid_argument);
    const cascade ok = make_cascade({{0, 0.0}, {1, 1.5}}, 2.0);
    CHECK(ok.start_time() == 0.0);
    CHECK(ok.horizon() == 2.0);
    CHECK(ok.time_of(1) == 1.5);
    CHECK(!ok.time_of(7).has_value());
}

TEST_CASE("rate_snapshot rejects self-loops and non-positive rates") {
    rate_snapshot snap;
    CHECK_THROWS_AS(snap.set(3, 3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(snap.set(0, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(snap.set(0, 1, -2.0), std::invalid_argument);
    snap.set(0, 1, 0.5);
    CHECK(snap.rate(0, 1) == 0.5);
    CHECK(snap.rate(1, 0) == 0.0);
}

TEST_CASE("log survival closed forms") {
    CHECK(log_survival(kExp, 1.0, 3.0, 0.5) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(log_survival(kRay, 0.0, 3.0, 2.0) == doctest::Approx(-9.0).epsilon(1e-12));
    CHECK(log_survival(kPow, 0.0, std::exp(1.0), 2.0) == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK_THROWS_AS(log_survival(kExp, 3.0, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(log_survival(kPow, 0.0, 0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(log_survival(kExp, 0.0, 1.0, -1.0), std::domain_error);
}

TEST_CASE("hazard closed forms") {
    CHECK(hazard(kExp, 4.0, 9.0, 0.7) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(hazard(kRay, 0.0, 3.0, 2.0) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(hazard(kPow, 0.0, 4.0, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(hazard(kExp, 0.0, 1.0, 0.0) == 0.0);
    CHECK(hazard(kRay, 0.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("transmission density closed forms and zero branches") {
    CHECK(transmission_density(kExp, 0.0, 1.0, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(transmission_density(kExp, 2.0, 1.0, 1.0) == 0.0);
    CHECK(transmission_density(kRay, 0.0, 1.0, 1.0) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(transmission_density(kPow, 0.0, 0.5, 2.0) == 0.0);
    CHECK(transmission_density(kPow, 0.0, 1.0, 2.0) == 0.0);  // boundary of the support
}

TEST_CASE("density equals hazard times survival") {
    rng r(17);
    for (const auto& m : {kExp, kRay, kPow}) {
        for (int i = 0; i < 200; ++i) {
            const double alpha = r.uniform(0.05, 4.0);
            const double dt = (m.family == model_family::power_law ? m.delta : 0.0) +
                              r.uniform(0.01, 5.0);
            const double f = transmission_density(m, 0.0, dt, alpha);
            const double hs = hazard(m, 0.0, dt, alpha) *
                              std::exp(log_survival(m, 0.0, dt, alpha));
            CHECK(f == doctest::Approx(hs).epsilon(1e-12));
        }
    }
}

TEST_CASE("cascade negative log-likelihood, two nodes") {
    const cascade c = make_cascade({{0, 0.0}, {1, 1.0}}, 2.0);
    rate_snapshot rates;
    rates.set(0, 1, 1.0);
    CHECK(cascade_neg_log_likelihood(c, rates, kExp) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cascade negative log-likelihood with uninfected node") {
    const cascade c = make_cascade({{0, 0.0}, {1, 1.0}}, 2.0);
    rate_snapshot rates;
    rates.set(0, 1, 1.0);
    rates.set(1, 2, 1.0);
    rates.set(0, 2, 1.0);
    CHECK(cascade_neg_log_likelihood(c, rates, kExp) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("root-only cascade has zero negative log-likelihood") {
    const cascade c = make_cascade({{0, 0.0}}, 2.0);
    rate_snapshot rates;
    rates.set(5, 6, 1.0);  // no stored pair touches the cascade
    CHECK(cascade_neg_log_likelihood(c, rates, kExp) == 0.0);
}

TEST_CASE("unexplained infection is signaled") {
    const cascade c = make_cascade({{0, 0.0}, {1, 1.0}}, 2.0);
    rate_snapshot rates;
    rates.set(1, 0, 1.0);  // wrong direction: node 1 has no parent
    CHECK_THROWS_AS(cascade_neg_log_likelihood(c, rates, kExp), unexplained_infection);
}

TEST_CASE("gradient for infected targets") {
    rate_snapshot one;
    one.set(0, 1, 1.0);
    CHECK(grad_edge_infected(kExp, make_cascade({{0, 0.0}, {1, 1.0}}, 2.0), 0, 1, one) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(grad_edge_infected(kExp, make_cascade({{0, 0.0}, {1, 2.0}}, 3.0), 0, 1, one) ==
          doctest::Approx(1.0).epsilon(1e-12));

    rate_snapshot quarter;
    quarter.set(0, 1, 0.25);
    CHECK(grad_edge_infected(kRay, make_cascade({{0, 0.0}, {1, 2.0}}, 3.0), 0, 1, quarter) ==
          doctest::Approx(-2.0).epsilon(1e-12));

    CHECK_THROWS_AS(
        grad_edge_infected(kExp, make_cascade({{0, 0.0}, {1, 1.0}}, 2.0), 1, 0, one),
        std::domain_error);
}

TEST_CASE("gradient for uninfected targets") {
    CHECK(grad_edge_uninfected(kExp, 0.5, 2.0) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(grad_edge_uninfected(kRay, 0.0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(grad_edge_uninfected(kPow, 0.0, std::exp(1.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(grad_edge_uninfected(kExp, 2.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(grad_edge_uninfected(kPow, 0.0, 0.5), std::domain_error);
}

TEST_CASE("node total hazard") {
    const cascade c = make_cascade({{0, 0.0}, {1, 1.0}, {2, 2.0}}, 4.0);
    rate_snapshot empty;
    CHECK(node_total_hazard(c, 2, 2.0, empty, kExp) == 0.0);

    rate_snapshot exp_rates;
    exp_rates.set(0, 2, 0.3);
    exp_rates.set(1, 2, 0.7);
    CHECK(node_total_hazard(c, 2, 2.0, exp_rates, kExp) ==
          doctest::Approx(1.0).epsilon(1e-12));

    rate_snapshot ray_rates;
    ray_rates.set(0, 2, 1.0);
    ray_rates.set(1, 2, 1.0);
    CHECK(node_total_hazard(c, 2, 2.0, ray_rates, kRay) ==
          doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("hazard is additive over parents and homogeneous in the rate") {
    const cascade c = make_cascade({{0, 0.0}, {1, 0.5}, {2, 1.2}, {3, 2.0}}, 4.0);
    for (const auto& m : {kExp, kRay, kPow}) {
        rate_snapshot all;
        rate_snapshot first;
        rate_snapshot second;
        all.set(0, 3, 0.4);
        all.set(1, 3, 0.9);
        all.set(2, 3, 1.3);
        first.set(0, 3, 0.4);
        second.set(1, 3, 0.9);
        second.set(2, 3, 1.3);
        const double joint = node_total_hazard(c, 3, 2.0, all, m);
        const double split = node_total_hazard(c, 3, 2.0, first, m) +
                             node_total_hazard(c, 3, 2.0, second, m);
        CHECK(joint == doctest::Approx(split).epsilon(1e-12));

        rate_snapshot scaled;
        for (const auto& [k, v] : all.rates()) {
            const auto [s, d] = edge_nodes(k);
            scaled.set(s, d, 2.5 * v);
        }
        CHECK(node_total_hazard(c, 3, 2.0, scaled, m) ==
              doctest::Approx(2.5 * joint).epsilon(1e-12));
    }
}

TEST_CASE("analytic cascade gradient matches finite differences") {
    for (const auto& m : {kExp, kRay, transmission_model{model_family::power_law, 0.5}}) {
        for (int trial = 0; trial < 40; ++trial) {
            const auto inst = oracle::make_instance(m, 1000 + trial);
            std::unordered_map<std::uint64_t, double> analytic;
            for (const auto& g : cascade_gradient(inst.casc, inst.rates, m))
                analytic[edge_key(g.src, g.dst)] = g.value;
            for (const auto& [key, alpha] : inst.rates.rates()) {
                const auto [s, d] = edge_nodes(key);
                const double fd = oracle::fd_gradient(inst.casc, inst.rates, m, s, d);
                auto it = analytic.find(key);
                const double a = it == analytic.end() ? 0.0 : it->second;
                CHECK(std::abs(a - fd) <= 1e-5 * std::max(1.0, std::abs(a)));
            }
        }
    }
}

TEST_CASE("hazard rearrangement agrees with the first-parent mixture") {
    for (const auto& m : {kExp, kRay, transmission_model{model_family::power_law, 0.5}}) {
        for (int trial = 0; trial < 30; ++trial) {
            const auto inst = oracle::make_instance(m, 5000 + trial);
            const double via_hazard = cascade_neg_log_likelihood(inst.casc, inst.rates, m);
            const double via_mixture = oracle::nll_mixture_route(inst.casc, inst.rates, m);
            CHECK(via_hazard == doctest::Approx(via_mixture).epsilon(1e-9));
        }
    }
}

TEST_CASE("negative log-likelihood is convex in the rates") {
    for (const auto& m : {kExp, kRay, transmission_model{model_family::power_law, 0.5}}) {
        for (int trial = 0; trial < 60; ++trial) {
            const auto inst = oracle::make_instance(m, 9000 + trial);
            rng r(777 + trial);
            rate_snapshot a1 = inst.rates;
            rate_snapshot a2;
            for (const auto& [key, v] : a1.rates()) {
                const auto [s, d] = edge_nodes(key);
                a2.set(s, d, r.uniform(0.05, 3.0));
            }
            const double lambda = r.uniform(0.05, 0.95);
            rate_snapshot mix;
            for (const auto& [key, v] : a1.rates()) {
                const auto [s, d] = edge_nodes(key);
                mix.set(s, d, lambda * v + (1.0 - lambda) * a2.rate(s, d));
            }
            const double lhs = cascade_neg_log_likelihood(inst.casc, mix, m);
            const double rhs = lambda * cascade_neg_log_likelihood(inst.casc, a1, m) +
                               (1.0 - lambda) * cascade_neg_log_likelihood(inst.casc, a2, m);
            CHECK(lhs <= rhs + 1e-9);
        }
    }
}

TEST_CASE("raising a rate toward an uninfected target never lowers the objective") {
    const cascade c = make_cascade({{0, 0.0}, {1, 1.0}}, 3.0);
    for (const auto& m : {kExp, kRay, transmission_model{model_family::power_law, 0.5}}) {
        double prev = -1e300;
        for (double a = 0.25; a <= 4.0; a += 0.25) {
            rate_snapshot rates;
            rates.set(0, 1, 1.0);
            rates.set(1, 2, a);  // node 2 stays uninfected
            const double nll = cascade_neg_log_likelihood(c, rates, m);
            CHECK(nll >= prev - 1e-12);
            prev = nll;
        }
    }
}

}  // TEST_SUITE
