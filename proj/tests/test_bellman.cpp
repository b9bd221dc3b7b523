#include "doctest.h"

#include "drmpi/bellman.hpp"
#include "drmpi/oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <vector>

using namespace drmpi;
using testutil::random_mdp;
using testutil::random_policy;
using testutil::random_value;

namespace {

Policy deterministic_policy(int n_states, int n_actions, const std::vector<int>& choice) {
    Policy pi(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) pi.prob(s, choice[s]) = 1.0;
    return pi;
}

} // namespace

TEST_CASE("apply_bellman with gamma zero reads off the chosen rewards") {
    Rng rng(11);
    TabularMdp mdp = random_mdp(rng, 4, 3, 0.0);
    const Policy pi = deterministic_policy(4, 3, {2, 0, 1, 2});
    const ValueFunction out = apply_bellman(mdp, pi, random_value(rng, 4, 3.0));
    CHECK(out[0] == mdp.r(0, 2));
    CHECK(out[1] == mdp.r(1, 0));
    CHECK(out[2] == mdp.r(2, 1));
    CHECK(out[3] == mdp.r(3, 2));
}

TEST_CASE("apply_bellman is a gamma-contraction") {
    Rng rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        const TabularMdp mdp = random_mdp(rng, 3, 2, 0.9);
        const Policy pi = random_policy(rng, 3, 2);
        const ValueFunction v1 = random_value(rng, 3, 10.0);
        const ValueFunction v2 = random_value(rng, 3, 10.0);
        ValueFunction d(3);
        for (int s = 0; s < 3; ++s) d[s] = v1[s] - v2[s];
        CHECK(sup_distance(apply_bellman(mdp, pi, v1), apply_bellman(mdp, pi, v2)) <=
              0.9 * sup_norm(d) + 1e-12);
    }
}

TEST_CASE("apply_bellman matches direct summation with uniform policy") {
    Rng rng(13);
    const TabularMdp mdp = random_mdp(rng, 5, 3, 0.9);
    Policy uniform(5, 3);
    for (int s = 0; s < 5; ++s) {
        for (int a = 0; a < 3; ++a) uniform.prob(s, a) = 1.0 / 3.0;
    }
    const ValueFunction out = apply_bellman(mdp, uniform, ValueFunction(5, 0.0));
    for (int s = 0; s < 5; ++s) {
        double expect = 0.0;
        for (int a = 0; a < 3; ++a) expect += mdp.r(s, a) / 3.0;
        CHECK(out[s] == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("bellman_optimality closed forms") {
    SUBCASE("single action equals the policy operator") {
        Rng rng(14);
        const TabularMdp mdp = random_mdp(rng, 4, 1, 0.8);
        const Policy only = deterministic_policy(4, 1, {0, 0, 0, 0});
        const ValueFunction v = random_value(rng, 4, 2.0);
        const ValueFunction a = bellman_optimality(mdp, v);
        const ValueFunction b = apply_bellman(mdp, only, v);
        for (int s = 0; s < 4; ++s) CHECK(a[s] == b[s]);
    }
    SUBCASE("zero value gives the per-state best reward") {
        Rng rng(15);
        const TabularMdp mdp = random_mdp(rng, 4, 3, 0.95);
        const ValueFunction out = bellman_optimality(mdp, ValueFunction(4, 0.0));
        for (int s = 0; s < 4; ++s) {
            double best = mdp.r(s, 0);
            for (int a = 1; a < 3; ++a) best = std::max(best, mdp.r(s, a));
            CHECK(out[s] == doctest::Approx(best).epsilon(1e-15));
        }
    }
}

TEST_CASE("bellman_optimality equals the max over deterministic policies") {
    Rng rng(16);
    const int n_states = 5, n_actions = 3;
    const TabularMdp mdp = random_mdp(rng, n_states, n_actions, 0.9);
    const ValueFunction v = random_value(rng, n_states, 4.0);
    const ValueFunction star = bellman_optimality(mdp, v);

    ValueFunction best(n_states, -1e300);
    std::vector<int> choice(n_states, 0);
    long total = 1;
    for (int s = 0; s < n_states; ++s) total *= n_actions;
    for (long code = 0; code < total; ++code) {
        long rest = code;
        for (int s = 0; s < n_states; ++s) {
            choice[s] = static_cast<int>(rest % n_actions);
            rest /= n_actions;
        }
        const ValueFunction out = apply_bellman(mdp, deterministic_policy(n_states, n_actions, choice), v);
        for (int s = 0; s < n_states; ++s) best[s] = std::max(best[s], out[s]);
    }
    for (int s = 0; s < n_states; ++s) CHECK(star[s] == doctest::Approx(best[s]).epsilon(1e-12));
}

TEST_CASE("greedy_policy basics") {
    Rng rng(17);
    const TabularMdp mdp = random_mdp(rng, 5, 3, 0.9);
    const ValueFunction v = random_value(rng, 5, 3.0);
    const Policy greedy = greedy_policy(mdp, v);
    const QFunction q = q_from_v(mdp, v);

    SUBCASE("never selects a dominated action and achieves the optimality backup") {
        const ValueFunction star = bellman_optimality(mdp, v);
        const ValueFunction got = apply_bellman(mdp, greedy, v);
        for (int s = 0; s < 5; ++s) {
            CHECK(std::abs(got[s] - star[s]) <= 1e-12);
            for (int a = 0; a < 3; ++a) {
                if (greedy.prob(s, a) == 1.0) {
                    CHECK(q.q(s, a) == doctest::Approx(star[s]).epsilon(1e-13));
                }
            }
        }
    }
    SUBCASE("exact ties resolve to the lowest action index") {
        TabularMdp tie(1, 3, 0.0, 1.0);
        tie.p(0, 0, 0) = tie.p(0, 1, 0) = tie.p(0, 2, 0) = 1.0;
        tie.r(0, 0) = 0.25;
        tie.r(0, 1) = 1.0;
        tie.r(0, 2) = 1.0;
        const Policy pick = greedy_policy(tie, ValueFunction{0.0});
        CHECK(pick.prob(0, 1) == 1.0);
        CHECK(pick.prob(0, 2) == 0.0);
    }
}

TEST_CASE("greedy_policy at the optimal value recovers an optimal policy") {
    Rng rng(18);
    const TabularMdp mdp = random_mdp(rng, 6, 3, 0.9);
    const ValueFunction v_star = oracles::value_iteration_reference(mdp, 1e-12);
    const Policy greedy = greedy_policy(mdp, v_star);
    CHECK(sup_distance(exact_policy_value(mdp, greedy), v_star) < 1e-8);
}

TEST_CASE("greedy_policy ignores state-dependent constant shifts of Q") {
    Rng rng(19);
    const TabularMdp mdp = random_mdp(rng, 5, 3, 0.9);
    const ValueFunction v = random_value(rng, 5, 3.0);
    TabularMdp shifted = mdp;
    Rng shift_rng(20);
    for (int s = 0; s < 5; ++s) {
        const double c = 10.0 * (shift_rng.uniform01() - 0.5);
        for (int a = 0; a < 3; ++a) shifted.r(s, a) += c;
    }
    shifted.r_max = 0.0;
    for (double r : shifted.reward) shifted.r_max = std::max(shifted.r_max, std::abs(r));
    const Policy a = greedy_policy(mdp, v);
    const Policy b = greedy_policy(shifted, v);
    for (std::size_t i = 0; i < a.probs.size(); ++i) CHECK(a.probs[i] == b.probs[i]);
}

TEST_CASE("run_mpi with m=1 reproduces the value iteration trace") {
    Rng rng(21);
    const TabularMdp mdp = random_mdp(rng, 5, 3, 0.9);
    MpiConfig cfg;
    cfg.m = 1;
    cfg.max_iterations = 40;
    cfg.convergence_tol = 1e-300;
    const ValueFunction v0(5, 0.0);
    const std::vector<MpiStep> steps = run_mpi(mdp, cfg, v0);
    REQUIRE(steps.size() == 40);
    ValueFunction v = v0;
    for (const MpiStep& step : steps) {
        v = bellman_optimality(mdp, v);
        for (int s = 0; s < 5; ++s) CHECK(step.value[s] == doctest::Approx(v[s]).epsilon(1e-14));
    }
}

TEST_CASE("run_mpi with infinite m is policy iteration") {
    Rng rng(22);
    const TabularMdp mdp = random_mdp(rng, 5, 3, 0.9);
    MpiConfig cfg;
    cfg.m = MpiConfig::kMInfinity;
    cfg.max_iterations = 100;
    cfg.convergence_tol = 1e-13;
    const std::vector<MpiStep> steps = run_mpi(mdp, cfg, ValueFunction(5, 0.0));
    // Policy iteration on 5 states / 3 actions switches policies at most S*A times.
    CHECK(steps.size() <= 15 + 1);
    const ValueFunction v_star = oracles::value_iteration_reference(mdp, 1e-12);
    CHECK(sup_distance(steps.back().value, v_star) < 1e-9);
    // Each iterate solves its own policy exactly.
    for (const MpiStep& step : steps) {
        CHECK(sup_distance(step.value, exact_policy_value(mdp, step.policy)) < 1e-10);
    }
}

TEST_CASE("run_mpi error decays at the geometric rate") {
    Rng rng(23);
    const TabularMdp mdp = random_mdp(rng, 6, 3, 0.9);
    const ValueFunction v_star = oracles::value_iteration_reference(mdp, 1e-12);
    const double r_bound = mdp.r_max / (1.0 - mdp.gamma);
    const ValueFunction v0(6, -r_bound);
    MpiConfig cfg;
    cfg.m = 1;
    cfg.max_iterations = 60;
    cfg.convergence_tol = 1e-300;
    const std::vector<MpiStep> steps = run_mpi(mdp, cfg, v0);
    ValueFunction d0(6);
    for (int s = 0; s < 6; ++s) d0[s] = v0[s] - v_star[s];
    const int n = static_cast<int>(steps.size());
    const double bound = 2.0 * std::pow(mdp.gamma, n) / (1.0 - mdp.gamma) * sup_norm(d0);
    CHECK(sup_distance(steps.back().value, v_star) <= bound + 1e-12);
}

TEST_CASE("run_mpi iterates approach the optimum monotonically from below") {
    Rng rng(24);
    const TabularMdp mdp = random_mdp(rng, 5, 3, 0.85);
    const ValueFunction v_star = oracles::value_iteration_reference(mdp, 1e-12);
    MpiConfig cfg;
    cfg.m = 2;
    cfg.max_iterations = 50;
    cfg.convergence_tol = 1e-300;
    const ValueFunction v0(5, -mdp.r_max / (1.0 - mdp.gamma));
    const std::vector<MpiStep> steps = run_mpi(mdp, cfg, v0);
    double prev = 1e300;
    for (const MpiStep& step : steps) {
        const double err = sup_distance(step.value, v_star);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
}

TEST_CASE("regularized_bellman entropy bonus") {
    Rng rng(25);
    const TabularMdp mdp = random_mdp(rng, 4, 2, 0.9);
    const ValueFunction v = random_value(rng, 4, 2.0);

    SUBCASE("alpha zero equals the plain operator") {
        const Policy pi = random_policy(rng, 4, 2);
        const ValueFunction a = regularized_bellman(mdp, pi, v, 0.0);
        const ValueFunction b = apply_bellman(mdp, pi, v);
        for (int s = 0; s < 4; ++s) CHECK(a[s] == doctest::Approx(b[s]).epsilon(1e-15));
    }
    SUBCASE("deterministic policy has no entropy bonus") {
        const Policy pi = deterministic_policy(4, 2, {1, 0, 1, 0});
        const ValueFunction a = regularized_bellman(mdp, pi, v, 0.7);
        const ValueFunction b = apply_bellman(mdp, pi, v);
        for (int s = 0; s < 4; ++s) CHECK(a[s] == doctest::Approx(b[s]).epsilon(1e-15));
    }
    SUBCASE("uniform two-action policy adds alpha log 2") {
        Policy pi(4, 2);
        for (int s = 0; s < 4; ++s) pi.prob(s, 0) = pi.prob(s, 1) = 0.5;
        const ValueFunction a = regularized_bellman(mdp, pi, v, 0.7);
        const ValueFunction b = apply_bellman(mdp, pi, v);
        for (int s = 0; s < 4; ++s) {
            CHECK(a[s] == doctest::Approx(b[s] + 0.7 * std::log(2.0)).epsilon(1e-14));
        }
    }
}

TEST_CASE("both operators are monotone") {
    Rng rng(26);
    for (int trial = 0; trial < 200; ++trial) {
        const TabularMdp mdp = random_mdp(rng, 4, 3, 0.9);
        const Policy pi = random_policy(rng, 4, 3);
        const ValueFunction v1 = random_value(rng, 4, 3.0);
        ValueFunction v2 = v1;
        for (int s = 0; s < 4; ++s) v2[s] += rng.uniform01();
        const ValueFunction a1 = apply_bellman(mdp, pi, v1);
        const ValueFunction a2 = apply_bellman(mdp, pi, v2);
        const ValueFunction b1 = bellman_optimality(mdp, v1);
        const ValueFunction b2 = bellman_optimality(mdp, v2);
        for (int s = 0; s < 4; ++s) {
            CHECK(a1[s] <= a2[s] + 1e-12);
            CHECK(b1[s] <= b2[s] + 1e-12);
        }
    }
}

TEST_CASE("bellman_optimality is a gamma-contraction") {
    Rng rng(27);
    for (int trial = 0; trial < 1000; ++trial) {
        const TabularMdp mdp = random_mdp(rng, 3, 2, 0.92);
        const ValueFunction v1 = random_value(rng, 3, 10.0);
        const ValueFunction v2 = random_value(rng, 3, 10.0);
        ValueFunction d(3);
        for (int s = 0; s < 3; ++s) d[s] = v1[s] - v2[s];
        CHECK(sup_distance(bellman_optimality(mdp, v1), bellman_optimality(mdp, v2)) <=
              0.92 * sup_norm(d) + 1e-12);
    }
}

TEST_CASE("MpiConfig validation") {
    MpiConfig cfg;
    cfg.m = 0;
    CHECK_THROWS(validate_config(cfg));
    cfg.m = 1;
    cfg.max_iterations = 0;
    CHECK_THROWS(validate_config(cfg));
    cfg.max_iterations = 10;
    cfg.convergence_tol = 0.0;
    CHECK_THROWS(validate_config(cfg));
    cfg.convergence_tol = 1e-9;
    cfg.tie_break = "coin-flip";
    CHECK_THROWS(validate_config(cfg));
}
