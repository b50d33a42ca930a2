#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "bandit_experiments.hpp"
#include "vlomd/bandit.hpp"
#include "vlomd/rng.hpp"

using namespace vlomd;

TEST_SUITE_BEGIN("bandit");

TEST_CASE("schedules: closed-form values") {
    CHECK(schedules_at(1, 2, 1, 2.0, 1.0).alpha == 1.0);
    CHECK(schedules_at(2, 2, 1, 2.0, 1.0).alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    const Schedules s = schedules_at(1, 2, 1, 2.0, 1.0);
    CHECK(s.gamma == doctest::Approx(0.5887050112577373).epsilon(1e-12));
    CHECK(s.eta == s.gamma);
    // bonus = c * sqrt(H^4 A iota / t)
    const Schedules b = schedules_at(4, 3, 2, 1.5, 2.0);
    CHECK(b.bonus == doctest::Approx(1.5 * std::sqrt(16.0 * 3.0 * 2.0 / 4.0)).epsilon(1e-14));
    CHECK_THROWS_AS(schedules_at(0, 2, 1, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("alpha_weights: boundary and hand values") {
    const AlphaWeights w0 = alpha_weights(0, 3);
    CHECK(w0.alpha0 == 1.0);
    CHECK(w0.weights.empty());

    const AlphaWeights w2 = alpha_weights(2, 1);
    REQUIRE(w2.weights.size() == 2);
    CHECK(w2.alpha0 == 0.0);
    CHECK(w2.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(w2.weights[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    for (int horizon : {1, 2, 5}) {
        for (long t : {1L, 7L, 100L, 1234L}) {
            const AlphaWeights w = alpha_weights(t, horizon);
            CHECK(w.alpha0 == 0.0);
            const double sum = std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(*std::min_element(w.weights.begin(), w.weights.end()) >= 0.0);
        }
    }
}

TEST_CASE("alpha weight properties over a sweep of t") {
    // Incremental recursions: appending round t scales all previous weights by
    // (1 - alpha_t), so the summary statistics update in O(1) per round.
    for (int horizon : {1, 2, 5}) {
        double sum = 0.0, sum_isqrt = 0.0, sum_sq = 0.0, max_w = 0.0;
        for (long t = 1; t <= 2000; ++t) {
            const double alpha = static_cast<double>(horizon + 1) / (horizon + t);
            sum = (1.0 - alpha) * sum + alpha;
            sum_isqrt = (1.0 - alpha) * sum_isqrt + alpha / std::sqrt(static_cast<double>(t));
            sum_sq = (1.0 - alpha) * (1.0 - alpha) * sum_sq + alpha * alpha;
            max_w = std::max((1.0 - alpha) * max_w, alpha);
            const double rt = std::sqrt(static_cast<double>(t));
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(sum_isqrt >= 1.0 / rt - 1e-9);
            CHECK(sum_isqrt <= 2.0 / rt + 1e-9);
            CHECK(max_w <= 2.0 * horizon / t + 1e-9);
            CHECK(sum_sq <= 2.0 * horizon / t + 1e-9);
        }
        // Spot-check the incremental statistics against the direct construction.
        const AlphaWeights w = alpha_weights(2000, horizon);
        double direct_sq = 0.0;
        for (double x : w.weights)
            direct_sq += x * x;
        CHECK(direct_sq == doctest::Approx(sum_sq).epsilon(1e-12));
        CHECK(*std::max_element(w.weights.begin(), w.weights.end()) ==
              doctest::Approx(max_w).epsilon(1e-12));
    }
}

TEST_CASE("alpha weight partial sums rise toward 1 + 1/H without exceeding it") {
    for (int horizon : {1, 2, 5}) {
        for (long i : {1L, 3L, 10L}) {
            double w = static_cast<double>(horizon + 1) / (horizon + i);  // alpha_i
            double partial = w, prev = 0.0;
            for (long t = i + 1; t <= 20000; ++t) {
                prev = partial;
                w *= 1.0 - static_cast<double>(horizon + 1) / (horizon + t);
                partial += w;
                CHECK(partial >= prev);
            }
            CHECK(partial <= 1.0 + 1.0 / horizon + 1e-9);
        }
    }
}

TEST_CASE("omd_sample: degenerate, uniform, reproducible") {
    OmdState point = OmdState::initial(4);
    point.theta = {1.0, 0.0, 0.0, 0.0};
    Rng rng(3);
    for (int i = 0; i < 50; ++i)
        CHECK(omd_sample(point, rng) == 0);

    const OmdState uniform = OmdState::initial(4);
    Rng rng2(4);
    std::vector<long> counts(4, 0);
    const long n = 100000;
    for (long i = 0; i < n; ++i)
        ++counts[omd_sample(uniform, rng2)];
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    for (int a = 0; a < 4; ++a)
        CHECK(std::abs(counts[a] / static_cast<double>(n) - 0.25) <= 3.0 * sigma);

    Rng ra(99), rb(99);
    for (int i = 0; i < 100; ++i)
        CHECK(omd_sample(uniform, ra) == omd_sample(uniform, rb));
}

TEST_CASE("omd_update: zero loss on a uniform point is the identity") {
    const OmdState state = OmdState::initial(3);
    const Schedules s = schedules_at(1, 3, 1, 2.0, 1.0);
    const Schedules s2 = schedules_at(2, 3, 1, 2.0, 1.0);
    const OmdState next = omd_update(state, 1, 0.0, 1.0, 1.0, s.eta, s2.eta, s.gamma);
    for (int a = 0; a < 3; ++a)
        CHECK(next.theta[a] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(next.round == 2);
}

TEST_CASE("omd_update: pinned hand-evaluated step") {
    // A=2, theta=(1/2,1/2), played arm 0 with loss 1, eta = gamma =
    // sqrt(ln2/2), no stabilization mixing (unit weights, eta_next = eta).
    OmdState state = OmdState::initial(2);
    const double eta = std::sqrt(std::log(2.0) / 2.0);
    const OmdState next = omd_update(state, 0, 1.0, 1.0, 1.0, eta, eta, eta);

    // Independent re-derivation of the three formulas.
    const double lhat = 1.0 / (0.5 + eta);
    const double tilde0 = 0.5 * std::exp(-eta * lhat);
    const double z = tilde0 + 0.5;
    CHECK(next.theta[0] == doctest::Approx(tilde0 / z).epsilon(1e-15));
    CHECK(next.theta[1] == doctest::Approx(0.5 / z).epsilon(1e-15));
    // Frozen regression values.
    CHECK(next.theta[0] == doctest::Approx(0.3680157417240378).epsilon(1e-12));
    CHECK(next.theta[1] == doctest::Approx(0.6319842582759622).epsilon(1e-12));
}

TEST_CASE("omd step: mixing is a convex combination with the uniform point") {
    // Post-normalization point (1, 0) mixed with coefficient 1/2 gives (3/4, 1/4).
    std::vector<double> theta = {1.0, 0.0};
    omd_step_in_place(theta, 0, 0.0, 0.5, 0.5, 0.5);
    CHECK(theta[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(theta[1] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("omd_update: mixing coefficient outside (0,1] fails fast") {
    const OmdState state = OmdState::initial(2);
    const double eta = 0.1;
    CHECK_THROWS_AS(omd_update(state, 0, 0.5, 1.0, 0.4, eta, eta, eta),
                    std::invalid_argument);  // mix = 2.5
    CHECK_THROWS_AS(omd_update(state, 0, 0.5, 1.0, 1.0, eta, eta, -eta),
                    std::invalid_argument);  // loss fine, mix negative
}

TEST_CASE("omd updates preserve the simplex and keep every arm alive") {
    Rng rng(77);
    for (int num_actions : {2, 5}) {
        OmdState state = OmdState::initial(num_actions);
        for (long t = 1; t <= 500; ++t) {
            const double eta =
                std::sqrt(std::log(static_cast<double>(num_actions)) / (num_actions * t));
            const double eta_next = std::sqrt(std::log(static_cast<double>(num_actions)) /
                                              (num_actions * (t + 1)));
            const int action = omd_sample(state, rng);
            const double loss = rng.uniform01();
            state = omd_update(state, action, loss, 1.0, 1.0, eta, eta_next, eta);
            const double sum = std::accumulate(state.theta.begin(), state.theta.end(), 0.0);
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            const double mix = eta_next / eta;
            const double floor = (1.0 - mix) / num_actions;
            for (double p : state.theta) {
                CHECK(p > 0.0);
                CHECK(p >= floor - 1e-15);
            }
        }
    }
}

TEST_CASE("closed-form mirror step matches a generic projected solver") {
    // Solve argmin_{x in simplex} eta*<x, lhat> + D_F(x, theta) by projected
    // gradient descent with a Euclidean simplex projection, and compare.
    auto project_simplex = [](std::vector<double> v) {
        std::vector<double> u = v;
        std::sort(u.begin(), u.end(), std::greater<double>());
        double css = 0.0, tau = 0.0;
        int rho = 0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            css += u[j];
            const double trial = (css - 1.0) / static_cast<double>(j + 1);
            if (u[j] - trial > 0.0) {
                rho = static_cast<int>(j + 1);
                tau = trial;
            }
        }
        (void)rho;
        for (double& x : v)
            x = std::max(0.0, x - tau);
        return v;
    };

    Rng rng(123);
    for (int num_actions : {2, 3, 5}) {
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> theta(num_actions);
            double sum = 0.0;
            for (double& p : theta) {
                p = 0.05 + rng.uniform01();
                sum += p;
            }
            for (double& p : theta)
                p /= sum;
            const int action = rng.uniform_int(num_actions);
            const double gamma = 0.2, eta = 0.3;
            std::vector<double> lhat(num_actions, 0.0);
            lhat[action] = rng.uniform01() / (theta[action] + gamma);

            // Closed form: exponential reweighting + normalization, no mixing.
            std::vector<double> closed = theta;
            omd_step_in_place(closed, action, lhat[action] * (theta[action] + gamma), eta,
                              gamma, 1.0);

            // Generic solver on f(x) = eta<x,l> + sum x log(x/theta) - x + theta.
            std::vector<double> x(num_actions, 1.0 / num_actions);
            for (int it = 0; it < 20000; ++it) {
                std::vector<double> g(num_actions);
                for (int a = 0; a < num_actions; ++a) {
                    const double xa = std::max(x[a], 1e-300);
                    g[a] = eta * lhat[a] + std::log(xa) - std::log(theta[a]);
                }
                for (int a = 0; a < num_actions; ++a)
                    x[a] -= 0.01 * g[a];
                x = project_simplex(x);
            }
            for (int a = 0; a < num_actions; ++a)
                CHECK(x[a] == doctest::Approx(closed[a]).epsilon(2e-5));
        }
    }
}

TEST_CASE("vlearning mixing coefficient: pinned value, closed form, range, limit") {
    const double eta1 = std::sqrt(std::log(2.0) / 2.0);
    const double eta2 = std::sqrt(std::log(2.0) / 4.0);
    CHECK(vlearning_mixing_coefficient(1, 1, eta1, eta2) ==
          doctest::Approx(0.3535533905932738).epsilon(1e-12));

    double prev = 0.0;
    for (int horizon : {1, 2, 5}) {
        prev = 0.0;
        for (long t : {1L, 2L, 5L, 10L, 100L, 10000L, 1000000L}) {
            const double eta_t = std::sqrt(std::log(2.0) / (2 * t));
            const double eta_next = std::sqrt(std::log(2.0) / (2 * (t + 1)));
            const double lambda = vlearning_mixing_coefficient(t, horizon, eta_t, eta_next);
            const double closed = std::sqrt(static_cast<double>(t) / (t + 1)) *
                                  static_cast<double>(t) / (horizon + t);
            CHECK(lambda == doctest::Approx(closed).epsilon(1e-12));
            CHECK(lambda > 0.0);
            CHECK(lambda <= 1.0);
            CHECK(lambda > prev);
            prev = lambda;
        }
        CHECK(prev > 1.0 - 2e-6 * (horizon + 1));  // approaches 1 from below
    }
}

TEST_CASE("weighted_regret: optimal play, indifference, hand example") {
    SUBCASE("playing the hindsight-best pure arm gives zero regret") {
        std::vector<BanditRound> rounds(3);
        for (auto& r : rounds) {
            r.theta = {0.0, 1.0};
            r.loss = {1.0, 0.25};
            r.weight = 0.5;
        }
        CHECK(weighted_regret(rounds, 3) == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("identical losses across arms give zero regret") {
        std::vector<BanditRound> rounds(4);
        Rng rng(5);
        for (auto& r : rounds) {
            const double p = rng.uniform01();
            r.theta = {p, 1.0 - p};
            r.loss = {0.6, 0.6};
            r.weight = 1.0;
        }
        CHECK(weighted_regret(rounds, 4) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("two half-half rounds against (1,0) losses cost 1") {
        std::vector<BanditRound> rounds(2);
        for (auto& r : rounds) {
            r.theta = {0.5, 0.5};
            r.loss = {1.0, 0.0};
            r.weight = 1.0;
        }
        CHECK(weighted_regret(rounds, 2) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("weight ratio identity: alpha weights enter only through ratios") {
    for (int horizon : {1, 3}) {
        for (long t : {5L, 17L}) {
            const AlphaWeights w = alpha_weights(t, horizon);
            for (long i = 1; i < t; ++i) {
                const double alpha_i = static_cast<double>(horizon + 1) / (horizon + i);
                const double alpha_next = static_cast<double>(horizon + 1) / (horizon + i + 1);
                const double ratio = alpha_i * (1.0 - alpha_next) / alpha_next;
                CHECK(w.weights[i - 1] / w.weights[i] ==
                      doctest::Approx(ratio).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("schedule admissibility: eta <= 2 gamma and mixing in (0,1]") {
    for (long t = 1; t <= 1000; ++t) {
        const Schedules s = schedules_at(t, 3, 2, 2.0, 5.0);
        CHECK(s.eta <= 2.0 * s.gamma + 1e-15);
        const Schedules next = schedules_at(t + 1, 3, 2, 2.0, 5.0);
        const double lambda = vlearning_mixing_coefficient(t, 2, s.eta, next.eta);
        CHECK(lambda > 0.0);
        CHECK(lambda <= 1.0);
    }
}

TEST_CASE("exp3: a constantly rewarding arm takes over") {
    auto run = [](long rounds) {
        Exp3 learner(3);
        Rng rng(11);
        for (long t = 0; t < rounds; ++t) {
            const int a = learner.act(rng);
            learner.update(a, a == 0 ? 1.0 : 0.0);
        }
        return learner.strategy()[0];
    };
    const double early = run(100);
    const double late = run(10000);
    CHECK(late > early);
    CHECK(late > 0.9);  // measured 0.987 at this seed; pinned loosely
}

TEST_CASE("exp3: stochastic two-arm bandit keeps average regret under 0.1") {
    const double means[2] = {0.9, 0.1};
    const long rounds = 10000;
    Exp3 learner(2);
    Rng rng(21), reward_rng(22);
    double expected_regret = 0.0;
    for (long t = 0; t < rounds; ++t) {
        const auto& theta = learner.strategy();
        expected_regret += means[0] - (theta[0] * means[0] + theta[1] * means[1]);
        const int a = learner.act(rng);
        const double r = reward_rng.uniform01() < means[a] ? 1.0 : 0.0;
        learner.update(a, r);
    }
    CHECK(expected_regret / rounds < 0.1);
}

TEST_CASE("exp3: realized regret obeys the unit-weight bound on >= 95/100 seeds") {
    int holds = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const auto res = testutil::run_regret_experiment(
            2, 500, 1000 + seed, /*alpha_weighted=*/false, 1,
            testutil::alternating_losses(25));
        if (res.regret <= res.bound)
            ++holds;
    }
    CHECK(holds >= 95);
}

TEST_SUITE_END();
