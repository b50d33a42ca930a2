#include "vlomd/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vlomd {

Schedules schedules_at(long t, int num_actions, int horizon, double bonus_c, double iota) {
    if (t < 1)
        throw std::invalid_argument("schedules_at: t must be >= 1");
    if (num_actions < 1 || horizon < 1)
        throw std::invalid_argument("schedules_at: bad dimensions");
    Schedules s;
    s.alpha = static_cast<double>(horizon + 1) / (horizon + t);
    const double h4 = static_cast<double>(horizon) * horizon * horizon * horizon;
    s.bonus = bonus_c * std::sqrt(h4 * num_actions * iota / t);
    s.gamma = std::sqrt(std::log(static_cast<double>(num_actions)) / (num_actions * t));
    s.eta = s.gamma;
    return s;
}

AlphaWeights alpha_weights(long t, int horizon) {
    if (t < 0)
        throw std::invalid_argument("alpha_weights: t must be >= 0");
    AlphaWeights out;
    out.weights.resize(t);
    // Suffix products of (1 - alpha_j): weights[i-1] = alpha_i * suffix(i+1..t).
    double suffix = 1.0;
    for (long i = t; i >= 1; --i) {
        const double alpha_i = static_cast<double>(horizon + 1) / (horizon + i);
        out.weights[i - 1] = alpha_i * suffix;
        suffix *= 1.0 - alpha_i;
    }
    out.alpha0 = suffix;  // prod_{j=1}^t (1 - alpha_j); empty product = 1
    return out;
}

OmdState OmdState::initial(int num_actions) {
    if (num_actions < 1)
        throw std::invalid_argument("OmdState: num_actions must be positive");
    OmdState s;
    s.num_actions = num_actions;
    s.theta.assign(num_actions, 1.0 / num_actions);
    s.round = 1;
    s.prev_weight = 1.0;
    return s;
}

int omd_sample(const OmdState& state, Rng& rng) {
    return rng.categorical(state.theta);
}

void omd_step_in_place(std::span<double> theta, int action, double loss, double eta,
                       double gamma, double mix) {
    const int num_actions = static_cast<int>(theta.size());
    if (action < 0 || action >= num_actions)
        throw std::out_of_range("omd_step: action out of range");
    if (!(loss >= 0.0 && loss <= 1.0))
        throw std::invalid_argument("omd_step: loss must lie in [0,1]");
    if (num_actions == 1) {
        theta[0] = 1.0;  // nothing to learn
        return;
    }
    if (!(mix > 0.0 && mix <= 1.0 + 1e-12))
        throw std::invalid_argument("omd_step: mixing coefficient " + std::to_string(mix) +
                                    " outside (0,1]; schedule misuse");
    mix = std::min(mix, 1.0);

    // Implicit-exploration loss estimate, nonzero only at the played action.
    const double lhat = loss / (theta[action] + gamma);
    // Mirror step in closed form, then Bregman projection = normalization.
    theta[action] *= std::exp(-eta * lhat);
    const double sum = compensated_sum({theta.data(), theta.size()});
    const double uniform = 1.0 / num_actions;
    for (double& x : theta)
        x = mix * (x / sum) + (1.0 - mix) * uniform;
}

OmdState omd_update(const OmdState& state, int action, double loss, double w_t, double w_next,
                    double eta_t, double eta_next, double gamma_t) {
    OmdState next = state;
    if (state.num_actions == 1) {
        next.round = state.round + 1;
        next.prev_weight = w_next;
        return next;
    }
    if (!(w_t > 0.0) || !(w_next > 0.0))
        throw std::invalid_argument("omd_update: weights must be positive");
    const double mix = eta_next * w_t / (eta_t * w_next);
    omd_step_in_place(next.theta, action, loss, eta_t, gamma_t, mix);
    next.round = state.round + 1;
    next.prev_weight = w_next;
    return next;
}

double vlearning_mixing_coefficient(long t, int horizon, double eta_t, double eta_next) {
    if (t < 1)
        throw std::invalid_argument("vlearning_mixing_coefficient: t must be >= 1");
    const double alpha_t = static_cast<double>(horizon + 1) / (horizon + t);
    const double alpha_next = static_cast<double>(horizon + 1) / (horizon + t + 1);
    return eta_next * alpha_t * (1.0 - alpha_next) / (eta_t * alpha_next);
}

double weighted_regret(std::span<const BanditRound> rounds, std::size_t t) {
    if (t > rounds.size())
        throw std::invalid_argument("weighted_regret: t exceeds trajectory length");
    if (t == 0)
        return 0.0;
    const std::size_t num_actions = rounds[0].theta.size();
    std::vector<double> cumulative(num_actions, 0.0);
    double played = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        const BanditRound& r = rounds[i];
        if (r.theta.size() != num_actions || r.loss.size() != num_actions)
            throw std::invalid_argument("weighted_regret: mismatched round lengths");
        for (std::size_t a = 0; a < num_actions; ++a) {
            cumulative[a] += r.weight * r.loss[a];
            played += r.weight * r.theta[a] * r.loss[a];
        }
    }
    const double best = *std::min_element(cumulative.begin(), cumulative.end());
    return played - best;
}

double weighted_regret_bound(std::span<const double> weights, int num_actions, double iota) {
    const std::size_t t = weights.size();
    double max_w = 0.0, sum_w_isqrt = 0.0, sum_w_sq = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        max_w = std::max(max_w, weights[i]);
        sum_w_isqrt += weights[i] / std::sqrt(static_cast<double>(i + 1));
        sum_w_sq += weights[i] * weights[i];
    }
    return 2.0 * max_w * std::sqrt(static_cast<double>(num_actions) * t * iota) +
           1.5 * std::sqrt(num_actions * iota) * sum_w_isqrt + 0.5 * max_w * iota +
           std::sqrt(2.0 * iota * sum_w_sq);
}

Exp3::Exp3(int num_actions) : state_(OmdState::initial(num_actions)) {}

void Exp3::update(int action, double reward) {
    if (!(reward >= 0.0 && reward <= 1.0))
        throw std::invalid_argument("Exp3::update: reward must lie in [0,1]");
    const long t = state_.round;
    const int a_count = state_.num_actions;
    const double eta_t = std::sqrt(std::log(static_cast<double>(a_count)) / (a_count * t));
    const double eta_next =
        std::sqrt(std::log(static_cast<double>(a_count)) / (a_count * (t + 1)));
    state_ = omd_update(state_, action, 1.0 - reward, /*w_t=*/1.0, /*w_next=*/1.0, eta_t,
                        eta_next, /*gamma_t=*/eta_t);
}

}  // namespace vlomd
