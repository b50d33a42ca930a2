#pragma once

#include <span>
#include <vector>

#include "vlomd/rng.hpp"

namespace vlomd {

// Adversarial bandit machinery: stabilized online mirror descent with
// importance-weighted losses and implicit exploration, plus the visit-count
// weight schedules shared with the value-learning agent.
//
// The mirror map is the unnormalized negentropy F(x) = sum_a x(a)(log x(a) - 1)
// on the positive orthant. Two facts make the update cheap and exact:
//   - argmin_{x > 0} { eta <x, l> + D_F(x, theta) } = theta(a) * exp(-eta l(a))
//     (stationarity: eta*l + log x - log theta = 0), and
//   - the Bregman projection of a positive vector onto the simplex under this
//     F is plain normalization (the KL projection is scale-invariant up to the
//     simplex constraint: minimizing sum x log(x/y) - x + y over sum x = 1
//     gives x proportional to y).
// Each update finishes by mixing a (1 - mix) fraction of the uniform initial
// point back in, which keeps every Bregman divergence along the run bounded
// under the decreasing learning rate.

// Rate values for visit count t >= 1: the value-learning step size
// alpha = (H+1)/(H+t), the optimism bonus c*sqrt(H^4*A*iota/t), and the
// implicit-exploration / learning rates gamma = eta = sqrt(log(A)/(A*t)).
// Logs are natural throughout.
struct Schedules {
    double alpha;
    double bonus;
    double gamma;
    double eta;
};
Schedules schedules_at(long t, int num_actions, int horizon, double bonus_c, double iota);

// The mixture weights induced by the alpha step size:
//   w0 = prod_{j<=t} (1 - alpha_j),  weights[i-1] = alpha_i prod_{j>i} (1 - alpha_j).
// For t >= 1 the weights sum to 1 and w0 = 0 (alpha_1 = 1); for t = 0 the
// vector is empty and w0 = 1.
struct AlphaWeights {
    double alpha0 = 1.0;
    std::vector<double> weights;
};
AlphaWeights alpha_weights(long t, int horizon);

// Bandit learner state. Value type: updates return a new state.
struct OmdState {
    int num_actions = 0;
    std::vector<double> theta;  // current simplex point
    long round = 1;             // t of the next update
    double prev_weight = 1.0;   // w of the last completed round

    static OmdState initial(int num_actions);
};

int omd_sample(const OmdState& state, Rng& rng);

// One round of the stabilized update given the realized (action, loss) pair,
// the regret weights (w_t, w_{t+1}) and rates (eta_t, eta_{t+1}, gamma_t).
// The stabilization coefficient is mix = eta_{t+1} w_t / (eta_t w_{t+1}) and
// must land in (0, 1]; anything else is a schedule misuse and throws.
// At the final round pass eta_{t+1} = eta_t and w_{t+1} = w_t.
OmdState omd_update(const OmdState& state, int action, double loss, double w_t, double w_next,
                    double eta_t, double eta_next, double gamma_t);

// The update core on a bare simplex row (used by the value-learning agent,
// which owns one row per (h, s)).
void omd_step_in_place(std::span<double> theta, int action, double loss, double eta,
                       double gamma, double mix);

// Stabilization coefficient of the value-learning policy update,
//   lambda_t = eta_{t+1} alpha_t (1 - alpha_{t+1}) / (eta_t alpha_{t+1}),
// which for the standard schedules equals sqrt(t/(t+1)) * t/(H+t).
double vlearning_mixing_coefficient(long t, int horizon, double eta_t, double eta_next);

// One round of an omniscient regret evaluation: the played mixed strategy,
// the full loss vector, and the round's weight.
struct BanditRound {
    std::vector<double> theta;
    std::vector<double> loss;
    double weight = 1.0;
};

// Weighted regret against the best fixed action in hindsight over rounds
// 1..t: sum_i w_i <theta_i - e_{a*}, l_i> with a* minimizing sum_i w_i l_i(a).
double weighted_regret(std::span<const BanditRound> rounds, std::size_t t);

// The full high-probability regret bound evaluated for a weight sequence:
//   2 max_i w_i sqrt(A t iota) + (3/2) sqrt(A iota) sum_i w_i/sqrt(i)
//   + (1/2) max_i w_i iota + sqrt(2 iota sum_i w_i^2).
double weighted_regret_bound(std::span<const double> weights, int num_actions, double iota);

// Exp3: the unit-weight single-step specialization of the learner above, with
// the reward-to-loss convention loss = 1 - reward.
class Exp3 {
  public:
    explicit Exp3(int num_actions);

    int act(Rng& rng) const { return omd_sample(state_, rng); }
    void update(int action, double reward);

    const std::vector<double>& strategy() const { return state_.theta; }
    long rounds_played() const { return state_.round - 1; }

  private:
    OmdState state_;
};

}  // namespace vlomd
