#include "vlomd/vlearning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vlomd {

double compute_iota(int num_states, int action_bound, long total_steps, double failure_prob) {
    if (num_states < 1 || action_bound < 1 || total_steps < 1)
        throw std::invalid_argument("compute_iota: bad dimensions");
    if (!(failure_prob > 0.0 && failure_prob <= 1.0))
        throw std::invalid_argument("compute_iota: failure_prob must lie in (0,1]");
    return std::log(2.0 * num_states * action_bound * static_cast<double>(total_steps) /
                    failure_prob);
}

AgentState::AgentState(const AgentConfig& config) : cfg_(config) {
    if (cfg_.horizon < 1 || cfg_.num_states < 1 || cfg_.num_actions < 1)
        throw std::invalid_argument("AgentState: bad dimensions");
    if (!(cfg_.bonus_c > 0.0) || !(cfg_.iota > 0.0))
        throw std::invalid_argument("AgentState: bonus_c and iota must be positive");
    const std::size_t cells = static_cast<std::size_t>(cfg_.horizon) * cfg_.num_states;
    counts_.assign(cells, 0);
    v_.resize(cells);
    vbar_.resize(cells);
    for (int h = 0; h < cfg_.horizon; ++h) {
        for (int s = 0; s < cfg_.num_states; ++s) {
            v_[flat(h, s)] = cfg_.horizon - h;  // optimistic init H - h + 1 (1-based h)
            vbar_[flat(h, s)] = cfg_.horizon - h;
        }
    }
    theta_.assign(cells * cfg_.num_actions, 1.0 / cfg_.num_actions);
}

ActResult AgentState::act(int h, int s, Rng& rng) const {
    ActResult out;
    out.policy = policy_at(h, s);
    out.action = rng.categorical(out.policy);
    return out;
}

std::vector<double> AgentState::policy_at(int h, int s) const {
    if (h < 0 || h >= cfg_.horizon || s < 0 || s >= cfg_.num_states)
        throw std::out_of_range("policy_at: (h, s) out of range");
    const double* row = theta_.data() + flat(h, s) * cfg_.num_actions;
    return {row, row + cfg_.num_actions};
}

void AgentState::observe(int h, int s, int action, double reward, int next_state) {
    if (h < 0 || h >= cfg_.horizon || s < 0 || s >= cfg_.num_states)
        throw std::out_of_range("observe: (h, s) out of range");
    if (action < 0 || action >= cfg_.num_actions)
        throw std::out_of_range("observe: action out of range");
    if (!(reward >= 0.0 && reward <= 1.0))
        throw std::invalid_argument("observe: reward must lie in [0,1]");
    if (next_state < 0 || next_state >= cfg_.num_states)
        throw std::out_of_range("observe: next_state out of range");

    const long t = ++counts_[flat(h, s)];
    const Schedules sch =
        schedules_at(t, cfg_.num_actions, cfg_.horizon, cfg_.bonus_c, cfg_.iota);
    const double next_value = value_clipped(h + 1, next_state);

    // Optimistic value update with the exploration bonus, then clipping.
    v_[flat(h, s)] = (1.0 - sch.alpha) * v_[flat(h, s)] +
                     sch.alpha * (reward + next_value + sch.bonus);
    vbar_[flat(h, s)] = std::min(v_[flat(h, s)], static_cast<double>(cfg_.horizon - h));

    if (cfg_.num_actions == 1)
        return;

    // Mirror-descent step on the policy row. The loss is scaled by 1/H to lie
    // in [0,1] before the importance weighting.
    const double loss = (cfg_.horizon - reward - next_value) / cfg_.horizon;
    const double eta_next =
        schedules_at(t + 1, cfg_.num_actions, cfg_.horizon, cfg_.bonus_c, cfg_.iota).eta;
    const double lambda = vlearning_mixing_coefficient(t, cfg_.horizon, sch.eta, eta_next);
    omd_step_in_place(policy_row(h, s), action, loss, sch.eta, sch.gamma, lambda);
}

double reconstruct_value(std::span<const VisitObservation> log, const AgentConfig& config,
                         int step) {
    if (step < 0 || step >= config.horizon)
        throw std::out_of_range("reconstruct_value: step out of range");
    const long t = static_cast<long>(log.size());
    const AlphaWeights w = alpha_weights(t, config.horizon);
    double value = w.alpha0 * (config.horizon - step);
    for (long i = 1; i <= t; ++i) {
        const double bonus =
            schedules_at(i, config.num_actions, config.horizon, config.bonus_c, config.iota)
                .bonus;
        value += w.weights[i - 1] * (log[i - 1].reward + log[i - 1].next_value + bonus);
    }
    return value;
}

}  // namespace vlomd
