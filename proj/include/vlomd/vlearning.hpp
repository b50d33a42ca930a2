#pragma once

#include <span>
#include <vector>

#include "vlomd/bandit.hpp"
#include "vlomd/game.hpp"
#include "vlomd/rng.hpp"

namespace vlomd {

// Decentralized optimistic V-learning agent. Each agent keeps, per (h, s), a
// visit counter, an optimistic value estimate with an exploration bonus, and
// a policy row driven by the stabilized mirror-descent update. The agent sees
// only the state stream and its own actions and rewards.

struct AgentConfig {
    int horizon = 1;
    int num_states = 1;
    int num_actions = 1;
    double bonus_c = 2.0;
    double iota = 1.0;

    bool operator==(const AgentConfig&) const = default;
};

// Log factor iota = log(2 * S * action_bound * total_steps / failure_prob);
// action_bound is the commonly known upper bound on all agents' action-space
// sizes and total_steps = K * H.
double compute_iota(int num_states, int action_bound, long total_steps, double failure_prob);

struct ActResult {
    int action = 0;
    std::vector<double> policy;  // the row used to draw the action
};

struct VisitSnapshot {
    long episode = 0;
    int step = 0;
    int state = 0;
    std::vector<double> policy;
};

class AgentState {
  public:
    explicit AgentState(const AgentConfig& config);

    // Samples an action from the current policy row; the returned snapshot is
    // the row before any update at this step.
    ActResult act(int h, int s, Rng& rng) const;

    // Consumes one transition of the agent's own stream, in order: bump the
    // visit count, refresh the schedules, update the optimistic value, clip,
    // take the mirror-descent step on the policy row, and mix toward uniform.
    void observe(int h, int s, int action, double reward, int next_state);

    std::vector<double> policy_at(int h, int s) const;
    long visit_count(int h, int s) const { return counts_[flat(h, s)]; }
    double value_raw(int h, int s) const { return v_[flat(h, s)]; }
    // Clipped optimistic value; value_clipped(H, s) is 0 by convention.
    double value_clipped(int h, int s) const {
        return h >= cfg_.horizon ? 0.0 : vbar_[flat(h, s)];
    }
    const AgentConfig& config() const { return cfg_; }

    bool operator==(const AgentState&) const = default;

  private:
    std::size_t flat(int h, int s) const {
        return static_cast<std::size_t>(h) * cfg_.num_states + s;
    }
    std::span<double> policy_row(int h, int s) {
        return {theta_.data() + flat(h, s) * cfg_.num_actions,
                static_cast<std::size_t>(cfg_.num_actions)};
    }

    AgentConfig cfg_;
    std::vector<long> counts_;
    std::vector<double> v_;
    std::vector<double> vbar_;
    std::vector<double> theta_;
};

// One recorded visit of a fixed (h, s): the realized reward and the clipped
// next-step value that entered the update.
struct VisitObservation {
    double reward = 0.0;
    double next_value = 0.0;
};

// Recomputes the optimistic value of a (h, s) pair from its full visit log as
// the alpha-weighted sum
//   w0 * (H - h) + sum_i weights[i] * (r_i + next_value_i + bonus_i),
// which must match the incrementally maintained value. `step` is 0-based.
double reconstruct_value(std::span<const VisitObservation> log, const AgentConfig& config,
                         int step);

}  // namespace vlomd
