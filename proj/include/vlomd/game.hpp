#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vlomd/rng.hpp"

namespace vlomd {

// Tabular episodic N-player general-sum Markov game.
//
// Conventions (used consistently across the project):
//   - steps h are 0-based, h in [0, H);
//   - states s in [0, S), actions of agent i in [0, A_i);
//   - joint actions are flattened with agent 0 as the most significant digit:
//       ja = sum_i a_i * prod_{j>i} A_j;
//   - rewards are deterministic per (h, s, ja) and must lie in [0, 1];
//   - transition rows are probability vectors over next states.
struct MarkovGame {
    int num_agents = 0;
    int horizon = 0;
    int num_states = 0;
    std::vector<int> action_counts;
    int initial_state = 0;
    std::vector<double> rewards;      // ((h*S + s)*JA + ja)*N + agent
    std::vector<double> transitions;  // ((h*S + s)*JA + ja)*S + next_state

    int num_joint_actions() const {
        int ja = 1;
        for (int a : action_counts)
            ja *= a;
        return ja;
    }

    std::size_t cell_index(int h, int s, int ja) const {
        return (static_cast<std::size_t>(h) * num_states + s) * num_joint_actions() + ja;
    }

    double reward(int h, int s, int ja, int agent) const {
        return rewards[cell_index(h, s, ja) * num_agents + agent];
    }
    double& reward_ref(int h, int s, int ja, int agent) {
        return rewards[cell_index(h, s, ja) * num_agents + agent];
    }
    double transition(int h, int s, int ja, int next_state) const {
        return transitions[cell_index(h, s, ja) * num_states + next_state];
    }
    double& transition_ref(int h, int s, int ja, int next_state) {
        return transitions[cell_index(h, s, ja) * num_states + next_state];
    }
    std::span<const double> transition_row(int h, int s, int ja) const {
        return {transitions.data() + cell_index(h, s, ja) * num_states,
                static_cast<std::size_t>(num_states)};
    }

    int joint_action_index(std::span<const int> actions) const;
    std::vector<int> decode_joint_action(int ja) const;

    // Allocates zeroed reward/transition tables for the current dimensions.
    void allocate();

    // Renormalizes every transition row whose sum is within `tolerance` of 1.
    // Rows further out are left as-is for validate_game to report.
    void normalize_transitions(double tolerance = 1e-9);
};

// Per-agent Markov policy: a point on the action simplex for every (h, s).
struct MarkovPolicy {
    int owner = 0;
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> probs;  // (h*S + s)*A + a

    static MarkovPolicy uniform(int owner, int horizon, int num_states, int num_actions);

    double prob(int h, int s, int a) const {
        return probs[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double& prob_ref(int h, int s, int a) {
        return probs[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    std::span<const double> row(int h, int s) const {
        return {probs.data() + (static_cast<std::size_t>(h) * num_states + s) * num_actions,
                static_cast<std::size_t>(num_actions)};
    }
};

// Exact state values per (h, s); value(H, s) is 0 by convention.
struct ValueTable {
    int horizon = 0;
    int num_states = 0;
    std::vector<double> values;  // h*S + s, h in [0, H)

    ValueTable() = default;
    ValueTable(int horizon, int num_states)
        : horizon(horizon),
          num_states(num_states),
          values(static_cast<std::size_t>(horizon) * num_states, 0.0) {}

    double value(int h, int s) const {
        if (h >= horizon)
            return 0.0;
        return values[static_cast<std::size_t>(h) * num_states + s];
    }
    double& value_ref(int h, int s) {
        return values[static_cast<std::size_t>(h) * num_states + s];
    }
};

struct EpisodeStep {
    int state = 0;
    std::vector<int> actions;
    std::vector<double> rewards;
    int next_state = 0;
};
using EpisodeRecord = std::vector<EpisodeStep>;

// Decentralized actor interface: an actor is shown the step, the state, its
// own action, its own reward and the next state. There is no channel through
// which it could see another agent's action or reward.
class Actor {
  public:
    virtual ~Actor() = default;
    virtual int act(int h, int s) = 0;
    virtual void observe(int /*h*/, int /*s*/, int /*action*/, double /*reward*/,
                         int /*next_state*/) {}
};

// Plays a fixed Markov policy using its own rng stream.
class PolicyActor : public Actor {
  public:
    PolicyActor(const MarkovPolicy& policy, Rng& rng) : policy_(&policy), rng_(&rng) {}
    int act(int h, int s) override { return rng_->categorical(policy_->row(h, s)); }

  private:
    const MarkovPolicy* policy_;
    Rng* rng_;
};

// Optional stochastic-reward hook: given the deterministic mean it returns the
// realized reward. Default (empty function) keeps rewards deterministic.
using RewardSampler =
    std::function<double(int h, int s, int ja, int agent, double mean, Rng& rng)>;

// Returns the list of violated invariants; empty iff the game is well-formed.
std::vector<std::string> validate_game(const MarkovGame& game);

// Simulates one episode. Each actor is queried through the Actor interface
// only, so agents cannot observe one another; environment randomness
// (transitions, optional reward noise) comes from env_rng.
EpisodeRecord sample_episode(const MarkovGame& game, std::span<Actor* const> actors,
                             Rng& env_rng, const RewardSampler& reward_sampler = {});

// Exact Bellman evaluation of a joint Markov policy, one value table per agent.
std::vector<ValueTable> evaluate_joint_policy(const MarkovGame& game,
                                              const std::vector<MarkovPolicy>& policies);

// Exact best response of `agent` against the other agents' fixed policies.
// Deterministic argmax policy, ties broken toward the lowest action index.
std::pair<MarkovPolicy, ValueTable> best_response(const MarkovGame& game, int agent,
                                                  const std::vector<MarkovPolicy>& policies);

// Per-agent gap: best-response value minus on-path value at (h=0, s_1).
std::vector<double> ne_gap(const MarkovGame& game, const std::vector<MarkovPolicy>& policies);

}  // namespace vlomd
