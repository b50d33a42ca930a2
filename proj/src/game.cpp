#include "vlomd/game.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vlomd {

int MarkovGame::joint_action_index(std::span<const int> actions) const {
    if (static_cast<int>(actions.size()) != num_agents)
        throw std::invalid_argument("joint_action_index: wrong number of actions");
    int ja = 0;
    for (int i = 0; i < num_agents; ++i) {
        if (actions[i] < 0 || actions[i] >= action_counts[i])
            throw std::out_of_range("joint_action_index: action out of range");
        ja = ja * action_counts[i] + actions[i];
    }
    return ja;
}

std::vector<int> MarkovGame::decode_joint_action(int ja) const {
    std::vector<int> actions(num_agents);
    for (int i = num_agents - 1; i >= 0; --i) {
        actions[i] = ja % action_counts[i];
        ja /= action_counts[i];
    }
    return actions;
}

void MarkovGame::allocate() {
    const std::size_t cells =
        static_cast<std::size_t>(horizon) * num_states * num_joint_actions();
    rewards.assign(cells * num_agents, 0.0);
    transitions.assign(cells * num_states, 0.0);
}

void MarkovGame::normalize_transitions(double tolerance) {
    const int ja_count = num_joint_actions();
    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < num_states; ++s) {
            for (int ja = 0; ja < ja_count; ++ja) {
                double* row = transitions.data() + cell_index(h, s, ja) * num_states;
                const double sum =
                    compensated_sum({row, static_cast<std::size_t>(num_states)});
                if (sum > 0.0 && std::abs(sum - 1.0) <= tolerance && sum != 1.0) {
                    for (int s2 = 0; s2 < num_states; ++s2)
                        row[s2] /= sum;
                }
            }
        }
    }
}

MarkovPolicy MarkovPolicy::uniform(int owner, int horizon, int num_states, int num_actions) {
    MarkovPolicy p;
    p.owner = owner;
    p.horizon = horizon;
    p.num_states = num_states;
    p.num_actions = num_actions;
    p.probs.assign(static_cast<std::size_t>(horizon) * num_states * num_actions,
                   1.0 / num_actions);
    return p;
}

namespace {

std::string cell_name(int h, int s, int ja) {
    std::ostringstream os;
    os << "(h=" << h + 1 << ", s=" << s << ", ja=" << ja << ")";
    return os.str();
}

void check_policies(const MarkovGame& game, const std::vector<MarkovPolicy>& policies) {
    if (static_cast<int>(policies.size()) != game.num_agents)
        throw std::invalid_argument("expected one policy per agent");
    for (int i = 0; i < game.num_agents; ++i) {
        const MarkovPolicy& p = policies[i];
        if (p.horizon != game.horizon || p.num_states != game.num_states ||
            p.num_actions != game.action_counts[i])
            throw std::invalid_argument("policy dimensions do not match the game");
    }
}

}  // namespace

std::vector<std::string> validate_game(const MarkovGame& game) {
    std::vector<std::string> report;
    if (game.num_agents < 1)
        report.push_back("num_agents must be positive");
    if (game.horizon < 1)
        report.push_back("horizon must be positive");
    if (game.num_states < 1)
        report.push_back("num_states must be positive");
    if (static_cast<int>(game.action_counts.size()) != game.num_agents)
        report.push_back("action_counts must have one entry per agent");
    for (std::size_t i = 0; i < game.action_counts.size(); ++i) {
        if (game.action_counts[i] < 1)
            report.push_back("action_counts[" + std::to_string(i) + "] must be positive");
    }
    if (!report.empty())
        return report;  // sizes below would be meaningless

    if (game.initial_state < 0 || game.initial_state >= game.num_states)
        report.push_back("initial_state out of range");

    const int ja_count = game.num_joint_actions();
    const std::size_t cells =
        static_cast<std::size_t>(game.horizon) * game.num_states * ja_count;
    if (game.rewards.size() != cells * game.num_agents) {
        report.push_back("rewards table has wrong size");
        return report;
    }
    if (game.transitions.size() != cells * game.num_states) {
        report.push_back("transitions table has wrong size");
        return report;
    }

    for (int h = 0; h < game.horizon; ++h) {
        for (int s = 0; s < game.num_states; ++s) {
            for (int ja = 0; ja < ja_count; ++ja) {
                for (int i = 0; i < game.num_agents; ++i) {
                    const double r = game.reward(h, s, ja, i);
                    if (!(r >= 0.0 && r <= 1.0)) {
                        report.push_back("reward " + std::to_string(r) + " for agent " +
                                         std::to_string(i) + " at " + cell_name(h, s, ja) +
                                         " outside [0,1]");
                    }
                }
                double sum = 0.0;
                bool negative = false;
                for (int s2 = 0; s2 < game.num_states; ++s2) {
                    const double p = game.transition(h, s, ja, s2);
                    if (p < 0.0)
                        negative = true;
                    sum += p;
                }
                if (negative)
                    report.push_back("negative transition probability at " + cell_name(h, s, ja));
                if (std::abs(sum - 1.0) > 1e-12)
                    report.push_back("transition row at " + cell_name(h, s, ja) + " sums to " +
                                     std::to_string(sum) + ", expected 1");
            }
        }
    }
    return report;
}

EpisodeRecord sample_episode(const MarkovGame& game, std::span<Actor* const> actors,
                             Rng& env_rng, const RewardSampler& reward_sampler) {
    if (static_cast<int>(actors.size()) != game.num_agents)
        throw std::invalid_argument("sample_episode: expected one actor per agent");

    EpisodeRecord record;
    record.reserve(game.horizon);
    int s = game.initial_state;
    std::vector<int> actions(game.num_agents);
    for (int h = 0; h < game.horizon; ++h) {
        for (int i = 0; i < game.num_agents; ++i) {
            const int a = actors[i]->act(h, s);
            if (a < 0 || a >= game.action_counts[i])
                throw std::out_of_range("sample_episode: actor " + std::to_string(i) +
                                        " returned out-of-range action " + std::to_string(a));
            actions[i] = a;
        }
        const int ja = game.joint_action_index(actions);
        std::vector<double> step_rewards(game.num_agents);
        for (int i = 0; i < game.num_agents; ++i) {
            const double mean = game.reward(h, s, ja, i);
            step_rewards[i] =
                reward_sampler ? reward_sampler(h, s, ja, i, mean, env_rng) : mean;
        }
        const int next_state = env_rng.categorical(game.transition_row(h, s, ja));
        for (int i = 0; i < game.num_agents; ++i)
            actors[i]->observe(h, s, actions[i], step_rewards[i], next_state);
        record.push_back({s, actions, std::move(step_rewards), next_state});
        s = next_state;
    }
    return record;
}

std::vector<ValueTable> evaluate_joint_policy(const MarkovGame& game,
                                              const std::vector<MarkovPolicy>& policies) {
    check_policies(game, policies);
    const int ja_count = game.num_joint_actions();
    std::vector<ValueTable> values(game.num_agents,
                                   ValueTable(game.horizon, game.num_states));
    // Backward induction: V_h = D_pi (r_h + P_h V_{h+1}).
    for (int h = game.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < game.num_states; ++s) {
            std::vector<double> acc(game.num_agents, 0.0);
            for (int ja = 0; ja < ja_count; ++ja) {
                const std::vector<int> actions = game.decode_joint_action(ja);
                double weight = 1.0;
                for (int i = 0; i < game.num_agents; ++i)
                    weight *= policies[i].prob(h, s, actions[i]);
                if (weight == 0.0)
                    continue;
                for (int i = 0; i < game.num_agents; ++i) {
                    double q = game.reward(h, s, ja, i);
                    if (h + 1 < game.horizon) {
                        for (int s2 = 0; s2 < game.num_states; ++s2)
                            q += game.transition(h, s, ja, s2) * values[i].value(h + 1, s2);
                    }
                    acc[i] += weight * q;
                }
            }
            for (int i = 0; i < game.num_agents; ++i)
                values[i].value_ref(h, s) = acc[i];
        }
    }
    return values;
}

std::pair<MarkovPolicy, ValueTable> best_response(const MarkovGame& game, int agent,
                                                  const std::vector<MarkovPolicy>& policies) {
    if (agent < 0 || agent >= game.num_agents)
        throw std::out_of_range("best_response: invalid agent index");
    check_policies(game, policies);

    const int ja_count = game.num_joint_actions();
    const int own_actions = game.action_counts[agent];
    ValueTable value(game.horizon, game.num_states);
    MarkovPolicy policy = MarkovPolicy::uniform(agent, game.horizon, game.num_states,
                                                own_actions);

    for (int h = game.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < game.num_states; ++s) {
            std::vector<double> q(own_actions, 0.0);
            for (int ja = 0; ja < ja_count; ++ja) {
                const std::vector<int> actions = game.decode_joint_action(ja);
                double weight = 1.0;
                for (int i = 0; i < game.num_agents; ++i) {
                    if (i == agent)
                        continue;
                    weight *= policies[i].prob(h, s, actions[i]);
                }
                if (weight == 0.0)
                    continue;
                double v = game.reward(h, s, ja, agent);
                if (h + 1 < game.horizon) {
                    for (int s2 = 0; s2 < game.num_states; ++s2)
                        v += game.transition(h, s, ja, s2) * value.value(h + 1, s2);
                }
                q[actions[agent]] += weight * v;
            }
            const int best =
                static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
            value.value_ref(h, s) = q[best];
            for (int a = 0; a < own_actions; ++a)
                policy.prob_ref(h, s, a) = (a == best) ? 1.0 : 0.0;
        }
    }
    return {std::move(policy), std::move(value)};
}

std::vector<double> ne_gap(const MarkovGame& game, const std::vector<MarkovPolicy>& policies) {
    const std::vector<ValueTable> on_path = evaluate_joint_policy(game, policies);
    std::vector<double> gaps(game.num_agents);
    for (int i = 0; i < game.num_agents; ++i) {
        const auto [br_policy, br_value] = best_response(game, i, policies);
        gaps[i] = br_value.value(0, game.initial_state) - on_path[i].value(0, game.initial_state);
    }
    return gaps;
}

}  // namespace vlomd
