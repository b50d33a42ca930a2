#include "vlomd/certified.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vlomd/bandit.hpp"

namespace vlomd {

TrajectoryStore TrajectoryStore::for_game(const MarkovGame& game) {
    TrajectoryStore store;
    store.num_agents = game.num_agents;
    store.horizon = game.horizon;
    store.num_states = game.num_states;
    store.action_counts = game.action_counts;
    store.num_episodes = 0;
    store.visits.resize(static_cast<std::size_t>(game.horizon) * game.num_states);
    for (auto& vl : store.visits)
        vl.snapshots.resize(game.num_agents);
    return store;
}

void TrajectoryStore::add_visit(long episode, int h, int s,
                                const std::vector<std::vector<double>>& per_agent_rows) {
    if (h < 0 || h >= horizon || s < 0 || s >= num_states)
        throw std::out_of_range("add_visit: (h, s) out of range");
    if (static_cast<int>(per_agent_rows.size()) != num_agents)
        throw std::invalid_argument("add_visit: expected one row per agent");
    VisitList& vl = at(h, s);
    if (!vl.episodes.empty() && episode <= vl.episodes.back())
        throw std::invalid_argument("add_visit: episodes must be strictly increasing");
    vl.episodes.push_back(episode);
    for (int i = 0; i < num_agents; ++i) {
        if (static_cast<int>(per_agent_rows[i].size()) != action_counts[i])
            throw std::invalid_argument("add_visit: row size mismatch for agent " +
                                        std::to_string(i));
        vl.snapshots[i].push_back(per_agent_rows[i]);
    }
    num_episodes = std::max(num_episodes, episode);
}

long TrajectoryStore::visits_before(int h, int s, long episode) const {
    const auto& eps = at(h, s).episodes;
    return std::lower_bound(eps.begin(), eps.end(), episode) - eps.begin();
}

TrajectoryStore TrajectoryStore::restricted_to(long episodes) const {
    TrajectoryStore out;
    out.num_agents = num_agents;
    out.horizon = horizon;
    out.num_states = num_states;
    out.action_counts = action_counts;
    out.num_episodes = episodes;
    out.visits.resize(visits.size());
    for (std::size_t idx = 0; idx < visits.size(); ++idx) {
        const VisitList& src = visits[idx];
        VisitList& dst = out.visits[idx];
        const std::size_t keep =
            std::upper_bound(src.episodes.begin(), src.episodes.end(), episodes) -
            src.episodes.begin();
        dst.episodes.assign(src.episodes.begin(), src.episodes.begin() + keep);
        dst.snapshots.resize(num_agents);
        for (int i = 0; i < num_agents; ++i)
            dst.snapshots[i].assign(src.snapshots[i].begin(), src.snapshots[i].begin() + keep);
    }
    return out;
}

std::vector<std::string> TrajectoryStore::validate(const MarkovGame& game) const {
    std::vector<std::string> report;
    if (num_agents != game.num_agents || horizon != game.horizon ||
        num_states != game.num_states || action_counts != game.action_counts) {
        report.push_back("store dimensions do not match the game");
        return report;
    }
    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < num_states; ++s) {
            const VisitList& vl = at(h, s);
            for (std::size_t v = 0; v < vl.episodes.size(); ++v) {
                if (v > 0 && vl.episodes[v] <= vl.episodes[v - 1])
                    report.push_back("visit episodes not strictly increasing at (h=" +
                                     std::to_string(h + 1) + ", s=" + std::to_string(s) + ")");
                if (vl.episodes[v] < 1 || vl.episodes[v] > num_episodes)
                    report.push_back("visit episode " + std::to_string(vl.episodes[v]) +
                                     " out of range at (h=" + std::to_string(h + 1) +
                                     ", s=" + std::to_string(s) + ")");
            }
            for (int i = 0; i < num_agents; ++i) {
                if (vl.snapshots[i].size() != vl.episodes.size()) {
                    report.push_back("snapshot count mismatch for agent " + std::to_string(i));
                    continue;
                }
                for (const auto& row : vl.snapshots[i]) {
                    double sum = 0.0;
                    bool negative = false;
                    for (double p : row) {
                        if (p < 0.0)
                            negative = true;
                        sum += p;
                    }
                    if (negative || std::abs(sum - 1.0) > 1e-9)
                        report.push_back("snapshot at (h=" + std::to_string(h + 1) +
                                         ", s=" + std::to_string(s) + ") for agent " +
                                         std::to_string(i) + " is not a simplex point");
                }
            }
        }
    }
    return report;
}

EpisodeRecord execute_certified(const TrajectoryStore& store, const MarkovGame& game,
                                Rng& shared_rng, std::span<Rng* const> agent_rngs,
                                Rng& env_rng, std::vector<CertifiedTraceStep>* trace) {
    if (store.num_episodes < 1)
        throw std::invalid_argument("execute_certified: empty store");
    if (static_cast<int>(agent_rngs.size()) != game.num_agents)
        throw std::invalid_argument("execute_certified: expected one rng per agent");

    EpisodeRecord record;
    record.reserve(game.horizon);
    long k = 1 + static_cast<long>(shared_rng.uniform01() *
                                   static_cast<double>(store.num_episodes));
    k = std::min(k, store.num_episodes);
    bool fallback = false;
    int s = game.initial_state;
    std::vector<int> actions(game.num_agents);
    std::vector<double> uniform_row;

    for (int h = 0; h < game.horizon; ++h) {
        const TrajectoryStore::VisitList& vl = store.at(h, s);
        const long t = fallback ? 0 : store.visits_before(h, s, k);
        long chosen = 0;
        if (t >= 1) {
            const AlphaWeights aw = alpha_weights(t, game.horizon);
            chosen = 1 + shared_rng.categorical(aw.weights);
            k = vl.episodes[chosen - 1];
        } else {
            fallback = true;
        }
        if (trace)
            trace->push_back({h, s, t, chosen});
        for (int i = 0; i < game.num_agents; ++i) {
            if (chosen >= 1) {
                actions[i] = agent_rngs[i]->categorical(vl.snapshots[i][chosen - 1]);
            } else {
                uniform_row.assign(game.action_counts[i], 1.0 / game.action_counts[i]);
                actions[i] = agent_rngs[i]->categorical(uniform_row);
            }
        }
        const int ja = game.joint_action_index(actions);
        std::vector<double> rewards(game.num_agents);
        for (int i = 0; i < game.num_agents; ++i)
            rewards[i] = game.reward(h, s, ja, i);
        const int next_state = env_rng.categorical(game.transition_row(h, s, ja));
        record.push_back({s, actions, std::move(rewards), next_state});
        s = next_state;
    }
    return record;
}

namespace {

// Value of everyone-plays-uniform from each (h, s), for one agent.
std::vector<double> uniform_play_values(const MarkovGame& game, int agent) {
    const int ja_count = game.num_joint_actions();
    double uniform_weight = 1.0;
    for (int a : game.action_counts)
        uniform_weight /= a;
    std::vector<double> values(static_cast<std::size_t>(game.horizon + 1) * game.num_states,
                               0.0);
    for (int h = game.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < game.num_states; ++s) {
            double acc = 0.0;
            for (int ja = 0; ja < ja_count; ++ja) {
                double v = game.reward(h, s, ja, agent);
                for (int s2 = 0; s2 < game.num_states; ++s2)
                    v += game.transition(h, s, ja, s2) *
                         values[static_cast<std::size_t>(h + 1) * game.num_states + s2];
                acc += uniform_weight * v;
            }
            values[static_cast<std::size_t>(h) * game.num_states + s] = acc;
        }
    }
    return values;
}

// Best-response value of `agent` against uniform opponents from each (h, s).
std::vector<double> uniform_best_response_values(const MarkovGame& game, int agent) {
    const int ja_count = game.num_joint_actions();
    double opp_weight = 1.0;
    for (int i = 0; i < game.num_agents; ++i)
        if (i != agent)
            opp_weight /= game.action_counts[i];
    std::vector<double> values(static_cast<std::size_t>(game.horizon + 1) * game.num_states,
                               0.0);
    std::vector<double> q;
    for (int h = game.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < game.num_states; ++s) {
            q.assign(game.action_counts[agent], 0.0);
            for (int ja = 0; ja < ja_count; ++ja) {
                const std::vector<int> decoded = game.decode_joint_action(ja);
                double v = game.reward(h, s, ja, agent);
                for (int s2 = 0; s2 < game.num_states; ++s2)
                    v += game.transition(h, s, ja, s2) *
                         values[static_cast<std::size_t>(h + 1) * game.num_states + s2];
                q[decoded[agent]] += opp_weight * v;
            }
            values[static_cast<std::size_t>(h) * game.num_states + s] =
                *std::max_element(q.begin(), q.end());
        }
    }
    return values;
}

// Backward tables over (h, s, visit count) for one agent. `best_response`
// selects between the on-path recursion (all agents play the stored rows of
// the sampled visit) and the deviator recursion (the agent maximizes its own
// action against the alpha-weighted mixture of the opponents' stored rows,
// with the continuation resolved per sampled visit).
// Returns tables[h*S+s][t], t = 0..#visits(h, s).
std::vector<std::vector<double>> certified_tables(const TrajectoryStore& store,
                                                  const MarkovGame& game, int agent,
                                                  bool best_response) {
    const int ja_count = game.num_joint_actions();
    const int own_actions = game.action_counts[agent];
    const std::vector<double> fallback = best_response
                                             ? uniform_best_response_values(game, agent)
                                             : uniform_play_values(game, agent);

    std::vector<std::vector<double>> tables(
        static_cast<std::size_t>(game.horizon) * game.num_states);
    // Pre-decoded joint actions.
    std::vector<std::vector<int>> decoded(ja_count);
    for (int ja = 0; ja < ja_count; ++ja)
        decoded[ja] = game.decode_joint_action(ja);

    std::vector<double> m;  // deviator action values, running alpha-mixture
    for (int h = game.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < game.num_states; ++s) {
            const TrajectoryStore::VisitList& vl = store.at(h, s);
            const long t_max = static_cast<long>(vl.episodes.size());
            std::vector<double>& table = tables[static_cast<std::size_t>(h) * game.num_states + s];
            table.assign(t_max + 1, 0.0);
            table[0] = fallback[static_cast<std::size_t>(h) * game.num_states + s];
            m.assign(own_actions, 0.0);
            double w = 0.0;  // on-path running mixture
            for (long t = 1; t <= t_max; ++t) {
                const long episode = vl.episodes[t - 1];
                // Continuation per next state: table value at its visit prefix
                // before `episode` (fallback when unvisited by then).
                std::vector<double> continuation(game.num_states, 0.0);
                if (h + 1 < game.horizon) {
                    for (int s2 = 0; s2 < game.num_states; ++s2) {
                        const long n = store.visits_before(h + 1, s2, episode);
                        continuation[s2] =
                            tables[static_cast<std::size_t>(h + 1) * game.num_states + s2][n];
                    }
                }
                const double alpha =
                    static_cast<double>(game.horizon + 1) / (game.horizon + t);
                if (best_response) {
                    // phi(a) = E_{opponent rows of this visit}[r + P * continuation | a]
                    std::vector<double> phi(own_actions, 0.0);
                    for (int ja = 0; ja < ja_count; ++ja) {
                        double weight = 1.0;
                        for (int i = 0; i < game.num_agents; ++i) {
                            if (i == agent)
                                continue;
                            weight *= vl.snapshots[i][t - 1][decoded[ja][i]];
                        }
                        if (weight == 0.0)
                            continue;
                        double v = game.reward(h, s, ja, agent);
                        if (h + 1 < game.horizon)
                            for (int s2 = 0; s2 < game.num_states; ++s2)
                                v += game.transition(h, s, ja, s2) * continuation[s2];
                        phi[decoded[ja][agent]] += weight * v;
                    }
                    for (int a = 0; a < own_actions; ++a)
                        m[a] = (1.0 - alpha) * m[a] + alpha * phi[a];
                    table[t] = *std::max_element(m.begin(), m.end());
                } else {
                    double g = 0.0;
                    for (int ja = 0; ja < ja_count; ++ja) {
                        double weight = 1.0;
                        for (int i = 0; i < game.num_agents; ++i)
                            weight *= vl.snapshots[i][t - 1][decoded[ja][i]];
                        if (weight == 0.0)
                            continue;
                        double v = game.reward(h, s, ja, agent);
                        if (h + 1 < game.horizon)
                            for (int s2 = 0; s2 < game.num_states; ++s2)
                                v += game.transition(h, s, ja, s2) * continuation[s2];
                        g += weight * v;
                    }
                    w = (1.0 - alpha) * w + alpha * g;
                    table[t] = w;
                }
            }
        }
    }
    return tables;
}

double top_level_average(const TrajectoryStore& store, const MarkovGame& game,
                         const std::vector<std::vector<double>>& tables) {
    const std::vector<double>& root =
        tables[static_cast<std::size_t>(0) * game.num_states + game.initial_state];
    double sum = 0.0;
    for (long k = 1; k <= store.num_episodes; ++k)
        sum += root[store.visits_before(0, game.initial_state, k)];
    return sum / static_cast<double>(store.num_episodes);
}

void check_store(const TrajectoryStore& store, const MarkovGame& game) {
    if (store.num_episodes < 1)
        throw std::invalid_argument("certified evaluator: empty store");
    if (store.num_agents != game.num_agents || store.horizon != game.horizon ||
        store.num_states != game.num_states || store.action_counts != game.action_counts)
        throw std::invalid_argument("certified evaluator: store/game dimension mismatch");
}

}  // namespace

double value_of_certified(const TrajectoryStore& store, const MarkovGame& game, int agent) {
    check_store(store, game);
    if (agent < 0 || agent >= game.num_agents)
        throw std::out_of_range("value_of_certified: invalid agent");
    return top_level_average(store, game, certified_tables(store, game, agent, false));
}

double best_response_to_certified(const TrajectoryStore& store, const MarkovGame& game,
                                  int agent) {
    check_store(store, game);
    if (agent < 0 || agent >= game.num_agents)
        throw std::out_of_range("best_response_to_certified: invalid agent");
    return top_level_average(store, game, certified_tables(store, game, agent, true));
}

std::vector<double> cce_gap(const TrajectoryStore& store, const MarkovGame& game) {
    check_store(store, game);
    std::vector<double> gaps(game.num_agents);
    for (int i = 0; i < game.num_agents; ++i)
        gaps[i] = best_response_to_certified(store, game, i) -
                  value_of_certified(store, game, i);
    return gaps;
}

CertifiedProfile certified_profile(const TrajectoryStore& store, const MarkovGame& game,
                                   int agent) {
    check_store(store, game);
    const auto value_tables = certified_tables(store, game, agent, false);
    const auto br_tables = certified_tables(store, game, agent, true);
    CertifiedProfile profile;
    profile.per_episode_value.reserve(store.num_episodes);
    profile.per_episode_best_response.reserve(store.num_episodes);
    const std::size_t root = static_cast<std::size_t>(0) * game.num_states + game.initial_state;
    for (long k = 1; k <= store.num_episodes; ++k) {
        const long t = store.visits_before(0, game.initial_state, k);
        profile.per_episode_value.push_back(value_tables[root][t]);
        profile.per_episode_best_response.push_back(br_tables[root][t]);
    }
    return profile;
}

std::vector<double> verify_cce_distribution(const MarkovGame& game,
                                            std::span<const double> joint_dist) {
    if (game.horizon != 1 || game.num_states != 1)
        throw std::invalid_argument("verify_cce_distribution: game must be one-shot (H=1, S=1)");
    const int ja_count = game.num_joint_actions();
    if (static_cast<int>(joint_dist.size()) != ja_count)
        throw std::invalid_argument("verify_cce_distribution: distribution size mismatch");
    double sum = 0.0;
    for (double p : joint_dist) {
        if (p < -1e-12)
            throw std::invalid_argument("verify_cce_distribution: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("verify_cce_distribution: probabilities sum to " +
                                    std::to_string(sum) + ", expected 1");

    std::vector<std::vector<int>> decoded(ja_count);
    for (int ja = 0; ja < ja_count; ++ja)
        decoded[ja] = game.decode_joint_action(ja);

    std::vector<double> gaps(game.num_agents);
    for (int i = 0; i < game.num_agents; ++i) {
        double on_path = 0.0;
        for (int ja = 0; ja < ja_count; ++ja)
            on_path += joint_dist[ja] * game.reward(0, 0, ja, i);
        double best_dev = -1.0;
        for (int a = 0; a < game.action_counts[i]; ++a) {
            double dev = 0.0;
            for (int ja = 0; ja < ja_count; ++ja) {
                if (joint_dist[ja] == 0.0)
                    continue;
                std::vector<int> actions = decoded[ja];
                actions[i] = a;
                dev += joint_dist[ja] * game.reward(0, 0, game.joint_action_index(actions), i);
            }
            best_dev = std::max(best_dev, dev);
        }
        gaps[i] = best_dev - on_path;
    }
    return gaps;
}

}  // namespace vlomd
