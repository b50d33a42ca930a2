#pragma once

#include <span>
#include <string>
#include <vector>

#include "vlomd/game.hpp"
#include "vlomd/rng.hpp"

namespace vlomd {

// The correlated policy extracted from a self-play run, and its exact
// evaluators.
//
// A TrajectoryStore records, for every (h, s), the episodes k^1 < ... < k^t in
// which the pair was visited and each agent's policy row at that visit. The
// certified policy replays it as follows: draw an episode index k uniformly
// from [K] with the shared seed; at each step resolve t = number of stored
// visits to (h, s_h) strictly before episode k, draw a visit index m with
// probabilities alpha_weights(t).weights (shared seed again, so all agents
// pick the same m), play the stored rows of visit m independently per agent,
// and continue with k = k^m. If t = 0 the policy falls back to uniform rows
// for the remainder of the episode.
//
// The evaluators below compute exact values by backward induction. Because a
// branch's future depends on its episode index only through the visit counts
// it induces, the recursion is memoized per (h, s, visit count): one table
// entry W[h][s][t] per prefix length t instead of per raw episode.

struct TrajectoryStore {
    int num_agents = 0;
    int horizon = 0;
    int num_states = 0;
    std::vector<int> action_counts;
    long num_episodes = 0;  // K

    struct VisitList {
        std::vector<long> episodes;  // strictly increasing, 1-based
        // snapshots[agent][visit] = policy row of that agent at the visit
        std::vector<std::vector<std::vector<double>>> snapshots;
    };
    std::vector<VisitList> visits;  // h * num_states + s

    static TrajectoryStore for_game(const MarkovGame& game);

    VisitList& at(int h, int s) {
        return visits[static_cast<std::size_t>(h) * num_states + s];
    }
    const VisitList& at(int h, int s) const {
        return visits[static_cast<std::size_t>(h) * num_states + s];
    }

    // Appends a visit of episode k at (h, s) with one policy row per agent.
    void add_visit(long episode, int h, int s,
                   const std::vector<std::vector<double>>& per_agent_rows);

    // Number of stored visits to (h, s) in episodes strictly before `episode`.
    long visits_before(int h, int s, long episode) const;

    // The store as it looked after `num_episodes` episodes (prefix copy).
    TrajectoryStore restricted_to(long num_episodes) const;

    // Structural checks against a game; returns violated invariants.
    std::vector<std::string> validate(const MarkovGame& game) const;
};

// Per-step trace of one certified episode: the resolved visit count and the
// chosen visit index (0 when the uniform fallback was used).
struct CertifiedTraceStep {
    int step = 0;
    int state = 0;
    long visit_count = 0;
    long chosen_visit = 0;  // 1-based visit index, 0 = fallback
};

// Executes one episode of the certified policy. Index draws come from
// shared_rng (the common seed), each agent's action draw from its own rng,
// transitions and optional reward noise from env_rng.
EpisodeRecord execute_certified(const TrajectoryStore& store, const MarkovGame& game,
                                Rng& shared_rng, std::span<Rng* const> agent_rngs,
                                Rng& env_rng,
                                std::vector<CertifiedTraceStep>* trace = nullptr);

// Exact value of the certified policy for one agent at (h=0, s_1).
double value_of_certified(const TrajectoryStore& store, const MarkovGame& game, int agent);

// Exact best-response value against the other agents' side of the certified
// policy: backward DP over (h, s, visit count) where the deviator maximizes
// its own action against the alpha-weighted mixture of stored opponent rows,
// averaged over the top-level uniform episode draw.
double best_response_to_certified(const TrajectoryStore& store, const MarkovGame& game,
                                  int agent);

// Per-agent gap: best_response_to_certified - value_of_certified.
std::vector<double> cce_gap(const TrajectoryStore& store, const MarkovGame& game);

// Per-episode diagnostic: on-path and best-response values conditioned on each
// top-level episode draw k (their means are the two quantities above).
struct CertifiedProfile {
    std::vector<double> per_episode_value;          // index k-1
    std::vector<double> per_episode_best_response;  // index k-1
};
CertifiedProfile certified_profile(const TrajectoryStore& store, const MarkovGame& game,
                                   int agent);

// Direct check of a joint-action distribution in a one-shot game (H=1, S=1):
// gap_i = max_{a_i} E_{a~dist}[r_i(a_i, a_{-i})] - E_{a~dist}[r_i(a)].
std::vector<double> verify_cce_distribution(const MarkovGame& game,
                                            std::span<const double> joint_dist);

}  // namespace vlomd
