#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlomd/certified.hpp"
#include "vlomd/game.hpp"
#include "vlomd/vlearning.hpp"

namespace vlomd {

// Experiment orchestration: game generation, decentralized self-play,
// single-stage warm-up runs, and offline gap re-evaluation.
//
// Seed scheme (documented contract): replicate_key = derive_seed(base_seed, r);
// each stream within a replicate is derive_seed(replicate_key, role) with the
// roles from rng.hpp. Adding replicates or agents never changes the streams of
// existing ones.

struct ExperimentConfig {
    std::string game = "hawkdove";  // family spec or path to a game JSON
    long episodes = 1000;           // K
    int replicates = 1;
    std::uint64_t base_seed = 1;
    std::vector<long> checkpoints;  // defaults to {episodes}
    double bonus_c = 2.0;
    double failure_prob = 0.01;  // p inside the log factor
    std::string output_dir;      // empty: no files written
    bool write_trajectories = true;
};

struct MetricRow {
    int replicate = 0;
    long checkpoint = 0;
    std::vector<double> gaps;    // per-agent certified-policy gap
    std::vector<double> values;  // per-agent certified-policy on-path value
    double wall_clock_s = 0.0;   // in-memory only; not serialized (see README)
};

// Game families:
//   hawkdove              2x2 one-shot game, payoffs scaled into [0,1] by 1/5
//   random(S,A,B,H,seed)  two-player, uniform rewards, Dirichlet(1) rows
//   team(A,B,seed)        one-shot common-reward game, uniform payoffs
// or a path to a game JSON file. Generated games always pass validate_game.
MarkovGame gen_game(const std::string& spec);
bool looks_like_family(const std::string& spec);

struct SelfPlayResult {
    MarkovGame game;
    std::vector<MetricRow> metrics;            // ordered by (replicate, checkpoint)
    std::vector<TrajectoryStore> final_stores;  // one per replicate
    // Per replicate and agent: the agent's clipped value at the initial state
    // at the start of episode checkpoint+1, aligned with `metrics`.
    std::vector<std::vector<std::vector<double>>> optimistic_root_values;
};

// K episodes of decentralized self-play per replicate; the certified policy is
// frozen and evaluated at every checkpoint. Writes game.json, metrics.csv and
// trajectory dumps under output_dir when set.
SelfPlayResult run_selfplay(const ExperimentConfig& config);

struct WarmupResult {
    std::vector<double> strategy_p1, strategy_p2;  // pair sampled at t*
    long sampled_round = 0;                        // t*
    std::vector<double> gaps;                      // exact per-player gap of the pair
    // Expected regret of each player after T/4 and T rounds.
    double regret_quarter_p1 = 0.0, regret_full_p1 = 0.0;
    double regret_quarter_p2 = 0.0, regret_full_p2 = 0.0;
};

// Both players run the unit-weight bandit learner on a common-reward matrix
// for `rounds` rounds; a shared-seed uniform draw picks the output pair.
WarmupResult run_warmup_team(const MarkovGame& team_game, long rounds, std::uint64_t seed);
WarmupResult run_warmup_team(int actions_a, int actions_b, long rounds, std::uint64_t seed);

// Offline re-evaluation of trajectory dumps; produces the same rows (same
// order of operations) as the in-run checkpoint evaluation.
std::vector<MetricRow> eval_gaps(const MarkovGame& game,
                                 const std::vector<std::string>& trajectory_paths,
                                 const std::vector<long>& checkpoints, int replicate = 0);

// metrics.csv schema: replicate,checkpoint,cce_gap_agent<i>...,value_agent<i>...
std::string metrics_csv_header(int num_agents);
void write_metrics_csv(const std::vector<MetricRow>& rows, int num_agents,
                       const std::string& path);

}  // namespace vlomd
