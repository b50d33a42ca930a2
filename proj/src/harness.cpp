#include "vlomd/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "vlomd/bandit.hpp"
#include "vlomd/io.hpp"

namespace vlomd {

namespace {

MarkovGame make_hawkdove() {
    // 2x2 one-shot game with row payoffs {{4,1},{5,0}} and the symmetric
    // column payoffs, scaled by 1/5 into [0,1].
    MarkovGame game;
    game.num_agents = 2;
    game.horizon = 1;
    game.num_states = 1;
    game.action_counts = {2, 2};
    game.initial_state = 0;
    game.allocate();
    const double row[2][2] = {{4.0, 1.0}, {5.0, 0.0}};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const int ja = a * 2 + b;
            game.reward_ref(0, 0, ja, 0) = row[a][b] / 5.0;
            game.reward_ref(0, 0, ja, 1) = row[b][a] / 5.0;
            game.transition_ref(0, 0, ja, 0) = 1.0;
        }
    }
    return game;
}

MarkovGame make_random(int num_states, int actions_a, int actions_b, int horizon,
                       std::uint64_t seed) {
    MarkovGame game;
    game.num_agents = 2;
    game.horizon = horizon;
    game.num_states = num_states;
    game.action_counts = {actions_a, actions_b};
    game.initial_state = 0;
    game.allocate();
    Rng rng(derive_seed(seed, kSeedRoleGameGen));
    const int ja_count = game.num_joint_actions();
    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < num_states; ++s) {
            for (int ja = 0; ja < ja_count; ++ja) {
                for (int i = 0; i < 2; ++i)
                    game.reward_ref(h, s, ja, i) = rng.uniform01();
                // Dirichlet(1) row: normalized iid Exp(1) draws.
                double sum = 0.0;
                std::vector<double> row(num_states);
                for (int s2 = 0; s2 < num_states; ++s2) {
                    row[s2] = -std::log(1.0 - rng.uniform01());
                    sum += row[s2];
                }
                for (int s2 = 0; s2 < num_states; ++s2)
                    game.transition_ref(h, s, ja, s2) = row[s2] / sum;
            }
        }
    }
    game.normalize_transitions();
    return game;
}

MarkovGame make_team(int actions_a, int actions_b, std::uint64_t seed) {
    MarkovGame game;
    game.num_agents = 2;
    game.horizon = 1;
    game.num_states = 1;
    game.action_counts = {actions_a, actions_b};
    game.initial_state = 0;
    game.allocate();
    Rng rng(derive_seed(seed, kSeedRoleGameGen));
    for (int ja = 0; ja < game.num_joint_actions(); ++ja) {
        const double r = rng.uniform01();
        game.reward_ref(0, 0, ja, 0) = r;
        game.reward_ref(0, 0, ja, 1) = r;
        game.transition_ref(0, 0, ja, 0) = 1.0;
    }
    return game;
}

// Parses "name(arg1,...,argN)" into name + integer args.
bool parse_family_call(const std::string& spec, std::string& name,
                       std::vector<long long>& args) {
    const std::size_t open = spec.find('(');
    if (open == std::string::npos || spec.back() != ')')
        return false;
    name = spec.substr(0, open);
    std::string body = spec.substr(open + 1, spec.size() - open - 2);
    args.clear();
    if (body.empty())
        return true;
    std::istringstream ss(body);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            args.push_back(std::stoll(field));
        } catch (...) {
            return false;
        }
    }
    return true;
}

}  // namespace

bool looks_like_family(const std::string& spec) {
    if (spec == "hawkdove")
        return true;
    std::string name;
    std::vector<long long> args;
    return parse_family_call(spec, name, args) && (name == "random" || name == "team");
}

MarkovGame gen_game(const std::string& spec) {
    if (spec == "hawkdove")
        return make_hawkdove();
    std::string name;
    std::vector<long long> args;
    if (parse_family_call(spec, name, args)) {
        if (name == "random") {
            if (args.size() != 5)
                throw std::invalid_argument("random(S,A,B,H,seed) takes 5 arguments");
            return make_random(static_cast<int>(args[0]), static_cast<int>(args[1]),
                               static_cast<int>(args[2]), static_cast<int>(args[3]),
                               static_cast<std::uint64_t>(args[4]));
        }
        if (name == "team") {
            if (args.size() != 3)
                throw std::invalid_argument("team(A,B,seed) takes 3 arguments");
            return make_team(static_cast<int>(args[0]), static_cast<int>(args[1]),
                             static_cast<std::uint64_t>(args[2]));
        }
        throw std::invalid_argument("unknown game family '" + name + "'");
    }
    throw std::invalid_argument("unknown game family '" + spec + "'");
}

std::string metrics_csv_header(int num_agents) {
    std::string header = "replicate,checkpoint";
    for (int i = 0; i < num_agents; ++i)
        header += ",cce_gap_agent" + std::to_string(i);
    for (int i = 0; i < num_agents; ++i)
        header += ",value_agent" + std::to_string(i);
    return header;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, int num_agents,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out << metrics_csv_header(num_agents) << "\n";
    for (const MetricRow& row : rows) {
        out << row.replicate << "," << row.checkpoint;
        for (double g : row.gaps)
            out << "," << format_double(g);
        for (double v : row.values)
            out << "," << format_double(v);
        out << "\n";
    }
}

namespace {

MetricRow evaluate_checkpoint(const TrajectoryStore& store, const MarkovGame& game,
                              int replicate, long checkpoint) {
    MetricRow row;
    row.replicate = replicate;
    row.checkpoint = checkpoint;
    const TrajectoryStore frozen = store.restricted_to(checkpoint);
    for (int i = 0; i < game.num_agents; ++i) {
        const double value = value_of_certified(frozen, game, i);
        const double br = best_response_to_certified(frozen, game, i);
        row.gaps.push_back(br - value);
        row.values.push_back(value);
    }
    return row;
}

}  // namespace

SelfPlayResult run_selfplay(const ExperimentConfig& config) {
    if (config.episodes < 1)
        throw std::invalid_argument("run_selfplay: episodes must be >= 1");
    if (config.replicates < 1)
        throw std::invalid_argument("run_selfplay: replicates must be >= 1");

    SelfPlayResult result;
    result.game = looks_like_family(config.game) ? gen_game(config.game)
                                                 : load_game_json(config.game);
    const MarkovGame& game = result.game;
    {
        const std::vector<std::string> report = validate_game(game);
        if (!report.empty())
            throw std::invalid_argument("run_selfplay: invalid game: " + report.front());
    }

    std::vector<long> checkpoints = config.checkpoints;
    if (checkpoints.empty())
        checkpoints = {config.episodes};
    std::sort(checkpoints.begin(), checkpoints.end());
    for (long c : checkpoints)
        if (c < 1 || c > config.episodes)
            throw std::invalid_argument("run_selfplay: checkpoint " + std::to_string(c) +
                                        " outside [1, episodes]");

    const int action_bound =
        *std::max_element(game.action_counts.begin(), game.action_counts.end());
    const double iota = compute_iota(game.num_states, action_bound,
                                     config.episodes * game.horizon, config.failure_prob);

    const bool write_files = !config.output_dir.empty();
    if (write_files) {
        std::filesystem::create_directories(config.output_dir);
        write_game_json(game, config.output_dir + "/game.json");
    }

    for (int rep = 0; rep < config.replicates; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t rep_key = derive_seed(config.base_seed, rep);
        Rng env_rng(derive_seed(rep_key, kSeedRoleEnv));
        std::vector<AgentState> agents;
        std::vector<Rng> agent_rngs;
        for (int i = 0; i < game.num_agents; ++i) {
            AgentConfig acfg;
            acfg.horizon = game.horizon;
            acfg.num_states = game.num_states;
            acfg.num_actions = game.action_counts[i];
            acfg.bonus_c = config.bonus_c;
            acfg.iota = iota;
            agents.emplace_back(acfg);
            agent_rngs.emplace_back(derive_seed(rep_key, kSeedRoleAgentBase + i));
        }

        TrajectoryStore store = TrajectoryStore::for_game(game);
        std::size_t next_checkpoint = 0;
        std::vector<MetricRow> rep_rows;
        std::vector<std::vector<double>> rep_optimism;
        std::vector<int> actions(game.num_agents);
        std::vector<std::vector<double>> rows(game.num_agents);

        for (long k = 1; k <= config.episodes; ++k) {
            int s = game.initial_state;
            for (int h = 0; h < game.horizon; ++h) {
                for (int i = 0; i < game.num_agents; ++i) {
                    ActResult res = agents[i].act(h, s, agent_rngs[i]);
                    actions[i] = res.action;
                    rows[i] = std::move(res.policy);
                }
                store.add_visit(k, h, s, rows);
                const int ja = game.joint_action_index(actions);
                const int next_state = env_rng.categorical(game.transition_row(h, s, ja));
                for (int i = 0; i < game.num_agents; ++i)
                    agents[i].observe(h, s, actions[i], game.reward(h, s, ja, i), next_state);
                s = next_state;
            }
            while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] == k) {
                rep_rows.push_back(evaluate_checkpoint(store, game, rep, k));
                std::vector<double> roots;
                for (const AgentState& agent : agents)
                    roots.push_back(agent.value_clipped(0, game.initial_state));
                rep_optimism.push_back(std::move(roots));
                ++next_checkpoint;
            }
        }

        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (MetricRow& row : rep_rows)
            row.wall_clock_s = elapsed;

        if (write_files && config.write_trajectories) {
            std::string prefix = config.output_dir;
            if (config.replicates > 1) {
                prefix += "/rep" + std::to_string(rep);
                std::filesystem::create_directories(prefix);
            }
            for (int i = 0; i < game.num_agents; ++i)
                write_trajectory_csv(store, i,
                                     prefix + "/trajectory_agent" + std::to_string(i) + ".csv");
        }

        result.metrics.insert(result.metrics.end(), rep_rows.begin(), rep_rows.end());
        result.optimistic_root_values.push_back(std::move(rep_optimism));
        result.final_stores.push_back(std::move(store));
        std::cerr << "replicate " << rep << ": " << config.episodes << " episodes in "
                  << elapsed << " s\n";
    }

    if (write_files)
        write_metrics_csv(result.metrics, game.num_agents, config.output_dir + "/metrics.csv");
    return result;
}

WarmupResult run_warmup_team(const MarkovGame& team_game, long rounds, std::uint64_t seed) {
    if (rounds < 1)
        throw std::invalid_argument("run_warmup_team: rounds must be >= 1");
    if (team_game.num_agents != 2 || team_game.horizon != 1 || team_game.num_states != 1)
        throw std::invalid_argument("run_warmup_team: expected a one-shot two-player game");

    const int actions_a = team_game.action_counts[0];
    const int actions_b = team_game.action_counts[1];
    Rng rng_p1(derive_seed(seed, kSeedRoleAgentBase + 0));
    Rng rng_p2(derive_seed(seed, kSeedRoleAgentBase + 1));
    Exp3 p1(actions_a), p2(actions_b);

    // Strategy trajectories plus running statistics for the exact expected
    // regret of each player against the other's realized trajectory.
    std::vector<std::vector<double>> mu_traj, nu_traj;
    mu_traj.reserve(rounds);
    nu_traj.reserve(rounds);
    std::vector<double> cum_p1(actions_a, 0.0);  // sum_t E_{b~nu_t} r(a, b)
    std::vector<double> cum_p2(actions_b, 0.0);  // sum_t E_{a~mu_t} r(a, b)
    double played = 0.0;                         // sum_t E_{mu_t x nu_t} r

    WarmupResult out;
    const long quarter = std::max(1L, rounds / 4);
    for (long t = 1; t <= rounds; ++t) {
        const std::vector<double> mu = p1.strategy();
        const std::vector<double> nu = p2.strategy();
        mu_traj.push_back(mu);
        nu_traj.push_back(nu);
        for (int a = 0; a < actions_a; ++a)
            for (int b = 0; b < actions_b; ++b) {
                const double r = team_game.reward(0, 0, a * actions_b + b, 0);
                cum_p1[a] += nu[b] * r;
                cum_p2[b] += mu[a] * r;
                played += mu[a] * nu[b] * r;
            }
        const int a = p1.act(rng_p1);
        const int b = p2.act(rng_p2);
        const double r = team_game.reward(0, 0, a * actions_b + b, 0);
        p1.update(a, r);
        p2.update(b, r);
        if (t == quarter || t == rounds) {
            const double reg1 = *std::max_element(cum_p1.begin(), cum_p1.end()) - played;
            const double reg2 = *std::max_element(cum_p2.begin(), cum_p2.end()) - played;
            if (t == quarter) {
                out.regret_quarter_p1 = reg1;
                out.regret_quarter_p2 = reg2;
            }
            if (t == rounds) {
                out.regret_full_p1 = reg1;
                out.regret_full_p2 = reg2;
            }
        }
    }

    Rng shared(derive_seed(seed, kSeedRoleWarmupShared));
    out.sampled_round = 1 + static_cast<long>(shared.uniform01() * static_cast<double>(rounds));
    out.sampled_round = std::min(out.sampled_round, rounds);
    out.strategy_p1 = mu_traj[out.sampled_round - 1];
    out.strategy_p2 = nu_traj[out.sampled_round - 1];

    // Exact gap of the sampled pair: best pure action against the opponent's
    // sampled mixed strategy, minus the pair's value.
    double value = 0.0;
    std::vector<double> dev1(actions_a, 0.0), dev2(actions_b, 0.0);
    for (int a = 0; a < actions_a; ++a)
        for (int b = 0; b < actions_b; ++b) {
            const double r = team_game.reward(0, 0, a * actions_b + b, 0);
            value += out.strategy_p1[a] * out.strategy_p2[b] * r;
            dev1[a] += out.strategy_p2[b] * r;
            dev2[b] += out.strategy_p1[a] * r;
        }
    out.gaps = {*std::max_element(dev1.begin(), dev1.end()) - value,
                *std::max_element(dev2.begin(), dev2.end()) - value};
    return out;
}

WarmupResult run_warmup_team(int actions_a, int actions_b, long rounds, std::uint64_t seed) {
    std::ostringstream spec;
    spec << "team(" << actions_a << "," << actions_b << "," << seed << ")";
    return run_warmup_team(gen_game(spec.str()), rounds, seed);
}

std::vector<MetricRow> eval_gaps(const MarkovGame& game,
                                 const std::vector<std::string>& trajectory_paths,
                                 const std::vector<long>& checkpoints, int replicate) {
    const TrajectoryStore store = load_trajectory_csvs(trajectory_paths, game);
    std::vector<long> points = checkpoints;
    if (points.empty())
        points = {store.num_episodes};
    std::sort(points.begin(), points.end());
    std::vector<MetricRow> rows;
    for (long checkpoint : points) {
        if (checkpoint < 1 || checkpoint > store.num_episodes)
            throw std::invalid_argument("eval_gaps: checkpoint " + std::to_string(checkpoint) +
                                        " outside [1, K]");
        rows.push_back(evaluate_checkpoint(store, game, replicate, checkpoint));
    }
    return rows;
}

}  // namespace vlomd
