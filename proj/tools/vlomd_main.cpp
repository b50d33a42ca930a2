// Command-line front end: game generation, self-play runs, bandit warm-up
// experiments, offline gap evaluation, and direct CCE checks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vlomd/harness.hpp"
#include "vlomd/io.hpp"

namespace {

std::vector<long> parse_checkpoints(const std::string& spec) {
    std::vector<long> out;
    std::istringstream ss(spec);
    std::string field;
    while (std::getline(ss, field, ','))
        if (!field.empty())
            out.push_back(std::stol(field));
    return out;
}

int cmd_gen_game(const std::string& spec, const std::string& out_path) {
    const vlomd::MarkovGame game = vlomd::gen_game(spec);
    const std::vector<std::string> report = vlomd::validate_game(game);
    if (!report.empty()) {
        for (const auto& line : report)
            std::cerr << "invalid game: " << line << "\n";
        return 1;
    }
    vlomd::write_game_json(game, out_path);
    std::cout << "wrote " << out_path << " (N=" << game.num_agents << ", H=" << game.horizon
              << ", S=" << game.num_states << ")\n";
    return 0;
}

int cmd_run_selfplay(const vlomd::ExperimentConfig& config) {
    const vlomd::SelfPlayResult result = vlomd::run_selfplay(config);
    for (const vlomd::MetricRow& row : result.metrics) {
        std::cout << "replicate " << row.replicate << " checkpoint " << row.checkpoint
                  << ": gaps";
        for (double g : row.gaps)
            std::cout << " " << vlomd::format_double(g);
        std::cout << ", values";
        for (double v : row.values)
            std::cout << " " << vlomd::format_double(v);
        std::cout << "\n";
    }
    return 0;
}

int cmd_run_warmup(int actions_a, int actions_b, long rounds, std::uint64_t seed,
                   const std::string& out_dir) {
    const vlomd::WarmupResult result =
        vlomd::run_warmup_team(actions_a, actions_b, rounds, seed);
    std::cout << "sampled round t*=" << result.sampled_round << "\n";
    std::cout << "strategy p1:";
    for (double p : result.strategy_p1)
        std::cout << " " << vlomd::format_double(p);
    std::cout << "\nstrategy p2:";
    for (double p : result.strategy_p2)
        std::cout << " " << vlomd::format_double(p);
    std::cout << "\nne gaps: " << vlomd::format_double(result.gaps[0]) << " "
              << vlomd::format_double(result.gaps[1]) << "\n";
    std::cout << "regret p1: T/4 " << vlomd::format_double(result.regret_quarter_p1) << ", T "
              << vlomd::format_double(result.regret_full_p1) << "\n";
    std::cout << "regret p2: T/4 " << vlomd::format_double(result.regret_quarter_p2) << ", T "
              << vlomd::format_double(result.regret_full_p2) << "\n";
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(out_dir + "/warmup.csv");
        out << "round,strategy_p1,strategy_p2,gap_p1,gap_p2,regret_quarter_p1,regret_full_p1,"
               "regret_quarter_p2,regret_full_p2\n";
        out << result.sampled_round << ",\"";
        for (std::size_t i = 0; i < result.strategy_p1.size(); ++i)
            out << (i ? ";" : "") << vlomd::format_double(result.strategy_p1[i]);
        out << "\",\"";
        for (std::size_t i = 0; i < result.strategy_p2.size(); ++i)
            out << (i ? ";" : "") << vlomd::format_double(result.strategy_p2[i]);
        out << "\"," << vlomd::format_double(result.gaps[0]) << ","
            << vlomd::format_double(result.gaps[1]) << ","
            << vlomd::format_double(result.regret_quarter_p1) << ","
            << vlomd::format_double(result.regret_full_p1) << ","
            << vlomd::format_double(result.regret_quarter_p2) << ","
            << vlomd::format_double(result.regret_full_p2) << "\n";
    }
    return 0;
}

int cmd_eval_gaps(const std::string& game_path, const std::vector<std::string>& trajectories,
                  const std::string& checkpoints_spec, int replicate,
                  const std::string& out_path) {
    const vlomd::MarkovGame game = vlomd::load_game_json(game_path);
    const std::vector<vlomd::MetricRow> rows =
        vlomd::eval_gaps(game, trajectories, parse_checkpoints(checkpoints_spec), replicate);
    if (!out_path.empty())
        vlomd::write_metrics_csv(rows, game.num_agents, out_path);
    std::cout << vlomd::metrics_csv_header(game.num_agents) << "\n";
    for (const vlomd::MetricRow& row : rows) {
        std::cout << row.replicate << "," << row.checkpoint;
        for (double g : row.gaps)
            std::cout << "," << vlomd::format_double(g);
        for (double v : row.values)
            std::cout << "," << vlomd::format_double(v);
        std::cout << "\n";
    }
    return 0;
}

int cmd_verify_cce(const std::string& game_path, const std::string& dist_spec) {
    const vlomd::MarkovGame game = vlomd::looks_like_family(game_path)
                                       ? vlomd::gen_game(game_path)
                                       : vlomd::load_game_json(game_path);
    std::vector<double> dist;
    if (std::filesystem::exists(dist_spec)) {
        std::ifstream in(dist_spec);
        nlohmann::json j;
        in >> j;
        if (j.is_object() && j.contains("dist"))
            j = j["dist"];
        dist = j.get<std::vector<double>>();
    } else {
        std::istringstream ss(dist_spec);
        std::string field;
        while (std::getline(ss, field, ','))
            dist.push_back(std::stod(field));
    }
    const std::vector<double> gaps = vlomd::verify_cce_distribution(game, dist);
    std::cout << "per-agent gaps:";
    for (double g : gaps)
        std::cout << " " << vlomd::format_double(g);
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized no-regret self-play for tabular Markov games"};
    app.require_subcommand(1);

    // gen-game
    std::string gen_spec = "hawkdove", gen_out = "game.json";
    CLI::App* gen = app.add_subcommand("gen-game", "Generate a game file");
    gen->add_option("--family", gen_spec,
                    "hawkdove | random(S,A,B,H,seed) | team(A,B,seed)");
    gen->add_option("--out", gen_out, "Output JSON path");

    // run-selfplay
    vlomd::ExperimentConfig config;
    std::string checkpoints_spec, config_path;
    bool no_trajectories = false;
    CLI::App* sp = app.add_subcommand("run-selfplay", "Decentralized self-play run");
    auto* opt_game = sp->add_option("--game", config.game, "Game family or JSON path");
    auto* opt_eps = sp->add_option("--episodes", config.episodes, "Episodes per replicate");
    auto* opt_reps = sp->add_option("--replicates", config.replicates, "Replicate count");
    auto* opt_seed = sp->add_option("--seed", config.base_seed, "Base seed");
    auto* opt_ckpt = sp->add_option("--checkpoints", checkpoints_spec,
                                    "Comma-separated evaluation episodes (default: final)");
    auto* opt_c = sp->add_option("--c", config.bonus_c, "Exploration bonus constant");
    auto* opt_p = sp->add_option("--p", config.failure_prob, "Failure probability in the log factor");
    auto* opt_out = sp->add_option("--out", config.output_dir, "Output directory");
    auto* opt_notraj =
        sp->add_flag("--no-trajectories", no_trajectories, "Skip trajectory dumps");
    sp->add_option("--config", config_path, "JSON config file (flags override)");

    // run-warmup
    int warm_a = 2, warm_b = 2;
    long warm_rounds = 100000;
    std::uint64_t warm_seed = 1;
    std::string warm_out;
    CLI::App* warm = app.add_subcommand("run-warmup", "Single-stage team warm-up run");
    warm->add_option("--actions-a", warm_a, "Player 1 action count");
    warm->add_option("--actions-b", warm_b, "Player 2 action count");
    warm->add_option("--rounds", warm_rounds, "Rounds T");
    warm->add_option("--seed", warm_seed, "Seed");
    warm->add_option("--out", warm_out, "Output directory");

    // eval-gaps
    std::string eval_game, eval_ckpts, eval_out;
    std::vector<std::string> eval_trajs;
    int eval_replicate = 0;
    CLI::App* ev = app.add_subcommand("eval-gaps", "Re-evaluate trajectory dumps");
    ev->add_option("--game", eval_game, "Game JSON path")->required();
    ev->add_option("--trajectory", eval_trajs, "Trajectory CSV, one per agent")->required();
    ev->add_option("--checkpoints", eval_ckpts, "Comma-separated checkpoints (default: final)");
    ev->add_option("--replicate", eval_replicate, "Replicate id for the output rows");
    ev->add_option("--out", eval_out, "metrics.csv output path");

    // verify-cce
    std::string cce_game, cce_dist;
    CLI::App* vc = app.add_subcommand("verify-cce", "Check a joint-action distribution");
    vc->add_option("--game", cce_game, "One-shot game JSON path or family")->required();
    vc->add_option("--dist", cce_dist, "JSON file with joint distribution, or inline p0,p1,...")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen_game(gen_spec, gen_out);
        if (sp->parsed()) {
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in)
                    throw std::runtime_error("cannot open " + config_path);
                nlohmann::json j;
                in >> j;
                vlomd::ExperimentConfig from_file = config;
                if (j.contains("game") && !*opt_game)
                    from_file.game = j["game"].get<std::string>();
                if (j.contains("episodes") && !*opt_eps)
                    from_file.episodes = j["episodes"].get<long>();
                if (j.contains("replicates") && !*opt_reps)
                    from_file.replicates = j["replicates"].get<int>();
                if (j.contains("base_seed") && !*opt_seed)
                    from_file.base_seed = j["base_seed"].get<std::uint64_t>();
                if (j.contains("checkpoints") && !*opt_ckpt)
                    from_file.checkpoints = j["checkpoints"].get<std::vector<long>>();
                if (j.contains("bonus_c") && !*opt_c)
                    from_file.bonus_c = j["bonus_c"].get<double>();
                if (j.contains("failure_prob") && !*opt_p)
                    from_file.failure_prob = j["failure_prob"].get<double>();
                if (j.contains("output_dir") && !*opt_out)
                    from_file.output_dir = j["output_dir"].get<std::string>();
                if (j.contains("write_trajectories") && !*opt_notraj)
                    from_file.write_trajectories = j["write_trajectories"].get<bool>();
                config = from_file;
            }
            if (!checkpoints_spec.empty())
                config.checkpoints = parse_checkpoints(checkpoints_spec);
            if (no_trajectories)
                config.write_trajectories = false;
            return cmd_run_selfplay(config);
        }
        if (warm->parsed())
            return cmd_run_warmup(warm_a, warm_b, warm_rounds, warm_seed, warm_out);
        if (ev->parsed())
            return cmd_eval_gaps(eval_game, eval_trajs, eval_ckpts, eval_replicate, eval_out);
        if (vc->parsed())
            return cmd_verify_cce(cce_game, cce_dist);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
