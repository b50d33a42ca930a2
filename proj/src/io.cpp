#include "vlomd/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace vlomd {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_game_json(const MarkovGame& game, const std::string& path) {
    nlohmann::json j;
    j["num_agents"] = game.num_agents;
    j["horizon"] = game.horizon;
    j["num_states"] = game.num_states;
    j["action_counts"] = game.action_counts;
    j["initial_state"] = game.initial_state;

    const int ja_count = game.num_joint_actions();
    nlohmann::json rewards = nlohmann::json::array();
    nlohmann::json transitions = nlohmann::json::array();
    for (int h = 0; h < game.horizon; ++h) {
        nlohmann::json rh = nlohmann::json::array(), th = nlohmann::json::array();
        for (int s = 0; s < game.num_states; ++s) {
            nlohmann::json rs = nlohmann::json::array(), ts = nlohmann::json::array();
            for (int ja = 0; ja < ja_count; ++ja) {
                nlohmann::json ra = nlohmann::json::array(), ta = nlohmann::json::array();
                for (int i = 0; i < game.num_agents; ++i)
                    ra.push_back(game.reward(h, s, ja, i));
                for (int s2 = 0; s2 < game.num_states; ++s2)
                    ta.push_back(game.transition(h, s, ja, s2));
                rs.push_back(std::move(ra));
                ts.push_back(std::move(ta));
            }
            rh.push_back(std::move(rs));
            th.push_back(std::move(ts));
        }
        rewards.push_back(std::move(rh));
        transitions.push_back(std::move(th));
    }
    j["rewards"] = std::move(rewards);
    j["transitions"] = std::move(transitions);

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

MarkovGame load_game_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": JSON parse error: " + e.what());
    }

    MarkovGame game;
    try {
        game.num_agents = j.at("num_agents").get<int>();
        game.horizon = j.at("horizon").get<int>();
        game.num_states = j.at("num_states").get<int>();
        game.action_counts = j.at("action_counts").get<std::vector<int>>();
        game.initial_state = j.at("initial_state").get<int>();
        if (game.num_agents < 1 || game.horizon < 1 || game.num_states < 1 ||
            static_cast<int>(game.action_counts.size()) != game.num_agents)
            throw std::runtime_error(path + ": inconsistent dimensions");
        game.allocate();
        const int ja_count = game.num_joint_actions();
        const auto& rewards = j.at("rewards");
        const auto& transitions = j.at("transitions");
        for (int h = 0; h < game.horizon; ++h) {
            for (int s = 0; s < game.num_states; ++s) {
                for (int ja = 0; ja < ja_count; ++ja) {
                    const auto& ra = rewards.at(h).at(s).at(ja);
                    const auto& ta = transitions.at(h).at(s).at(ja);
                    for (int i = 0; i < game.num_agents; ++i)
                        game.reward_ref(h, s, ja, i) = ra.at(i).get<double>();
                    for (int s2 = 0; s2 < game.num_states; ++s2)
                        game.transition_ref(h, s, ja, s2) = ta.at(s2).get<double>();
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": malformed game file: " + e.what());
    }

    game.normalize_transitions();
    const std::vector<std::string> report = validate_game(game);
    if (!report.empty()) {
        std::string msg = path + ": invalid game:";
        for (const auto& line : report)
            msg += "\n  " + line;
        throw std::runtime_error(msg);
    }
    return game;
}

void write_trajectory_csv(const TrajectoryStore& store, int agent, const std::string& path) {
    if (agent < 0 || agent >= store.num_agents)
        throw std::out_of_range("write_trajectory_csv: invalid agent");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out << "k,h,s";
    for (int a = 0; a < store.action_counts[agent]; ++a)
        out << ",theta_" << a;
    out << "\n";

    // Rows in episode order: collect (k, h, s, visit index) and sort by (k, h).
    struct Row {
        long k;
        int h, s;
        std::size_t visit;
    };
    std::vector<Row> rows;
    for (int h = 0; h < store.horizon; ++h)
        for (int s = 0; s < store.num_states; ++s) {
            const auto& vl = store.at(h, s);
            for (std::size_t v = 0; v < vl.episodes.size(); ++v)
                rows.push_back({vl.episodes[v], h, s, v});
        }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.k != b.k ? a.k < b.k : a.h < b.h;
    });
    for (const Row& r : rows) {
        out << r.k << "," << r.h + 1 << "," << r.s;
        for (double p : store.at(r.h, r.s).snapshots[agent][r.visit])
            out << "," << format_double(p);
        out << "\n";
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.push_back("");
    return fields;
}

double parse_double(const std::string& s, const std::string& context) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error(context + ": cannot parse number '" + s + "'");
    return x;
}

}  // namespace

TrajectoryStore load_trajectory_csvs(const std::vector<std::string>& paths,
                                     const MarkovGame& game) {
    if (static_cast<int>(paths.size()) != game.num_agents)
        throw std::runtime_error("expected one trajectory file per agent");

    struct ParsedRow {
        long k;
        int h, s;
        std::vector<double> theta;
    };
    // Per agent: (k, h) -> (s, theta)
    std::vector<std::map<std::pair<long, int>, ParsedRow>> per_agent(game.num_agents);
    long max_k = 0;
    for (int i = 0; i < game.num_agents; ++i) {
        std::ifstream in(paths[i]);
        if (!in)
            throw std::runtime_error("cannot open " + paths[i]);
        std::string line;
        if (!std::getline(in, line))
            throw std::runtime_error(paths[i] + ": empty file");
        long line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty())
                continue;
            const std::vector<std::string> fields = split_csv_line(line);
            const std::string ctx = paths[i] + ":" + std::to_string(line_no);
            if (static_cast<int>(fields.size()) != 3 + game.action_counts[i])
                throw std::runtime_error(ctx + ": expected " +
                                         std::to_string(3 + game.action_counts[i]) +
                                         " fields, got " + std::to_string(fields.size()));
            ParsedRow row;
            row.k = static_cast<long>(parse_double(fields[0], ctx));
            row.h = static_cast<int>(parse_double(fields[1], ctx)) - 1;
            row.s = static_cast<int>(parse_double(fields[2], ctx));
            if (row.k < 1 || row.h < 0 || row.h >= game.horizon || row.s < 0 ||
                row.s >= game.num_states)
                throw std::runtime_error(ctx + ": (k=" + std::to_string(row.k) +
                                         ", h=" + std::to_string(row.h + 1) +
                                         ", s=" + std::to_string(row.s) + ") out of range");
            for (int a = 0; a < game.action_counts[i]; ++a)
                row.theta.push_back(parse_double(fields[3 + a], ctx));
            max_k = std::max(max_k, row.k);
            if (!per_agent[i].emplace(std::make_pair(row.k, row.h), row).second)
                throw std::runtime_error(ctx + ": duplicate row for (k=" +
                                         std::to_string(row.k) +
                                         ", h=" + std::to_string(row.h + 1) + ")");
        }
    }

    // Cross-validate completeness and state agreement, then fold into a store.
    TrajectoryStore store = TrajectoryStore::for_game(game);
    for (long k = 1; k <= max_k; ++k) {
        for (int h = 0; h < game.horizon; ++h) {
            std::vector<std::vector<double>> rows(game.num_agents);
            int state = -1;
            for (int i = 0; i < game.num_agents; ++i) {
                const auto it = per_agent[i].find({k, h});
                if (it == per_agent[i].end())
                    throw std::runtime_error(paths[i] + ": missing row for (k=" +
                                             std::to_string(k) + ", h=" +
                                             std::to_string(h + 1) + ")");
                if (state < 0)
                    state = it->second.s;
                else if (state != it->second.s)
                    throw std::runtime_error("trajectory files disagree on the state at (k=" +
                                             std::to_string(k) + ", h=" +
                                             std::to_string(h + 1) + "): s=" +
                                             std::to_string(state) + " vs s=" +
                                             std::to_string(it->second.s));
                rows[i] = it->second.theta;
            }
            if (h == 0 && state != game.initial_state)
                throw std::runtime_error("episode " + std::to_string(k) +
                                         " does not start at the initial state");
            store.add_visit(k, h, state, rows);
        }
    }
    store.num_episodes = max_k;
    return store;
}

}  // namespace vlomd
