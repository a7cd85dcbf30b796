#include "marlex/trace.hpp"

#include <cstdio>
#include <sstream>

namespace marlex {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_cells(const std::vector<Cell>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(cells[i].row) + "," + std::to_string(cells[i].col);
    }
    return out;
}

std::vector<Cell> parse_cells(const std::string& s) {
    std::vector<Cell> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ';')) {
        const auto comma = item.find(',');
        if (comma == std::string::npos) throw std::runtime_error("trace: bad cell list");
        out.push_back({std::stoi(item.substr(0, comma)), std::stoi(item.substr(comma + 1))});
    }
    return out;
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        if constexpr (std::is_same_v<T, double>) out += fmt_double(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

std::vector<long> parse_longs(const std::string& s) {
    std::vector<long> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ';')) out.push_back(std::stol(item));
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ';')) out.push_back(std::stod(item));
    return out;
}

std::string fmt_networks(const std::vector<std::vector<int>>& nets) {
    std::string out;
    for (std::size_t i = 0; i < nets.size(); ++i) {
        if (i) out += '|';
        for (std::size_t j = 0; j < nets[i].size(); ++j) {
            if (j) out += ';';
            out += std::to_string(nets[i][j]);
        }
    }
    return out;
}

std::vector<std::vector<int>> parse_networks(const std::string& s) {
    std::vector<std::vector<int>> out;
    if (s.empty()) return out;
    std::istringstream is(s);
    std::string group;
    while (std::getline(is, group, '|')) {
        std::vector<int> members;
        std::istringstream gs(group);
        std::string item;
        while (std::getline(gs, item, ';')) members.push_back(std::stoi(item));
        out.push_back(std::move(members));
    }
    return out;
}

Terminal terminal_from_name(const std::string& s) {
    if (s == "none") return Terminal::None;
    if (s == "success") return Terminal::Success;
    if (s == "collision") return Terminal::Collision;
    if (s == "step_cap") return Terminal::StepCap;
    throw std::runtime_error("trace: bad terminal name " + s);
}

std::string step_line(const EpisodeTrace::StepRecord& s) {
    std::string actions;
    for (Action a : s.actions) actions += action_char(a);
    std::string line = "step a=" + actions;
    line += " pos=" + fmt_cells(s.positions);
    line += " gain=" + fmt_list(s.gain);
    line += " comm=" + fmt_list(s.comm_gain);
    line += " reward=" + fmt_list(s.rewards);
    line += " nets=" + fmt_networks(s.networks);
    line += " cov=" + fmt_double(s.coverage);
    line += std::string(" term=") + terminal_name(s.terminal);
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(s.map_hash));
    line += std::string(" hash=") + hash;
    return line;
}

std::string field(const std::string& line, const std::string& key) {
    const std::string needle = " " + key + "=";
    auto pos = line.find(needle);
    std::size_t start;
    if (pos == std::string::npos) {
        if (line.rfind(key + "=", 0) != 0) throw std::runtime_error("trace: missing field " + key);
        start = key.size() + 1;
    } else {
        start = pos + needle.size();
    }
    const auto end = line.find(' ', start);
    return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

std::uint64_t joint_map_hash(const JointState& state) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x00000100000001b3ull;
        }
    };
    for (const AgentState& a : state.agents) {
        mix(grid_hash(a.maps.collaborative));
        mix(grid_hash(a.maps.agent_specific));
        mix(static_cast<std::uint64_t>(a.position.row) << 32 |
            static_cast<std::uint64_t>(static_cast<std::uint32_t>(a.position.col)));
    }
    return h;
}

std::string trace_to_text(const EpisodeTrace& trace) {
    std::ostringstream os;
    os << "MARLEX-TRACE 1\n";
    os << "env n=" << trace.env.n << " l=" << fmt_double(trace.env.cell_len)
       << " r_d=" << fmt_double(trace.env.r_d) << " r_c=" << fmt_double(trace.env.r_c)
       << " step_cap=" << trace.env.step_cap << " p=" << fmt_double(trace.env.p_threshold)
       << " collision_terminates=" << (trace.env.collision_terminates ? 1 : 0) << "\n";
    os << "case " << trace.reward.study_case << "\n";
    os << "agents " << trace.spawn.size() << "\n";
    os << "arena_seed " << trace.arena_seed << "\n";
    os << "arena\n" << grid_to_text(trace.arena_map) << "end_arena\n";
    os << "spawn " << fmt_cells(trace.spawn) << "\n";
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(trace.initial_hash));
    os << "init cov=" << fmt_double(trace.initial_coverage) << " hash=" << hash << "\n";
    for (const auto& s : trace.steps) os << step_line(s) << "\n";
    os << "end\n";
    return os.str();
}

EpisodeTrace trace_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "MARLEX-TRACE 1")
        throw std::runtime_error("trace: bad magic line");

    EpisodeTrace t;
    if (!std::getline(is, line) || line.rfind("env ", 0) != 0) throw std::runtime_error("trace: missing env line");
    t.env.n = std::stoi(field(line, "n"));
    t.env.cell_len = std::stod(field(line, "l"));
    t.env.r_d = std::stod(field(line, "r_d"));
    t.env.r_c = std::stod(field(line, "r_c"));
    t.env.step_cap = std::stoi(field(line, "step_cap"));
    t.env.p_threshold = std::stod(field(line, "p"));
    t.env.collision_terminates = std::stoi(field(line, "collision_terminates")) != 0;

    if (!std::getline(is, line) || line.rfind("case ", 0) != 0) throw std::runtime_error("trace: missing case line");
    t.reward.study_case = std::stoi(line.substr(5));
    t.reward.e_max = t.env.e_max();
    t.reward.p_threshold = t.env.p_threshold;

    if (!std::getline(is, line) || line.rfind("agents ", 0) != 0)
        throw std::runtime_error("trace: missing agents line");

    if (!std::getline(is, line) || line.rfind("arena_seed ", 0) != 0)
        throw std::runtime_error("trace: missing arena_seed line");
    t.arena_seed = std::stoull(line.substr(11));

    if (!std::getline(is, line) || line != "arena") throw std::runtime_error("trace: missing arena block");
    std::string grid_text;
    while (std::getline(is, line) && line != "end_arena") grid_text += line + "\n";
    t.arena_map = grid_from_text(grid_text);

    if (!std::getline(is, line) || line.rfind("spawn ", 0) != 0)
        throw std::runtime_error("trace: missing spawn line");
    t.spawn = parse_cells(line.substr(6));

    if (!std::getline(is, line) || line.rfind("init ", 0) != 0)
        throw std::runtime_error("trace: missing init line");
    t.initial_coverage = std::stod(field(line, "cov"));
    t.initial_hash = std::stoull(field(line, "hash"), nullptr, 16);

    while (std::getline(is, line)) {
        if (line == "end") break;
        if (line.rfind("step ", 0) != 0) throw std::runtime_error("trace: unexpected line: " + line);
        EpisodeTrace::StepRecord s;
        for (char c : field(line, "a")) s.actions.push_back(action_from_char(c));
        s.positions = parse_cells(field(line, "pos"));
        s.gain = parse_longs(field(line, "gain"));
        s.comm_gain = parse_longs(field(line, "comm"));
        s.rewards = parse_doubles(field(line, "reward"));
        s.networks = parse_networks(field(line, "nets"));
        s.coverage = std::stod(field(line, "cov"));
        s.terminal = terminal_from_name(field(line, "term"));
        s.map_hash = std::stoull(field(line, "hash"), nullptr, 16);
        t.steps.push_back(std::move(s));
    }
    return t;
}

JointState replay_trace(const EpisodeTrace& trace) {
    Arena arena{trace.arena_map, trace.arena_seed};
    JointState state = make_initial_state(std::move(arena), trace.spawn, trace.env);

    const double init_cov = best_free_coverage(state);
    if (fmt_double(init_cov) != fmt_double(trace.initial_coverage) ||
        joint_map_hash(state) != trace.initial_hash)
        throw ReplayDivergence(-1, "replay: initial state differs from trace");

    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& rec = trace.steps[i];
        auto [next, events] = step(state, rec.actions, trace.env);

        EpisodeTrace::StepRecord fresh;
        fresh.actions = rec.actions;
        fresh.positions = next.positions();
        for (const auto& ev : events.agents) {
            fresh.gain.push_back(ev.knowledge_gain);
            fresh.comm_gain.push_back(ev.comm_gain);
            fresh.rewards.push_back(step_reward(ev.reward_ctx, trace.reward));
        }
        for (const auto& net : events.networks)
            if (net.members.size() >= 2) fresh.networks.push_back(net.members);
        fresh.coverage = best_free_coverage(next);
        fresh.terminal = events.terminal;
        fresh.map_hash = joint_map_hash(next);

        if (step_line(fresh) != step_line(rec))
            throw ReplayDivergence(static_cast<int>(i),
                                   "replay: divergence at step " + std::to_string(i));
        state = std::move(next);
        if (state.terminal != Terminal::None) {
            if (i + 1 != trace.steps.size())
                throw ReplayDivergence(static_cast<int>(i), "replay: trace continues past terminal step");
            break;
        }
    }
    return state;
}

std::string map_to_pgm(const GridMap& m) {
    std::string out = "P2\n" + std::to_string(m.size()) + " " + std::to_string(m.size()) + "\n255\n";
    for (int r = 0; r < m.size(); ++r) {
        for (int c = 0; c < m.size(); ++c) {
            if (c) out += ' ';
            switch (m.at(r, c)) {
                case CellState::Free: out += "255"; break;
                case CellState::Occupied: out += "0"; break;
                case CellState::Unknown: out += "127"; break;
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace marlex
