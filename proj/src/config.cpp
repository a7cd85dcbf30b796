#include "marlex/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace marlex {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Section {
    const std::map<std::string, std::string>* kv;

    bool has(const std::string& key) const { return kv && kv->count(key); }
    std::string str(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        return kv->at(key);
    }
    double num(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        try {
            return std::stod(kv->at(key));
        } catch (const std::exception&) {
            throw ConfigError("config: bad numeric value for " + key);
        }
    }
    long integer(const std::string& key, long fallback) const {
        if (!has(key)) return fallback;
        try {
            return std::stol(kv->at(key));
        } catch (const std::exception&) {
            throw ConfigError("config: bad integer value for " + key);
        }
    }
    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = kv->at(key);
        if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
        if (v == "0" || v == "false" || v == "off" || v == "no") return false;
        throw ConfigError("config: bad boolean value for " + key);
    }
};

}  // namespace

IniDoc parse_ini(const std::string& text) {
    IniDoc doc;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section header at line " + std::to_string(line_no));
            section = line.substr(1, line.size() - 2);
            doc[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(line_no));
        doc[section][key] = value;
    }
    return doc;
}

std::string serialize_ini(const IniDoc& doc) {
    std::string out;
    bool first = true;
    for (const auto& [section, kv] : doc) {
        if (!first) out += "\n";
        first = false;
        out += "[" + section + "]\n";
        for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
    }
    return out;
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.finalize();
    return cfg;
}

void RunConfig::finalize() {
    reward.e_max = env.e_max();
    reward.p_threshold = env.p_threshold;
    env.step_cap = train.steps_per_episode;

    if (env.n < 3) throw ConfigError("config: environment.n must be >= 3");
    if (env.cell_len <= 0.0) throw ConfigError("config: environment.l must be > 0");
    if (env.r_d <= 0.0 || env.r_c <= 0.0) throw ConfigError("config: ranges must be > 0");
    if (env.p_threshold < 0.0 || env.p_threshold > 1.0)
        throw ConfigError("config: environment.p must be in [0,1]");
    if (reward.study_case < 1 || reward.study_case > 4)
        throw ConfigError("config: reward.study_case must be in 1..4");
    if (reward.study_case == 4 && train.n_agents < 2)
        throw ConfigError("config: study case 4 needs at least 2 agents");
    try {
        train.validate();
        reward.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (deploy.dt <= 0.0) throw ConfigError("config: deployment.dt must be > 0");
    if (deploy.rho < 0.0 || deploy.rho > 1.0) throw ConfigError("config: deployment.rho must be in [0,1]");
    if (eval_episodes < 0) throw ConfigError("config: evaluation.episodes must be >= 0");
    if (eval_step_cap < 1) throw ConfigError("config: evaluation.step_cap must be >= 1");
}

std::string config_to_text(const RunConfig& cfg) {
    IniDoc doc;
    auto& env = doc["environment"];
    env["n"] = std::to_string(cfg.env.n);
    env["l"] = fmt(cfg.env.cell_len);
    env["r_d"] = fmt(cfg.env.r_d);
    env["r_c"] = fmt(cfg.env.r_c);
    env["obstacle_count"] = std::to_string(cfg.env.obstacle_count);
    env["max_obstacle_side"] = std::to_string(cfg.env.max_obstacle_side);
    env["p"] = fmt(cfg.env.p_threshold);
    env["collision_terminates"] = cfg.env.collision_terminates ? "1" : "0";

    auto& rew = doc["reward"];
    rew["study_case"] = std::to_string(cfg.reward.study_case);
    rew["r_rep"] = fmt(cfg.reward.r_rep);
    rew["r_bou"] = fmt(cfg.reward.r_bou);
    rew["r_col"] = fmt(cfg.reward.r_col);
    rew["r_ndi"] = fmt(cfg.reward.r_ndi);
    rew["r_exp"] = fmt(cfg.reward.r_exp_min);

    auto& tr = doc["training"];
    tr["n_agents"] = std::to_string(cfg.train.n_agents);
    tr["n_e"] = std::to_string(cfg.train.n_iterations);
    tr["n_s"] = std::to_string(cfg.train.steps_per_episode);
    tr["n_b"] = std::to_string(cfg.train.batch_episodes);
    tr["epsilon"] = fmt(cfg.train.clip_eps);
    tr["epochs"] = std::to_string(cfg.train.epochs);
    tr["lr"] = fmt(cfg.train.lr);
    tr["gamma"] = fmt(cfg.train.gamma);
    tr["lambda"] = fmt(cfg.train.gae_lambda);
    tr["normalize_advantages"] = cfg.train.normalize_advantages ? "1" : "0";
    tr["entropy_coef"] = fmt(cfg.train.entropy_coef);
    tr["critic_discounted_returns"] = cfg.train.critic_discounted_returns ? "1" : "0";
    tr["seed"] = std::to_string(cfg.train.seed);
    tr["checkpoint_interval"] = std::to_string(cfg.train.checkpoint_interval);

    auto& dep = doc["deployment"];
    dep["dt"] = fmt(cfg.deploy.dt);
    dep["step_time_budget"] = fmt(cfg.deploy.step_time_budget);
    dep["sensor_range"] = fmt(cfg.deploy.sensor_range);
    dep["rho"] = fmt(cfg.deploy.rho);
    dep["step_cap"] = std::to_string(cfg.deploy.step_cap);
    dep["mask_invalid"] = cfg.deploy.mask_invalid ? "1" : "0";

    auto& ev = doc["evaluation"];
    ev["episodes"] = std::to_string(cfg.eval_episodes);
    ev["step_cap"] = std::to_string(cfg.eval_step_cap);
    ev["mask_invalid"] = cfg.eval_mask_invalid ? "1" : "0";

    return serialize_ini(doc);
}

RunConfig config_from_text(const std::string& text) {
    const IniDoc doc = parse_ini(text);
    for (const auto& [section, kv] : doc) {
        (void)kv;
        if (section != "environment" && section != "reward" && section != "training" &&
            section != "deployment" && section != "evaluation" && section != "run")
            throw ConfigError("config: unknown section [" + section + "]");
    }
    auto section = [&doc](const char* name) {
        Section s{nullptr};
        auto it = doc.find(name);
        if (it != doc.end()) s.kv = &it->second;
        return s;
    };

    RunConfig cfg;
    const Section env = section("environment");
    cfg.env.n = static_cast<int>(env.integer("n", cfg.env.n));
    cfg.env.cell_len = env.num("l", cfg.env.cell_len);
    cfg.env.r_d = env.num("r_d", cfg.env.r_d);
    cfg.env.r_c = env.num("r_c", cfg.env.r_c);
    cfg.env.obstacle_count = static_cast<int>(env.integer("obstacle_count", cfg.env.obstacle_count));
    cfg.env.max_obstacle_side =
        static_cast<int>(env.integer("max_obstacle_side", cfg.env.max_obstacle_side));
    cfg.env.p_threshold = env.num("p", cfg.env.p_threshold);
    cfg.env.collision_terminates = env.flag("collision_terminates", cfg.env.collision_terminates);

    const Section rew = section("reward");
    cfg.reward.study_case = static_cast<int>(rew.integer("study_case", cfg.reward.study_case));
    cfg.reward.r_rep = rew.num("r_rep", cfg.reward.r_rep);
    cfg.reward.r_bou = rew.num("r_bou", cfg.reward.r_bou);
    cfg.reward.r_col = rew.num("r_col", cfg.reward.r_col);
    cfg.reward.r_ndi = rew.num("r_ndi", cfg.reward.r_ndi);
    cfg.reward.r_exp_min = rew.num("r_exp", cfg.reward.r_exp_min);

    const Section tr = section("training");
    cfg.train.n_agents = static_cast<int>(tr.integer("n_agents", cfg.train.n_agents));
    cfg.train.n_iterations = tr.integer("n_e", cfg.train.n_iterations);
    cfg.train.steps_per_episode = static_cast<int>(tr.integer("n_s", cfg.train.steps_per_episode));
    cfg.train.batch_episodes = static_cast<int>(tr.integer("n_b", cfg.train.batch_episodes));
    cfg.train.clip_eps = tr.num("epsilon", cfg.train.clip_eps);
    cfg.train.epochs = static_cast<int>(tr.integer("epochs", cfg.train.epochs));
    cfg.train.lr = tr.num("lr", cfg.train.lr);
    cfg.train.gamma = tr.num("gamma", cfg.train.gamma);
    cfg.train.gae_lambda = tr.num("lambda", cfg.train.gae_lambda);
    cfg.train.normalize_advantages = tr.flag("normalize_advantages", cfg.train.normalize_advantages);
    cfg.train.entropy_coef = tr.num("entropy_coef", cfg.train.entropy_coef);
    cfg.train.critic_discounted_returns =
        tr.flag("critic_discounted_returns", cfg.train.critic_discounted_returns);
    cfg.train.seed = static_cast<std::uint64_t>(tr.integer("seed", static_cast<long>(cfg.train.seed)));
    cfg.train.checkpoint_interval = tr.integer("checkpoint_interval", cfg.train.checkpoint_interval);

    const Section dep = section("deployment");
    cfg.deploy.dt = dep.num("dt", cfg.deploy.dt);
    cfg.deploy.step_time_budget = dep.num("step_time_budget", cfg.deploy.step_time_budget);
    cfg.deploy.sensor_range = dep.num("sensor_range", cfg.deploy.sensor_range);
    cfg.deploy.rho = dep.num("rho", cfg.deploy.rho);
    cfg.deploy.step_cap = static_cast<int>(dep.integer("step_cap", cfg.deploy.step_cap));
    cfg.deploy.mask_invalid = dep.flag("mask_invalid", cfg.deploy.mask_invalid);

    const Section ev = section("evaluation");
    cfg.eval_episodes = static_cast<int>(ev.integer("episodes", cfg.eval_episodes));
    cfg.eval_step_cap = static_cast<int>(ev.integer("step_cap", cfg.eval_step_cap));
    cfg.eval_mask_invalid = ev.flag("mask_invalid", cfg.eval_mask_invalid);

    cfg.finalize();
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return config_from_text(buf.str());
}

void save_config_file(const RunConfig& cfg, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ConfigError("config: cannot open " + path + " for writing");
    os << config_to_text(cfg);
}

}  // namespace marlex
