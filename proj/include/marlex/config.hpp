#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "marlex/deploy.hpp"
#include "marlex/env.hpp"
#include "marlex/happo.hpp"
#include "marlex/rewards.hpp"

namespace marlex {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Full run configuration. The shipped defaults are the paper-scale values;
// serialized as a sectioned key = value document, re-loadable as-is, so a
// run's manifest can reproduce the run byte for byte.
struct RunConfig {
    EnvConfig env;            // [environment]
    RewardConfig reward;      // [reward]
    TrainConfig train;        // [training]
    DeploymentConfig deploy;  // [deployment]

    // [evaluation]
    int eval_episodes = 100;
    int eval_step_cap = 1000;
    bool eval_mask_invalid = true;

    void finalize();  // derives e_max and mirrored fields, then validates
};

RunConfig default_config();

std::string config_to_text(const RunConfig& cfg);
RunConfig config_from_text(const std::string& text);

RunConfig load_config_file(const std::string& path);
void save_config_file(const RunConfig& cfg, const std::string& path);

// Low-level document access, shared with the manifest writer.
using IniDoc = std::map<std::string, std::map<std::string, std::string>>;
IniDoc parse_ini(const std::string& text);
std::string serialize_ini(const IniDoc& doc);

}  // namespace marlex
