#pragma once

#include <stdexcept>
#include <vector>

namespace marlex {

// Per-step reward constants. Starred values are the shipped defaults.
struct RewardConfig {
    int study_case = 1;       // 1..4
    double r_rep = -1.0;      // stay-still penalty
    double r_bou = -1.0;      // boundary-ring penalty
    double r_col = -10.0;     // collision reward, replaces everything else
    double r_ndi = 0.2;       // subtracted when r_exp falls below r_exp_min
    double r_exp_min = 0.3;   // low-exploration threshold
    double e_max = 9.0;       // 4 * round(r_d / l) + 1
    double p_threshold = 0.9; // success coverage fraction

    void validate() const {
        if (study_case < 1 || study_case > 4)
            throw std::invalid_argument("RewardConfig: study_case must be in 1..4");
        if (e_max <= 0.0) throw std::invalid_argument("RewardConfig: e_max must be > 0");
    }
};

inline double e_max_for(double r_d, double cell_len) {
    // round() matches the padding actually used by the detection window.
    return 4.0 * static_cast<double>(static_cast<long>(r_d / cell_len + 0.5)) + 1.0;
}

// One peer's contribution to the Case-4 priority coefficient.
struct PeerCommTerm {
    int w = 0;       // peer chose Comm and its network has >= 2 members
    int q = 0;       // peer is in the same network as this agent
    long d_kj = 0;   // this agent's discoveries since last comm with the peer
};

// Everything one agent's reward depends on for a single environment step.
struct RewardContext {
    int action = 8;               // Action enum value; 8 = Stay, 9 = Comm
    bool collided = false;
    long knowledge_gain = 0;      // dM: new collaborative cells from detection
    long comm_gain = 0;           // c: new cells received in this step's merge
    int comm_indicator = 0;       // w: chose Comm and network size >= 2
    long n_unknown = 0;           // unknown cells of the pre-merge collaborative map
    long prev_step_gain = 0;      // previous step's total gain (detection + comm)
    std::vector<PeerCommTerm> peers;  // all other agents, any order
    int n_agents = 1;
    int grid_side = 1;
    bool position_changed = false;
    bool near_boundary = false;   // on the outermost ring of cells
};

double exploration_reward(const RewardContext& ctx, const RewardConfig& cfg);
double communication_reward(const RewardContext& ctx, const RewardConfig& cfg);
double p_coefficient(const RewardContext& ctx, const RewardConfig& cfg);
double step_reward(const RewardContext& ctx, const RewardConfig& cfg);

// Individual terms, exposed for the per-episode reward trace.
struct RewardBreakdown {
    double r_exp = 0, r_com = 0, p_k = 1, r_rep = 0, r_bou = 0, r_ndi = 0, total = 0;
};
RewardBreakdown step_reward_terms(const RewardContext& ctx, const RewardConfig& cfg);

}  // namespace marlex
