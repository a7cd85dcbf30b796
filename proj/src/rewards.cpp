#include "marlex/rewards.hpp"

namespace marlex {

namespace {

constexpr int kActionComm = 9;

}  // namespace

double exploration_reward(const RewardContext& ctx, const RewardConfig& cfg) {
    return static_cast<double>(ctx.knowledge_gain) / cfg.e_max;
}

double communication_reward(const RewardContext& ctx, const RewardConfig& cfg) {
    if (ctx.comm_indicator == 0) return 0.0;
    if (cfg.study_case == 4) return static_cast<double>(ctx.comm_gain) / cfg.e_max;
    if (ctx.n_unknown == 0) return 0.0;  // fully explored map
    return static_cast<double>(ctx.comm_gain) / static_cast<double>(ctx.n_unknown);
}

double p_coefficient(const RewardContext& ctx, const RewardConfig& cfg) {
    switch (cfg.study_case) {
        case 3:
            return static_cast<double>(ctx.prev_step_gain) / cfg.e_max + 0.6;
        case 4: {
            if (ctx.n_agents < 2) return 0.8;
            double sum = 0.0;
            const double n2 = static_cast<double>(ctx.grid_side) * static_cast<double>(ctx.grid_side);
            for (const PeerCommTerm& p : ctx.peers)
                sum += static_cast<double>(p.w) * static_cast<double>(p.q) *
                       static_cast<double>(p.d_kj) / n2;
            return sum / static_cast<double>(ctx.n_agents - 1) + 0.8;
        }
        default:
            return 1.0;
    }
}

RewardBreakdown step_reward_terms(const RewardContext& ctx, const RewardConfig& cfg) {
    RewardBreakdown b;
    if (ctx.collided) {
        b.total = cfg.r_col;
        return b;
    }
    b.r_exp = exploration_reward(ctx, cfg);
    b.r_rep = (!ctx.position_changed && ctx.action != kActionComm) ? cfg.r_rep : 0.0;
    b.r_bou = ctx.near_boundary ? cfg.r_bou : 0.0;
    b.r_ndi = (b.r_exp < cfg.r_exp_min) ? -cfg.r_ndi : 0.0;
    b.r_com = communication_reward(ctx, cfg);
    b.p_k = p_coefficient(ctx, cfg);

    switch (cfg.study_case) {
        case 1:
            b.total = b.r_exp + b.r_rep + b.r_bou + b.r_ndi;
            break;
        case 2:
            b.total = b.r_exp + b.r_com + b.r_rep + b.r_bou + b.r_ndi;
            break;
        case 3:
            b.total = b.r_exp + b.p_k * b.r_com + b.r_rep + b.r_bou + b.r_ndi;
            break;
        case 4:
            b.total = b.r_exp + b.p_k * b.r_com + b.r_rep;
            break;
        default:
            throw std::invalid_argument("step_reward: study_case must be in 1..4");
    }
    return b;
}

double step_reward(const RewardContext& ctx, const RewardConfig& cfg) {
    return step_reward_terms(ctx, cfg).total;
}

}  // namespace marlex
