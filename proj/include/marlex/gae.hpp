#pragma once

#include <vector>

namespace marlex {

// Generalized Advantage Estimation over one episode:
//   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
//   R_t     = A_t + V(s_t)
// The bootstrap value past the final transition is zero.
struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

GaeResult compute_gae(const std::vector<double>& values, const std::vector<double>& rewards,
                      const std::vector<bool>& dones, double gamma, double lambda);

}  // namespace marlex
