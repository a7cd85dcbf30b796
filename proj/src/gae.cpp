#include "marlex/gae.hpp"

#include <stdexcept>

namespace marlex {

GaeResult compute_gae(const std::vector<double>& values, const std::vector<double>& rewards,
                      const std::vector<bool>& dones, double gamma, double lambda) {
    const std::size_t T = rewards.size();
    if (values.size() != T || dones.size() != T)
        throw std::invalid_argument("compute_gae: sequences must be aligned");

    GaeResult out;
    out.advantages.assign(T, 0.0);
    out.returns.assign(T, 0.0);
    double carry = 0.0;
    for (std::size_t i = T; i-- > 0;) {
        const double not_done = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < T) ? values[i + 1] : 0.0;
        const double delta = rewards[i] + gamma * next_value * not_done - values[i];
        carry = delta + gamma * lambda * not_done * carry;
        out.advantages[i] = carry;
        out.returns[i] = carry + values[i];
    }
    return out;
}

}  // namespace marlex
