#include "marlex/rng.hpp"

#include <sstream>

namespace marlex {

std::string Rng::save_state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void Rng::load_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
}

}  // namespace marlex
