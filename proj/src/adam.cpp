#include "otadpd/adam.hpp"

#include <cmath>

namespace otadpd {

void adam_step(RVec& theta, const RVec& grad, AdamState& s, const AdamConfig& cfg) {
    if (grad.size() != theta.size()) throw DomainError("adam_step: gradient size mismatch");
    if (s.m.empty()) {
        s.m.assign(theta.size(), 0.0);
        s.v.assign(theta.size(), 0.0);
    }
    if (s.m.size() != theta.size()) throw DomainError("adam_step: state size mismatch");
    ++s.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        s.m[i] = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * grad[i];
        s.v[i] = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        theta[i] -= cfg.lr * (s.m[i] / c1) / (std::sqrt(s.v[i] / c2) + cfg.eps);
    }
}

}  // namespace otadpd
