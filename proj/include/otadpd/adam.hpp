#pragma once

#include "otadpd/types.hpp"

namespace otadpd {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    RVec m, v;
    long t = 0;
};

// In place: bias-corrected Adam step on theta.
void adam_step(RVec& theta, const RVec& grad, AdamState& state, const AdamConfig& cfg = {});

}  // namespace otadpd
