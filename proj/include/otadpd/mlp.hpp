#pragma once

#include <vector>

#include "otadpd/types.hpp"

namespace otadpd {

class Rng;

// Dense stack, rectifier on hidden layers, linear last layer.
// Parameter layout per layer: W (out x in, row-major) then b.
struct MlpShape {
    std::vector<int> widths;

    std::size_t param_count() const;
    int inputs() const { return widths.front(); }
    int outputs() const { return widths.back(); }
};

// Hidden layers uniform in +-sqrt(6/fan_in), biases zero; last layer zero when
// zero_output is set.
RVec mlp_init(const MlpShape& s, Rng& rng, bool zero_output);

// Per-sample activations kept for the backward pass.
struct MlpTape {
    std::vector<RVec> act;  // act[0] = input, act[l] = output of layer l (post-rectifier for hidden)
};

void mlp_forward(const MlpShape& s, const double* params, const double* in, MlpTape& tape);

// Accumulates d(out . dout)/d(params) into dparams; optional input gradient.
void mlp_backward(const MlpShape& s, const double* params, const MlpTape& tape, const double* dout, double* dparams,
                  double* din = nullptr);

}  // namespace otadpd
