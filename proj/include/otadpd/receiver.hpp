#pragma once

#include "otadpd/adam.hpp"
#include "otadpd/mlp.hpp"
#include "otadpd/signals.hpp"
#include "otadpd/types.hpp"

namespace otadpd {

class Rng;

enum class DemapperKind { Ml, Nn };

// Per-symbol noise variance seen while the DPD trains: exploration power
// sigma_pi^2 = 0.08 per sample, spread over R = 4 samples per symbol.
constexpr double kDefaultDemapNoiseVar = 0.02;

struct Demapper {
    DemapperKind kind = DemapperKind::Ml;
    Constellation constellation;
    double noise_var = kDefaultDemapNoiseVar;  // ML
    MlpShape net;                              // NN: [2, 32, 32, M], softmax on the output
    RVec params;
};

Demapper make_ml_demapper(const Constellation& c, double noise_var = kDefaultDemapNoiseVar);
Demapper make_nn_demapper(const Constellation& c, Rng& rng);

ProbabilityMatrix demap(const CVec& z, const Demapper& d);

// Row-wise argmax; ties go to the lowest index.
MessageSequence decide(const ProbabilityMatrix& P);

// decide(demap(z)) without building the probability matrix. The ML argmax is
// the nearest constellation point.
MessageSequence demap_decide(const CVec& z, const Demapper& d);

struct CeLoss {
    RVec per_example;
    double mean = 0.0;
};

constexpr double kCeFloor = 1e-12;

// l[n] = -ln(P[n][m[n]] + 1e-12)
CeLoss ce_loss(const MessageSequence& m, const ProbabilityMatrix& P);

struct PretrainConfig {
    // Noise variance per symbol drawn log-uniformly from [lo, hi].
    double noise_var_lo = kDefaultDemapNoiseVar;
    double noise_var_hi = kDefaultDemapNoiseVar;
    int batch = 512;
    int steps = 6000;
    double lr = 3e-3;
    double lr_final = 5e-5;
    int holdout = 100000;
    double tolerance = 0.02;  // CE(NN) <= (1 + tolerance) CE(ML)
    int max_rounds = 3;       // extra passes at a low rate if the target is missed
};

struct PretrainReport {
    double ce_nn = 0.0;
    double ce_ml = 0.0;
    int rounds = 0;
};

Demapper pretrain_demapper(const Constellation& c, const PretrainConfig& cfg, Rng& rng,
                           PretrainReport* report = nullptr);

// Mean CE of a demapper on AWGN-corrupted symbols.
double demapper_ce(const Demapper& d, const MessageSequence& m, const CVec& z);

}  // namespace otadpd
