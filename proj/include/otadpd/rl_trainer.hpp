#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "otadpd/adam.hpp"
#include "otadpd/chain.hpp"
#include "otadpd/dpd_model.hpp"
#include "otadpd/receiver.hpp"
#include "otadpd/train_record.hpp"
#include "otadpd/types.hpp"

namespace otadpd {

class Rng;

struct PolicyConfig {
    double sigma2 = 0.08;  // exploration variance relative to a unit-power signal
    int G = 3;             // samples on each side of nR that share symbol n's loss

    void validate() const;
};

struct EstimatorOptions {
    // Subtract the batch-mean loss before weighting the score function.
    bool baseline = false;
    // Include the derivative of the per-batch output normalization. When off,
    // the scale is treated as a constant.
    bool normalization_aware = true;
};

struct RlTrainConfig {
    int N = 1024;
    int NB = 2000;
    AdamConfig adam{};
    std::uint64_t seed = 1;
    double drive = 10.0;  // rms of u, volts
    EstimatorOptions estimator{};
    int checkpoint_every = 0;
    int calibration_frames = 8;
};

// x~ = sqrt(1 - s2) x + w, w circular Gaussian with variance s2.
ComplexSignal policy_sample(const ComplexSignal& x, double sigma2, Rng& rng);

// (2 sqrt(1-s2)/s2) [Re e, Im e] J, with e = x~ - sqrt(1-s2) x.
RVec log_policy_grad(cplx x_tilde, cplx x, const Jacobian& jac, double sigma2);

// Score-function gradient of the mean per-symbol loss.
// x_tilde and x live in the policy domain: the DPD output divided by rms(u).
// u is the DPD input in volts (length N R), losses has one entry per symbol.
RVec policy_gradient_estimate(const RVec& losses, const ComplexSignal& x_tilde, const ComplexSignal& x,
                              const ComplexSignal& u, const DpdModel& model, const PolicyConfig& cfg,
                              const EstimatorOptions& opt = {});

// Same quantity assembled sample by sample from dpd_param_jacobian and
// log_policy_grad with the scale held constant. Slow; used for cross-checks.
RVec policy_gradient_reference(const RVec& losses, const ComplexSignal& x_tilde, const ComplexSignal& x,
                               const ComplexSignal& u, const DpdModel& model, const PolicyConfig& cfg,
                               bool baseline = false);

struct RlResult {
    DpdModel model;
    std::vector<TrainRecord> records;
};

// Thrown on a non-finite loss or gradient; carries the last finite parameters.
struct RlAbort : TrainingError {
    RlAbort(const std::string& what, DpdModel last) : TrainingError(what), last_good(std::move(last)) {}
    DpdModel last_good;
};

using CheckpointFn = std::function<void(int iteration, const DpdModel&)>;

// Trains at cfg.drive; returns the deterministic DPD with its normalization
// scale frozen on fresh calibration frames.
RlResult rl_train(const Chain& chain, DpdModel model, const RlTrainConfig& cfg, const PolicyConfig& policy,
                  const Demapper& demapper, const CheckpointFn& on_checkpoint = {});

}  // namespace otadpd
