#pragma once

#include <vector>

#include "otadpd/dpd_model.hpp"
#include "otadpd/pa_model.hpp"
#include "otadpd/train_record.hpp"
#include "otadpd/types.hpp"

namespace otadpd {

class Rng;

struct FeedbackAdc {
    double rate = 200e6;  // Hz, no quantization
};

// Samples x_pa at the ADC rate with no anti-alias filter (the frame is read
// cyclically), then interpolates back to the signal's rate. Identity when the
// ADC runs at the signal rate.
ComplexSignal feedback_capture(const ComplexSignal& x_pa, const FeedbackAdc& adc);

// The ADC samples alone, at adc.rate.
ComplexSignal adc_sample(const ComplexSignal& x_pa, const FeedbackAdc& adc);

struct IlaConfig {
    int iters = 3;
    double ridge = 1e-6;
    // Divide the capture by its LS gain against x before it enters the postdistorter.
    bool gain_normalize = true;
    // R2TDNN postdistorter
    int nn_steps = 1500;
    int nn_batch = 256;
    double nn_lr = 1e-3;
};

struct IlaResult {
    DpdModel model;
    std::vector<TrainRecord> records;  // loss = postdistorter residual MSE (V^2)
    std::vector<double> post_mse;
};

IlaResult ila_train(const ComplexSignal& u, const PaModel& pa, const FeedbackAdc& adc, DpdModel model,
                    const IlaConfig& cfg, Rng& rng);

}  // namespace otadpd
