#pragma once

#include "otadpd/pa_model.hpp"
#include "otadpd/signals.hpp"
#include "otadpd/types.hpp"

namespace otadpd {

class Rng;

struct ChainConfig {
    int M = 64;
    int R = 4;
    int N = 1024;  // symbols per frame
    double roll_off = 0.1;
    int span = kDefaultSpan;
    double sample_rate = 200e6;
    double sigma_ch = 0.3;  // total complex std per sample, volts
    bool meas_noise = true;
};

// Transmitter -> PA -> AWGN -> matched filter, all at the chain sample rate.
struct Chain {
    ChainConfig cfg;
    Constellation constellation;
    PulseShape shape;
    PaModel pa;

    Chain(const ChainConfig& c, PaModel pa_model);

    // Waveform scaled to rms `drive` volts.
    Frame frame(Rng& rng, double drive) const;
    ComplexSignal amplify(const ComplexSignal& x, Rng& rng) const;
    ComplexSignal channel(const ComplexSignal& x_pa, Rng& rng) const;
    CVec receive(const ComplexSignal& y) const;
};

// Least-squares complex gain of z against known symbols s.
cplx ls_gain(const CVec& s, const CVec& z);

// Receiver gain from the previous observation, so the current batch is
// equalized by a gain that does not depend on it.
class GainTracker {
public:
    bool ready() const { return ready_; }
    cplx gain() const { return alpha_; }
    void set(cplx a) {
        alpha_ = a;
        ready_ = true;
    }
    void update(const CVec& s, const CVec& z) { set(ls_gain(s, z)); }
    CVec equalize(const CVec& z) const;

private:
    cplx alpha_{1.0, 0.0};
    bool ready_ = false;
};

}  // namespace otadpd
