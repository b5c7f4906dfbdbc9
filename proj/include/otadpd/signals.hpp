#pragma once

#include "otadpd/types.hpp"

namespace otadpd {

// Square QAM, Gray labeled per axis, unit average energy.
// points[i] is the symbol for message i; labeling is the identity map and
// each message's bit pattern is (gray row bits, gray column bits).
struct Constellation {
    int order = 0;
    CVec points;
    std::vector<int> labeling;  // message -> index into points

    int side() const;
};

Constellation make_qam(int M);

CVec map_messages(const MessageSequence& m, const Constellation& c);

// Index of the nearest constellation point.
int nearest_point(cplx z, const Constellation& c);

struct PulseShape {
    RVec taps;
    int span_symbols = 0;
    int oversampling = 0;
    double roll_off = 0.0;

    int delay() const { return static_cast<int>(taps.size() / 2); }
};

constexpr int kDefaultSpan = 96;

PulseShape rrc_taps(double beta, int span_symbols, int R);

// Zero insertion by R and filtering with the taps. The frame is treated as one
// period of a cyclic sequence, so sample nR carries symbol n for every n.
ComplexSignal modulate(const CVec& symbols, const PulseShape& shape, double sample_rate);

// Matched filter (same taps, cyclic), then every R-th sample.
CVec matched_filter_downsample(const ComplexSignal& y, const PulseShape& shape);

double mean_power(const CVec& x);

// 10 log10(mean|x|^2 / (2*50) * 1000): envelope volts into 50 ohm.
double measure_power_dbm(const ComplexSignal& x);
double measure_papr(const ComplexSignal& x);

double dbm_to_mean_square(double dbm);

}  // namespace otadpd

namespace otadpd {

class Rng;

// One random frame: messages, symbols, and the shaped waveform scaled to unit
// mean power (sqrt(R) times the modulate output).
struct Frame {
    MessageSequence m;
    CVec symbols;
    ComplexSignal u;
};

Frame make_frame(int N, const Constellation& c, const PulseShape& shape, double sample_rate, Rng& rng);

}  // namespace otadpd
