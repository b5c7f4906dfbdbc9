#pragma once

#include <iosfwd>
#include <string>

#include "otadpd/types.hpp"

namespace otadpd {

double ser(const MessageSequence& m, const MessageSequence& m_hat);

double q_function(double x);
// Square M-QAM with Gray mapping, EsN0 linear.
double theoretical_ser_qam(int M, double es_n0);

constexpr double kNmseFloorDb = -200.0;

// Complex gain fitted so that the error is orthogonal to the reference.
cplx fitted_gain(const CVec& y, const CVec& y_ref);
double nmse_db(const CVec& y, const CVec& y_ref);

struct WelchConfig {
    int nfft = 1024;
    double overlap = 0.5;
};

// Two-sided PSD, frequencies ascending from -fs/2; psd in V^2/Hz (linear) and dB.
struct SpectrumEstimate {
    RVec freq_hz;
    RVec psd;
    RVec psd_db;
    double sample_rate = 0.0;
    int nfft = 0;
    int segments = 0;

    double bin_width() const { return sample_rate / nfft; }
    double integrate(double f_lo, double f_hi) const;  // closed band
    double total_power() const;
    void write_csv(std::ostream& os) const;
};

// Hann window, periodic, segments of nfft with the given overlap.
SpectrumEstimate welch_psd(const ComplexSignal& x, const WelchConfig& cfg = {});

// Average of per-signal Welch estimates (all signals at the same rate).
SpectrumEstimate welch_average(const std::vector<SpectrumEstimate>& parts);

constexpr double kAcprBandwidth = 55e6;
constexpr double kAcprSpacing = 55e6;

double acpr_from_psd(const SpectrumEstimate& s, double bw = kAcprBandwidth, double spacing = kAcprSpacing);
double acpr(const ComplexSignal& x, double bw = kAcprBandwidth, double spacing = kAcprSpacing);

// PSD of x_actual - alpha x_ideal in dB relative to the in-band peak of
// alpha x_ideal's PSD; `psd` keeps the absolute error PSD.
SpectrumEstimate error_spectrum(const ComplexSignal& x_actual, const ComplexSignal& x_ideal,
                                double bw = kAcprBandwidth, const WelchConfig& cfg = {});

}  // namespace otadpd
