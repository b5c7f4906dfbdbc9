#pragma once

#include <limits>

#include "otadpd/gmp.hpp"
#include "otadpd/types.hpp"

namespace otadpd {

class Rng;

enum class PaKind { Gmp, LinearClipping };

struct PaModel {
    PaKind kind = PaKind::Gmp;
    // GMP
    GmpConfig cfg;
    CVec coeffs;
    // Inputs above this magnitude are clipped (phase kept) before the polynomial.
    double input_ceiling = std::numeric_limits<double>::infinity();
    // LinearClipping; for GMP x_sat only records the modeled saturation level
    double gain = 1.0;
    double x_sat = std::numeric_limits<double>::infinity();

    double sigma_meas = 0.0;

    int memory() const;
    void validate() const;

    static PaModel linear_clipping(double gain, double x_sat, double sigma_meas = 0.0);
    static PaModel gmp(const GmpConfig& cfg, CVec coeffs, double sigma_meas = 0.0);
};

// Noise-free PA response.
ComplexSignal pa_forward_clean(const ComplexSignal& x, const PaModel& pa);
// Adds circular Gaussian measurement noise with variance sigma_meas^2.
ComplexSignal pa_forward(const ComplexSignal& x, const PaModel& pa, Rng& rng);

// The saturating memory PA that the reference GMP is identified from:
// 3-tap FIR, then Rapp AM/AM (smoothness 2, unit small-signal gain) and a
// saturating AM/PM.
struct CanonicalPa {
    double x_sat = 20.9;
    double smoothness = 2.0;
    double am_pm_rad = 0.12;
    CVec fir{cplx(1.0, 0.0), 0.06 * std::polar(1.0, 0.5), cplx(0.0, -0.03)};
};

CVec canonical_pa(const CVec& x, const CanonicalPa& p = {});

struct ReferencePaInfo {
    double fit_nmse_db = 0.0;
};

constexpr double kReferenceSat = 20.9;
constexpr double kReferenceMeasNoise = 0.053;
constexpr double kReferenceCeiling = 60.0;

// Deterministic in `seed`. Throws if the GMP fit is worse than -35 dB.
PaModel make_reference_pa(std::uint64_t seed, ReferencePaInfo* info = nullptr);

}  // namespace otadpd
