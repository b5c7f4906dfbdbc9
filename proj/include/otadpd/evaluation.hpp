#pragma once

#include <cstdint>

#include "otadpd/chain.hpp"
#include "otadpd/dpd_model.hpp"
#include "otadpd/metrics.hpp"
#include "otadpd/receiver.hpp"

namespace otadpd {

struct EvalConfig {
    long symbols = 1000000;
    int power_frames = 16;      // fixed frames used to measure P_out while searching the drive
    double power_tol_db = 0.02;
    int max_bisection = 40;
    int spectrum_frames = 32;   // frames averaged for ACPR and the error spectrum
};

struct DriveSearch {
    double drive = 0.0;  // rms of u, volts
    double achieved_dbm = 0.0;
    int steps = 0;
    bool converged = false;
};

// Mean PA output power (noise free) over the power-search frames at `drive`.
double output_power_dbm(const Chain& chain, const DpdModel* dpd, double drive, const EvalConfig& cfg,
                        std::uint64_t seed);

// Bisection on log(drive) until P_out is within power_tol_db of the target.
DriveSearch find_drive(const Chain& chain, const DpdModel* dpd, double target_dbm, const EvalConfig& cfg,
                       std::uint64_t seed);

struct PointResult {
    double drive = 0.0;
    double p_out_dbm = 0.0;
    double ser = 0.0;
    long symbols = 0;
    double nmse_db = 0.0;
    double acpr_dbc = 0.0;
    double es_n0_db = 0.0;  // |alpha|^2 / sigma_ch^2 per symbol, alpha = receiver gain
    double theory_ser = 0.0;
};

// SER over cfg.symbols (receiver gain fixed from one extra calibration frame),
// NMSE of the PA output against u, ACPR and the averaged error spectrum.
PointResult evaluate_point(const Chain& chain, const DpdModel* dpd, const Demapper& demapper, double drive,
                           const EvalConfig& cfg, std::uint64_t seed, SpectrumEstimate* err_spectrum = nullptr);

}  // namespace otadpd
