#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "otadpd/io.hpp"

namespace otadpd {

// Every field has a default; the chain defaults are M=64, R=4, N=1024, G=3,
// sigma_pi^2=0.08, sigma_ch=0.3.
struct ExperimentConfig {
    std::string name;  // run directory name; derived from the hash when empty

    int M = 64;
    int R = 4;
    int N = 1024;
    double roll_off = 0.1;
    int span = 96;
    double sample_rate = 200e6;
    double sigma_ch = 0.3;

    int N_B = 2000;
    int G = 3;
    double sigma_pi2 = 0.08;
    double lr = 1e-3;
    bool baseline = false;
    bool normalization_aware = true;
    int checkpoint_every = 0;

    std::uint64_t pa_seed = 7;
    std::string pa_file;  // overrides pa_seed when set
    bool meas_noise_train = true;
    bool meas_noise_eval = true;

    std::string dpd_kind = "gmp";  // gmp | r2tdnn
    double dpd_amplitude_ref = 25.0;
    std::string trainer = "rl";    // rl | ila
    double adc_rate = 200e6;
    int ila_iters = 3;
    int ila_symbols = 8192;
    double ila_ridge = 1e-6;

    std::string demapper = "ml";  // ml | nn
    double demapper_noise_var = 0.02;

    std::vector<double> power_targets_dbm{24.0, 26.0, 28.0, 29.0, 30.0, 30.5, 31.0, 31.5, 32.0};
    std::optional<double> train_power_dbm;  // highest sweep target when unset
    double operating_point_dbm = 30.2;
    long eval_symbols = 1000000;
    int spectrum_frames = 32;

    std::uint64_t seed = 1;

    double training_power() const;
    void validate() const;
};

Json config_to_json(const ExperimentConfig& c);
// Missing fields keep their defaults; unknown fields are a ConfigError.
ExperimentConfig config_from_json(const Json& j);
std::string config_hash(const ExperimentConfig& c);

// $OTADPD_RUN_ROOT or ./runs
std::filesystem::path run_root();
std::filesystem::path run_dir(const ExperimentConfig& c);

enum class Stage { FitPa, PretrainDemapper, Train, Evaluate, Sweep };

std::string stage_name(Stage s);

// Runs the stages in order inside the run directory, updating manifest.json.
// On failure writes FAILED (with the message) and rethrows.
std::filesystem::path run(const ExperimentConfig& c, const std::vector<Stage>& stages);
std::filesystem::path run(const ExperimentConfig& c, const std::vector<Stage>& stages,
                          const std::filesystem::path& dir);

// Columns: scheme,target_dbm,p_out_dbm,ser,symbols,nmse_db,acpr_dbc,es_n0_db,theory_ser,drive_v,flag
struct SweepRow {
    std::string scheme;
    double target_dbm = 0.0;
    double p_out_dbm = 0.0;
    double ser = 0.0;
    long symbols = 0;
    double nmse_db = 0.0;
    double acpr_dbc = 0.0;
    double es_n0_db = 0.0;
    double theory_ser = 0.0;
    double drive = 0.0;
    std::string flag;  // empty, or "unreachable"
};

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& p);

constexpr const char* kCodeVersion = "otadpd 1.0.0";

}  // namespace otadpd
