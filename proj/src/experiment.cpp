#include "otadpd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "otadpd/chain.hpp"
#include "otadpd/evaluation.hpp"
#include "otadpd/ila.hpp"
#include "otadpd/rl_trainer.hpp"
#include "otadpd/rng.hpp"

namespace otadpd {

namespace fs = std::filesystem;

double ExperimentConfig::training_power() const {
    if (train_power_dbm) return *train_power_dbm;
    if (power_targets_dbm.empty()) return operating_point_dbm;
    return *std::max_element(power_targets_dbm.begin(), power_targets_dbm.end());
}

void ExperimentConfig::validate() const {
    auto need = [](bool ok, const char* field, const char* what) {
        if (!ok) throw ConfigError(field, what);
    };
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
    need(M >= 4 && side * side == M, "M", "must be a square QAM order >= 4");
    need(R >= 2, "R", "must be >= 2");
    need(N >= 1, "N", "must be positive");
    need(roll_off >= 0.0 && roll_off <= 1.0, "roll_off", "must lie in [0, 1]");
    need(span >= 8, "span", "must be >= 8");
    need(sample_rate > 0.0, "sample_rate", "must be positive");
    need(sigma_ch >= 0.0, "sigma_ch", "must be non-negative");
    need(N_B >= 1, "N_B", "must be positive");
    need(G >= 0, "G", "must be non-negative");
    need(sigma_pi2 > 0.0 && sigma_pi2 < 1.0, "sigma_pi2", "must lie in (0, 1)");
    need(lr > 0.0, "lr", "must be positive");
    need(dpd_kind == "gmp" || dpd_kind == "r2tdnn", "dpd_kind", "must be gmp or r2tdnn");
    need(dpd_amplitude_ref > 0.0, "dpd_amplitude_ref", "must be positive");
    need(trainer == "rl" || trainer == "ila", "trainer", "must be rl or ila");
    need(adc_rate > 0.0 && adc_rate <= sample_rate, "adc_rate", "must lie in (0, sample_rate]");
    need(ila_iters >= 1, "ila_iters", "must be positive");
    need(ila_symbols >= 64, "ila_symbols", "must be >= 64");
    need(ila_ridge >= 0.0, "ila_ridge", "must be non-negative");
    need(demapper == "ml" || demapper == "nn", "demapper", "must be ml or nn");
    need(demapper_noise_var > 0.0, "demapper_noise_var", "must be positive");
    need(eval_symbols >= 1, "eval_symbols", "must be positive");
    need(spectrum_frames >= 1, "spectrum_frames", "must be positive");
    need(!power_targets_dbm.empty(), "power_targets_dbm", "must list at least one target");
}

Json config_to_json(const ExperimentConfig& c) {
    Json j;
    j["name"] = c.name;
    j["M"] = c.M;
    j["R"] = c.R;
    j["N"] = c.N;
    j["roll_off"] = c.roll_off;
    j["span"] = c.span;
    j["sample_rate"] = c.sample_rate;
    j["sigma_ch"] = c.sigma_ch;
    j["N_B"] = c.N_B;
    j["G"] = c.G;
    j["sigma_pi2"] = c.sigma_pi2;
    j["lr"] = c.lr;
    j["baseline"] = c.baseline;
    j["normalization_aware"] = c.normalization_aware;
    j["checkpoint_every"] = c.checkpoint_every;
    j["pa_seed"] = c.pa_seed;
    j["pa_file"] = c.pa_file;
    j["meas_noise_train"] = c.meas_noise_train;
    j["meas_noise_eval"] = c.meas_noise_eval;
    j["dpd_kind"] = c.dpd_kind;
    j["dpd_amplitude_ref"] = c.dpd_amplitude_ref;
    j["trainer"] = c.trainer;
    j["adc_rate"] = c.adc_rate;
    j["ila_iters"] = c.ila_iters;
    j["ila_symbols"] = c.ila_symbols;
    j["ila_ridge"] = c.ila_ridge;
    j["demapper"] = c.demapper;
    j["demapper_noise_var"] = c.demapper_noise_var;
    j["power_targets_dbm"] = c.power_targets_dbm;
    j["train_power_dbm"] = c.train_power_dbm ? Json(*c.train_power_dbm) : Json(nullptr);
    j["operating_point_dbm"] = c.operating_point_dbm;
    j["eval_symbols"] = c.eval_symbols;
    j["spectrum_frames"] = c.spectrum_frames;
    j["seed"] = c.seed;
    return j;
}

ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig c;
    const Json defaults = config_to_json(c);
    if (!j.is_object()) throw ConfigError("<root>", "config must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!defaults.contains(it.key())) throw ConfigError(it.key(), "unknown field");
    auto get = [&](const char* key, auto& dst) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(dst);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(key, e.what());
        }
    };
    get("name", c.name);
    get("M", c.M);
    get("R", c.R);
    get("N", c.N);
    get("roll_off", c.roll_off);
    get("span", c.span);
    get("sample_rate", c.sample_rate);
    get("sigma_ch", c.sigma_ch);
    get("N_B", c.N_B);
    get("G", c.G);
    get("sigma_pi2", c.sigma_pi2);
    get("lr", c.lr);
    get("baseline", c.baseline);
    get("normalization_aware", c.normalization_aware);
    get("checkpoint_every", c.checkpoint_every);
    get("pa_seed", c.pa_seed);
    get("pa_file", c.pa_file);
    get("meas_noise_train", c.meas_noise_train);
    get("meas_noise_eval", c.meas_noise_eval);
    get("dpd_kind", c.dpd_kind);
    get("dpd_amplitude_ref", c.dpd_amplitude_ref);
    get("trainer", c.trainer);
    get("adc_rate", c.adc_rate);
    get("ila_iters", c.ila_iters);
    get("ila_symbols", c.ila_symbols);
    get("ila_ridge", c.ila_ridge);
    get("demapper", c.demapper);
    get("demapper_noise_var", c.demapper_noise_var);
    get("power_targets_dbm", c.power_targets_dbm);
    if (j.contains("train_power_dbm") && !j.at("train_power_dbm").is_null()) {
        double v = 0.0;
        get("train_power_dbm", v);
        c.train_power_dbm = v;
    }
    get("operating_point_dbm", c.operating_point_dbm);
    get("eval_symbols", c.eval_symbols);
    get("spectrum_frames", c.spectrum_frames);
    get("seed", c.seed);
    c.validate();
    return c;
}

std::string config_hash(const ExperimentConfig& c) {
    Json j = config_to_json(c);
    j.erase("name");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

fs::path run_root() {
    const char* env = std::getenv("OTADPD_RUN_ROOT");
    return (env && *env) ? fs::path(env) : fs::path("runs");
}

fs::path run_dir(const ExperimentConfig& c) {
    return run_root() / (c.name.empty() ? "run-" + config_hash(c) : c.name);
}

std::string stage_name(Stage s) {
    switch (s) {
        case Stage::FitPa: return "fit-pa";
        case Stage::PretrainDemapper: return "pretrain-demapper";
        case Stage::Train: return "train";
        case Stage::Evaluate: return "evaluate";
        case Stage::Sweep: return "sweep";
    }
    return "?";
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::uint64_t stream_seed(const ExperimentConfig& c, const char* name) { return Rng(c.seed).stream(name).seed(); }

ChainConfig chain_config(const ExperimentConfig& c, bool meas_noise) {
    ChainConfig cc;
    cc.M = c.M;
    cc.R = c.R;
    cc.N = c.N;
    cc.roll_off = c.roll_off;
    cc.span = c.span;
    cc.sample_rate = c.sample_rate;
    cc.sigma_ch = c.sigma_ch;
    cc.meas_noise = meas_noise;
    return cc;
}

PaModel fit_or_load_pa(const ExperimentConfig& c) {
    if (c.pa_file.empty()) return make_reference_pa(c.pa_seed);
    if (!fs::exists(c.pa_file)) throw ConfigError("pa_file", "no such file '" + c.pa_file + "'");
    return pa_from_json(read_json_file(c.pa_file));
}

PaModel load_pa(const ExperimentConfig& c, const fs::path& dir) {
    const fs::path p = dir / "pa.json";
    if (fs::exists(p)) return pa_from_json(read_json_file(p));
    PaModel pa = fit_or_load_pa(c);
    write_json_file(p, pa_to_json(pa));
    return pa;
}

Demapper load_demapper(const ExperimentConfig& c, const fs::path& dir) {
    const fs::path p = dir / "demapper.json";
    if (fs::exists(p)) return demapper_from_json(read_json_file(p));
    if (c.demapper == "nn")
        throw ConfigError("demapper", "nn demapper requested but demapper.json is missing; run pretrain-demapper");
    return make_ml_demapper(make_qam(c.M), c.demapper_noise_var);
}

std::string checkpoint_label(const ExperimentConfig& c) {
    if (c.trainer == "rl") return "rl-" + c.dpd_kind;
    std::string s = "ila-" + c.dpd_kind;
    if (c.adc_rate < c.sample_rate) s += "-" + std::to_string(static_cast<long>(std::lround(c.adc_rate / 1e6))) + "mhz";
    return s;
}

DpdModel initial_dpd(const ExperimentConfig& c) {
    if (c.dpd_kind == "gmp") return make_gmp_dpd(GmpConfig{}, c.dpd_amplitude_ref);
    Rng rng = Rng(c.seed).stream("dpd-init");
    return make_r2tdnn_dpd(3, rng, c.dpd_amplitude_ref);
}

EvalConfig eval_config(const ExperimentConfig& c) {
    EvalConfig e;
    e.symbols = c.eval_symbols;
    e.spectrum_frames = c.spectrum_frames;
    return e;
}

void stage_fit_pa(const ExperimentConfig& c, const fs::path& dir) {
    ReferencePaInfo info;
    PaModel pa = c.pa_file.empty() ? make_reference_pa(c.pa_seed, &info) : fit_or_load_pa(c);
    write_json_file(dir / "pa.json", pa_to_json(pa));
    if (c.pa_file.empty()) std::cerr << "fit-pa: reference PA fit NMSE " << info.fit_nmse_db << " dB\n";
}

void stage_pretrain(const ExperimentConfig& c, const fs::path& dir) {
    const Constellation con = make_qam(c.M);
    Demapper d;
    if (c.demapper == "nn") {
        PretrainConfig pc;
        pc.noise_var_lo = pc.noise_var_hi = c.demapper_noise_var;
        Rng rng = Rng(c.seed).stream("demapper");
        PretrainReport rep;
        d = pretrain_demapper(con, pc, rng, &rep);
        std::cerr << "pretrain-demapper: CE nn " << rep.ce_nn << " ml " << rep.ce_ml << "\n";
    } else {
        d = make_ml_demapper(con, c.demapper_noise_var);
    }
    write_json_file(dir / "demapper.json", demapper_to_json(d));
}

void stage_train(const ExperimentConfig& c, const fs::path& dir) {
    const PaModel pa = load_pa(c, dir);
    const Chain chain(chain_config(c, c.meas_noise_train), pa);
    const EvalConfig ec = eval_config(c);
    const DriveSearch ds = find_drive(chain, nullptr, c.training_power(), ec, stream_seed(c, "power"));
    const std::string label = checkpoint_label(c);
    std::vector<TrainRecord> recs;
    DpdModel trained;
    if (c.trainer == "rl") {
        const Demapper dem = load_demapper(c, dir);
        RlTrainConfig rc;
        rc.N = c.N;
        rc.NB = c.N_B;
        rc.adam.lr = c.lr;
        rc.seed = stream_seed(c, "train");
        rc.drive = ds.drive;
        rc.estimator.baseline = c.baseline;
        rc.estimator.normalization_aware = c.normalization_aware;
        rc.checkpoint_every = c.checkpoint_every;
        PolicyConfig pc{c.sigma_pi2, c.G};
        auto ck = [&](int it, const DpdModel& m) {
            write_json_file(dir / ("checkpoint_" + label + "_" + std::to_string(it) + ".json"), dpd_to_json(m));
        };
        try {
            RlResult r = rl_train(chain, initial_dpd(c), rc, pc, dem, ck);
            trained = r.model;
            recs = std::move(r.records);
        } catch (const RlAbort& e) {
            write_json_file(dir / ("dpd_" + label + ".lastgood.json"), dpd_to_json(e.last_good));
            throw;
        }
    } else {
        Rng rng = Rng(stream_seed(c, "ila"));
        ChainConfig big = chain_config(c, c.meas_noise_train);
        big.N = c.ila_symbols;
        const Chain ila_chain(big, pa);
        const Frame f = ila_chain.frame(rng, ds.drive);
        PaModel pa_train = pa;
        if (!c.meas_noise_train) pa_train.sigma_meas = 0.0;
        IlaConfig ic;
        ic.iters = c.ila_iters;
        ic.ridge = c.ila_ridge;
        IlaResult r = ila_train(f.u, pa_train, FeedbackAdc{c.adc_rate}, initial_dpd(c), ic, rng);
        trained = r.model;
        recs = std::move(r.records);
    }
    write_json_file(dir / ("dpd_" + label + ".json"), dpd_to_json(trained));
    std::ostringstream os;
    write_train_records(os, recs);
    write_text_file(dir / ("train_" + label + ".csv"), os.str());
}

struct Scheme {
    std::string name;
    std::optional<DpdModel> dpd;
};

std::vector<Scheme> schemes_in(const fs::path& dir) {
    std::vector<Scheme> s{{"none", std::nullopt}};
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string fn = e.path().filename().string();
        if (fn.rfind("dpd_", 0) == 0 && e.path().extension() == ".json" && fn.find(".lastgood") == std::string::npos)
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::string n = f.stem().string().substr(4);
        s.push_back({n, dpd_from_json(read_json_file(f))});
    }
    return s;
}

SweepRow eval_row(const ExperimentConfig& c, const Chain& chain, const Demapper& dem, const Scheme& s,
                  double target, SpectrumEstimate* es) {
    const EvalConfig ec = eval_config(c);
    const DpdModel* dpd = s.dpd ? &*s.dpd : nullptr;
    const DriveSearch ds = find_drive(chain, dpd, target, ec, stream_seed(c, "power"));
    SweepRow row;
    row.scheme = s.name;
    row.target_dbm = target;
    row.drive = ds.drive;
    if (!ds.converged) {
        row.flag = "unreachable";
        row.p_out_dbm = ds.achieved_dbm;
        row.ser = row.nmse_db = row.acpr_dbc = row.es_n0_db = row.theory_ser = std::nan("");
        return row;
    }
    const PointResult pr = evaluate_point(chain, dpd, dem, ds.drive, ec, stream_seed(c, "eval"), es);
    row.p_out_dbm = pr.p_out_dbm;
    row.ser = pr.ser;
    row.symbols = pr.symbols;
    row.nmse_db = pr.nmse_db;
    row.acpr_dbc = pr.acpr_dbc;
    row.es_n0_db = pr.es_n0_db;
    row.theory_ser = pr.theory_ser;
    return row;
}

void stage_evaluate(const ExperimentConfig& c, const fs::path& dir) {
    const Chain chain(chain_config(c, c.meas_noise_eval), load_pa(c, dir));
    const Demapper dem = load_demapper(c, dir);
    std::vector<SweepRow> rows;
    for (const auto& s : schemes_in(dir)) {
        SpectrumEstimate es;
        rows.push_back(eval_row(c, chain, dem, s, c.operating_point_dbm, &es));
        if (!es.psd.empty()) {
            std::ostringstream os;
            es.write_csv(os);
            write_text_file(dir / ("error_spectrum_" + s.name + ".csv"), os.str());
        }
        std::cerr << "evaluate: " << s.name << " P_out " << rows.back().p_out_dbm << " dBm, SER " << rows.back().ser
                  << ", NMSE " << rows.back().nmse_db << " dB, ACPR " << rows.back().acpr_dbc << " dBc\n";
    }
    write_text_file(dir / "evaluate.csv", sweep_csv(rows));
}

void stage_sweep(const ExperimentConfig& c, const fs::path& dir) {
    const Chain chain(chain_config(c, c.meas_noise_eval), load_pa(c, dir));
    const Demapper dem = load_demapper(c, dir);
    std::vector<SweepRow> rows;
    // points run one after another; each draws from its own named streams
    for (const auto& s : schemes_in(dir))
        for (double t : c.power_targets_dbm) {
            rows.push_back(eval_row(c, chain, dem, s, t, nullptr));
            std::cerr << "sweep: " << s.name << " " << t << " dBm -> SER " << rows.back().ser << "\n";
        }
    write_text_file(dir / "sweep.csv", sweep_csv(rows));
}

Json manifest(const ExperimentConfig& c, const std::vector<std::string>& done) {
    Json m;
    m["code_version"] = kCodeVersion;
    m["config_hash"] = config_hash(c);
    m["seed"] = c.seed;
    m["config"] = config_to_json(c);
    m["stages_completed"] = done;
    return m;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "scheme,target_dbm,p_out_dbm,ser,symbols,nmse_db,acpr_dbc,es_n0_db,theory_ser,drive_v,flag\n";
    for (const auto& r : rows)
        os << r.scheme << ',' << fmt(r.target_dbm) << ',' << fmt(r.p_out_dbm) << ',' << fmt(r.ser) << ','
           << r.symbols << ',' << fmt(r.nmse_db) << ',' << fmt(r.acpr_dbc) << ',' << fmt(r.es_n0_db) << ','
           << fmt(r.theory_ser) << ',' << fmt(r.drive) << ',' << r.flag << '\n';
    return os.str();
}

std::vector<SweepRow> read_sweep_csv(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::string line;
    std::getline(in, line);
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() == 10) f.emplace_back();
        if (f.size() != 11) throw std::runtime_error("malformed sweep row: " + line);
        SweepRow r;
        r.scheme = f[0];
        r.target_dbm = std::stod(f[1]);
        r.p_out_dbm = std::stod(f[2]);
        r.ser = std::stod(f[3]);
        r.symbols = std::stol(f[4]);
        r.nmse_db = std::stod(f[5]);
        r.acpr_dbc = std::stod(f[6]);
        r.es_n0_db = std::stod(f[7]);
        r.theory_ser = std::stod(f[8]);
        r.drive = std::stod(f[9]);
        r.flag = f[10];
        rows.push_back(r);
    }
    return rows;
}

fs::path run(const ExperimentConfig& c, const std::vector<Stage>& stages) { return run(c, stages, run_dir(c)); }

fs::path run(const ExperimentConfig& c, const std::vector<Stage>& stages, const fs::path& dir) {
    c.validate();
    fs::create_directories(dir);
    fs::remove(dir / "FAILED");
    std::vector<std::string> done;
    const fs::path mp = dir / "manifest.json";
    if (fs::exists(mp)) {
        const Json old = read_json_file(mp);
        if (old.value("config_hash", "") == config_hash(c))
            for (const auto& s : old.at("stages_completed")) done.push_back(s.get<std::string>());
    }
    write_json_file(mp, manifest(c, done));
    for (Stage s : stages) {
        try {
            switch (s) {
                case Stage::FitPa: stage_fit_pa(c, dir); break;
                case Stage::PretrainDemapper: stage_pretrain(c, dir); break;
                case Stage::Train: stage_train(c, dir); break;
                case Stage::Evaluate: stage_evaluate(c, dir); break;
                case Stage::Sweep: stage_sweep(c, dir); break;
            }
        } catch (const std::exception& e) {
            write_text_file(dir / "FAILED", stage_name(s) + ": " + e.what() + "\n");
            throw;
        }
        const std::string n = stage_name(s) + (s == Stage::Train ? ":" + checkpoint_label(c) : "");
        if (std::find(done.begin(), done.end(), n) == done.end()) done.push_back(n);
        write_json_file(mp, manifest(c, done));
    }
    return dir;
}

}  // namespace otadpd
