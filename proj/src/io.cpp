#include "otadpd/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace otadpd {

namespace {

Json cvec_json(const CVec& v) {
    Json a = Json::array();
    for (const auto& c : v) a.push_back({c.real(), c.imag()});
    return a;
}

CVec cvec_from(const Json& a) {
    CVec v;
    for (const auto& e : a) v.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    return v;
}

Json num_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double num_or_inf(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::infinity();
    return j.at(key).get<double>();
}

Json gmp_cfg_json(const GmpConfig& c) {
    return {{"Ka", c.Ka}, {"La", c.La}, {"Kb", c.Kb}, {"Lb", c.Lb},
            {"Mb", c.Mb}, {"Kc", c.Kc}, {"Lc", c.Lc}, {"Mc", c.Mc}};
}

GmpConfig gmp_cfg_from(const Json& j) {
    GmpConfig c;
    c.Ka = j.at("Ka");
    c.La = j.at("La");
    c.Kb = j.at("Kb");
    c.Lb = j.at("Lb");
    c.Mb = j.at("Mb");
    c.Kc = j.at("Kc");
    c.Lc = j.at("Lc");
    c.Mc = j.at("Mc");
    return c;
}

Json constellation_json(const Constellation& c) { return {{"order", c.order}}; }

}  // namespace

Json pa_to_json(const PaModel& pa) {
    Json j;
    j["kind"] = pa.kind == PaKind::Gmp ? "gmp" : "linear_clipping";
    if (pa.kind == PaKind::Gmp) {
        j["config"] = gmp_cfg_json(pa.cfg);
        j["coefficients"] = cvec_json(pa.coeffs);
        j["input_ceiling"] = num_or_null(pa.input_ceiling);
    } else {
        j["gain"] = pa.gain;
    }
    j["x_sat"] = num_or_null(pa.x_sat);
    j["sigma_meas"] = pa.sigma_meas;
    return j;
}

PaModel pa_from_json(const Json& j) {
    PaModel pa;
    const std::string kind = j.at("kind");
    if (kind == "gmp") {
        pa.kind = PaKind::Gmp;
        pa.cfg = gmp_cfg_from(j.at("config"));
        pa.coeffs = cvec_from(j.at("coefficients"));
        pa.input_ceiling = num_or_inf(j, "input_ceiling");
    } else if (kind == "linear_clipping") {
        pa.kind = PaKind::LinearClipping;
        pa.gain = j.at("gain");
    } else {
        throw ConfigError("kind", "unknown PA kind '" + kind + "'");
    }
    pa.x_sat = num_or_inf(j, "x_sat");
    pa.sigma_meas = j.at("sigma_meas");
    pa.validate();
    return pa;
}

Json dpd_to_json(const DpdModel& m) {
    Json j;
    j["kind"] = m.kind == DpdKind::Gmp ? "gmp" : "r2tdnn";
    j["K1"] = m.K1;
    if (m.kind == DpdKind::Gmp)
        j["config"] = gmp_cfg_json(m.cfg);
    else
        j["widths"] = m.net.widths;
    j["amplitude_ref"] = m.amplitude_ref;
    j["normalization_scale"] = m.frozen_scale;
    j["theta"] = m.theta;
    return j;
}

DpdModel dpd_from_json(const Json& j) {
    DpdModel m;
    const std::string kind = j.at("kind");
    if (kind == "gmp") {
        m.kind = DpdKind::Gmp;
        m.cfg = gmp_cfg_from(j.at("config"));
    } else if (kind == "r2tdnn") {
        m.kind = DpdKind::R2Tdnn;
        m.net.widths = j.at("widths").get<std::vector<int>>();
    } else {
        throw ConfigError("kind", "unknown DPD kind '" + kind + "'");
    }
    m.K1 = j.at("K1");
    m.amplitude_ref = j.at("amplitude_ref");
    m.frozen_scale = j.at("normalization_scale");
    m.theta = j.at("theta").get<RVec>();
    m.validate();
    return m;
}

Json demapper_to_json(const Demapper& d) {
    Json j;
    j["kind"] = d.kind == DemapperKind::Ml ? "ml" : "nn";
    j["constellation"] = constellation_json(d.constellation);
    if (d.kind == DemapperKind::Ml) {
        j["noise_var"] = d.noise_var;
    } else {
        j["widths"] = d.net.widths;
        j["params"] = d.params;
    }
    return j;
}

Demapper demapper_from_json(const Json& j) {
    const Constellation c = make_qam(j.at("constellation").at("order").get<int>());
    const std::string kind = j.at("kind");
    if (kind == "ml") return make_ml_demapper(c, j.at("noise_var").get<double>());
    if (kind != "nn") throw ConfigError("kind", "unknown demapper kind '" + kind + "'");
    Demapper d;
    d.kind = DemapperKind::Nn;
    d.constellation = c;
    d.net.widths = j.at("widths").get<std::vector<int>>();
    d.params = j.at("params").get<RVec>();
    if (d.params.size() != d.net.param_count()) throw ConfigError("params", "demapper parameter count mismatch");
    return d;
}

Json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    return Json::parse(in);
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

void write_json_file(const std::filesystem::path& p, const Json& j) { write_text_file(p, j.dump(2) + "\n"); }

}  // namespace otadpd
