#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qprep/bounds.hpp"
#include "qprep/noise.hpp"
#include "qprep/prep.hpp"
#include "qprep/spectral.hpp"

namespace qprep {

// --- Basic file helpers -------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

/// Shortest representation that round-trips a double exactly.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// --- Key = value configuration ------------------------------------------------

using ConfigMap = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
inline ConfigMap parse_config(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(trimmed.substr(0, eq));
        const std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        map[key] = value;
    }
    return map;
}

inline bool config_has(const ConfigMap& cfg, const std::string& key) { return cfg.count(key) != 0; }

inline std::string config_get(const ConfigMap& cfg, const std::string& key, const std::string& fallback) {
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
}

inline std::string config_require(const ConfigMap& cfg, const std::string& key) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) throw std::invalid_argument("config key '" + key + "' is required");
    return it->second;
}

inline double config_double(const ConfigMap& cfg, const std::string& key, double fallback) {
    const auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    double out = 0.0;
    if (!detail::parse_real(it->second, out))
        throw std::invalid_argument("config key '" + key + "': '" + it->second + "' is not a number");
    return out;
}

inline double config_double_require(const ConfigMap& cfg, const std::string& key) {
    config_require(cfg, key);
    return config_double(cfg, key, 0.0);
}

inline long config_long(const ConfigMap& cfg, const std::string& key, long fallback) {
    const double v = config_double(cfg, key, static_cast<double>(fallback));
    const long out = static_cast<long>(v);
    if (static_cast<double>(out) != v)
        throw std::invalid_argument("config key '" + key + "' must be an integer");
    return out;
}

inline std::vector<double> config_double_list(const ConfigMap& cfg, const std::string& key) {
    const std::string raw = config_require(cfg, key);
    std::vector<double> out;
    std::string item;
    std::istringstream in(raw);
    while (std::getline(in, item, ',')) {
        double v = 0.0;
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        const std::string tok = a == std::string::npos ? std::string{} : item.substr(a, b - a + 1);
        if (!detail::parse_real(tok, v))
            throw std::invalid_argument("config key '" + key + "': '" + tok + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("config key '" + key + "' lists no values");
    return out;
}

// --- Trace CSV ------------------------------------------------------------------

inline std::string to_csv(const PrepTrace& trace) {
    std::string out = "k,t,p_k,P_k,fidelity,cum_sim_time\n";
    for (const auto& r : trace.records) {
        out += std::to_string(r.k);
        out += ',';
        out += format_double(r.t);
        out += ',';
        out += format_double(r.p);
        out += ',';
        out += format_double(r.P);
        out += ',';
        out += format_double(r.fidelity);
        out += ',';
        out += format_double(r.cum_sim_time);
        out += '\n';
    }
    return out;
}

inline PrepTrace prep_trace_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty trace CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "k,t,p_k,P_k,fidelity,cum_sim_time")
        throw std::invalid_argument("unexpected trace CSV header: " + line);
    PrepTrace trace;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ',')) {
            double v = 0.0;
            if (!detail::parse_real(cell, v))
                throw std::invalid_argument("trace CSV line " + std::to_string(line_no) + ": bad number '" + cell +
                                            "'");
            cells.push_back(v);
        }
        if (cells.size() != 6)
            throw std::invalid_argument("trace CSV line " + std::to_string(line_no) + ": expected 6 columns");
        trace.records.push_back({static_cast<long>(cells[0]), cells[1], cells[2], cells[3], cells[4], cells[5]});
    }
    if (trace.records.empty()) throw std::invalid_argument("trace CSV has no rows");
    return trace;
}

inline nlohmann::json trace_sidecar_json(const PrepTrace& trace, const ConfigMap& config_echo) {
    nlohmann::json j;
    j["restarts"] = trace.restarts;
    j["total_sim_time"] = trace.total_sim_time;
    j["config"] = nlohmann::json::object();
    for (const auto& [k, v] : config_echo) j["config"][k] = v;
    return j;
}

inline std::string to_csv(const NoisyTrace& trace) {
    std::string out = "k,fidelity,P_k\n";
    for (const auto& r : trace.records) {
        out += std::to_string(r.k);
        out += ',';
        out += format_double(r.fidelity);
        out += ',';
        out += format_double(r.P);
        out += '\n';
    }
    return out;
}

// --- Spectral state JSON ---------------------------------------------------------

inline nlohmann::json to_json(const SpectralState& s) {
    nlohmann::json j;
    j["target_index"] = s.target_index;
    j["occupancy_threshold"] = s.occupancy_threshold;
    j["levels"] = nlohmann::json::array();
    for (const auto& level : s.entries)
        j["levels"].push_back({{"energy", level.energy}, {"re", level.amplitude.real()}, {"im", level.amplitude.imag()}});
    return j;
}

inline SpectralState spectral_state_from_json(const nlohmann::json& j) {
    SpectralState s;
    try {
        s.target_index = j.at("target_index").get<std::size_t>();
        s.occupancy_threshold = j.value("occupancy_threshold", 0.0);
        for (const auto& level : j.at("levels"))
            s.entries.push_back(
                {level.at("energy").get<double>(), complexd(level.at("re").get<double>(), level.at("im").get<double>())});
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed spectral state JSON: ") + e.what());
    }
    if (s.entries.empty()) throw std::invalid_argument("spectral state JSON lists no levels");
    if (s.target_index >= s.entries.size())
        throw std::invalid_argument("spectral state JSON: target_index out of range");
    return s;
}

inline SpectralState read_spectral_state(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return spectral_state_from_json(j);
}

// --- Bounds report ---------------------------------------------------------------

/// Everything the analytic side predicts for one parameter set: the schedule,
/// the cosine-product ceiling gamma, the iteration budgets of both regimes,
/// the expected-cost bound at k_bar, and fidelity-floor curves sampled at
/// every iteration count up to k_bar (with the error-ceiling curve when an
/// evolution error is given). The regime is "exact-energy" when delta = 0 and
/// "approx-energy" otherwise; k_bar and the floor curve follow the regime.
struct BoundsReport {
    double c_sq = 0.0;
    double epsilon = 0.0;
    double gap = 0.0;
    double e_max = 0.0;
    double delta = 0.0;
    double eps_rte = 0.0;
    int period = 0;
    double gamma = 0.0;
    long k_bar_exact_regime = 0;
    long k_bar_approx_regime = 0;
    long k_bar = 0;
    double cost_bound_at_k_bar = 0.0;
    double cost_expected = std::numeric_limits<double>::quiet_NaN();  // cost recursion on a measured trace, if any
    std::vector<long> ks;
    std::vector<double> floors;
    std::vector<double> rte_floors;  // empty unless eps_rte > 0

    std::string regime() const { return delta > 0.0 ? "approx-energy" : "exact-energy"; }
};

inline BoundsReport make_bounds_report(double c_sq, double epsilon, double gap, double e_max, double delta = 0.0,
                                       double eps_rte = 0.0, long k_max = -1) {
    BoundsReport r;
    r.c_sq = c_sq;
    r.epsilon = epsilon;
    r.gap = gap;
    r.e_max = e_max;
    r.delta = delta;
    r.eps_rte = eps_rte;
    const Schedule sched = build_schedule(gap, e_max);
    r.period = sched.period;
    r.gamma = gamma_numeric(sched);
    r.k_bar_exact_regime = k_bar_exact(c_sq, epsilon, r.period);
    r.k_bar_approx_regime = delta > 0.0 ? k_bar_approx(c_sq, epsilon, r.period, delta, gap) : r.k_bar_exact_regime;
    r.k_bar = delta > 0.0 ? r.k_bar_approx_regime : r.k_bar_exact_regime;
    r.cost_bound_at_k_bar = cost_bound(r.k_bar, c_sq, r.period, gap, delta);
    const long k_last = k_max >= 0 ? k_max : r.k_bar;
    for (long k = 0; k <= k_last; ++k) {
        r.ks.push_back(k);
        r.floors.push_back(fidelity_floor_approx(k, c_sq, r.period, delta, gap));
        if (eps_rte > 0.0) {
            const double zeta_sq = zeta_sq_floor(k, delta, gap, r.period);
            const double xi_sq = xi_sq_bound(k, c_sq, r.period, 0.25);
            r.rte_floors.push_back(fidelity_floor_rte(k, c_sq, zeta_sq, xi_sq, eps_rte));
        }
    }
    return r;
}

inline nlohmann::json to_json(const BoundsReport& r) {
    nlohmann::json j;
    j["c_sq"] = r.c_sq;
    j["epsilon"] = r.epsilon;
    j["gap"] = r.gap;
    j["e_max"] = r.e_max;
    j["delta"] = r.delta;
    j["eps_rte"] = r.eps_rte;
    j["period"] = r.period;
    j["gamma"] = r.gamma;
    j["regime"] = r.regime();
    j["k_bar_exact"] = r.k_bar_exact_regime;
    j["k_bar_approx"] = r.k_bar_approx_regime;
    j["k_bar"] = r.k_bar;
    j["cost_bound"] = r.cost_bound_at_k_bar;
    if (!std::isnan(r.cost_expected)) j["cost_expected"] = r.cost_expected;
    j["k"] = r.ks;
    j["fidelity_floor"] = r.floors;
    if (!r.rte_floors.empty()) j["rte_floor"] = r.rte_floors;
    return j;
}

}  // namespace qprep
