#include "leofl/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "leofl/csv.hpp"

namespace leofl {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_real(const std::string& section, const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": expected a number, got '" + v + "'");
    }
}

long to_int(const std::string& section, const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": expected an integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("[" + section + "] " + key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_real_list(const std::string& section, const std::string& key,
                                 const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real(section, key, trim(item)));
    return out;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;  // "" is the top level
    ShellConfig* shell = nullptr;
    GroundNode* node = nullptr;
    bool seen_link = false, seen_noise = false, seen_noma = false, seen_fl = false,
         seen_protocol = false;
    int lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) +
                                                   ": malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            shell = nullptr;
            node = nullptr;
            if (section == "shell") {
                cfg.shells.emplace_back();
                shell = &cfg.shells.back();
            } else if (section == "node") {
                cfg.nodes.emplace_back();
                node = &cfg.nodes.back();
            } else if (section == "link") {
                if (seen_link) throw ConfigError("[link]: section defined twice");
                seen_link = true;
            } else if (section == "noise") {
                if (seen_noise) throw ConfigError("[noise]: section defined twice");
                seen_noise = true;
            } else if (section == "noma") {
                if (seen_noma) throw ConfigError("[noma]: section defined twice");
                seen_noma = true;
            } else if (section == "fl") {
                if (seen_fl) throw ConfigError("[fl]: section defined twice");
                seen_fl = true;
            } else if (section == "protocol") {
                if (seen_protocol) throw ConfigError("[protocol]: section defined twice");
                seen_protocol = true;
            } else {
                throw ConfigError("[" + section + "]: unknown section");
            }
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));

        if (section.empty()) {
            if (key == "seed")
                cfg.seed = static_cast<uint64_t>(to_int(section, key, val));
            else
                throw ConfigError(key + ": unknown top-level key");
        } else if (section == "shell") {
            ShellSpec& sp = shell->spec;
            if (key == "altitude_km") sp.altitude_m = to_real(section, key, val) * 1e3;
            else if (key == "inclination_deg") sp.inclination_deg = to_real(section, key, val);
            else if (key == "num_orbits") sp.num_orbits = static_cast<int>(to_int(section, key, val));
            else if (key == "sats_per_orbit")
                sp.sats_per_orbit = static_cast<int>(to_int(section, key, val));
            else if (key == "raan_offsets_deg") sp.raan_offsets_deg = to_real_list(section, key, val);
            else if (key == "phase_offset_deg") sp.phase_offset_deg = to_real(section, key, val);
            else if (key == "sr_2b") shell->sr_2b = to_real(section, key, val);
            else if (key == "sr_b") shell->sr_2b = 2.0 * to_real(section, key, val);
            else if (key == "sr_m") shell->sr_m = static_cast<int>(to_int(section, key, val));
            else if (key == "sr_omega") shell->sr_omega = to_real(section, key, val);
            else throw ConfigError("[shell] " + key + ": unknown key");
        } else if (section == "node") {
            if (key == "name") node->name = val;
            else if (key == "kind") {
                if (val == "gs") node->kind = NodeKind::GS;
                else if (val == "hap") node->kind = NodeKind::HAP;
                else throw ConfigError("[node] kind: expected gs or hap, got '" + val + "'");
            } else if (key == "latitude_deg") node->latitude_deg = to_real(section, key, val);
            else if (key == "longitude_deg") node->longitude_deg = to_real(section, key, val);
            else if (key == "altitude_km") node->altitude_m = to_real(section, key, val) * 1e3;
            else if (key == "min_elevation_deg")
                node->min_elevation_deg = to_real(section, key, val);
            else throw ConfigError("[node] " + key + ": unknown key");
        } else if (section == "link") {
            if (key == "carrier_ghz") cfg.link.carrier_hz = to_real(section, key, val) * 1e9;
            else if (key == "tx_gain_dbi") cfg.link.tx_antenna_gain_dbi = to_real(section, key, val);
            else if (key == "rx_gain_dbi") cfg.link.rx_antenna_gain_dbi = to_real(section, key, val);
            else if (key == "pointing_error_deg")
                cfg.link.pointing_error_deg = to_real(section, key, val);
            else if (key == "aperture_diameter_m")
                cfg.link.aperture_diameter_m = to_real(section, key, val);
            else if (key == "beam_edge_ks") cfg.link.beam_edge_constant = to_real(section, key, val);
            else throw ConfigError("[link] " + key + ": unknown key");
        } else if (section == "noise") {
            if (key == "temperature_k") cfg.noise.temperature_k = to_real(section, key, val);
            else if (key == "bandwidth_mhz") cfg.noise.bandwidth_hz = to_real(section, key, val) * 1e6;
            else throw ConfigError("[noise] " + key + ": unknown key");
        } else if (section == "noma") {
            if (key == "power_mode") {
                if (val == "static") cfg.noma.power_mode = PowerMode::Static;
                else if (val == "dynamic") cfg.noma.power_mode = PowerMode::Dynamic;
                else throw ConfigError("[noma] power_mode: expected static or dynamic");
            } else if (key == "gamma_form") {
                if (val == "paper") cfg.noma.gamma_form = GammaForm::PaperTwoR;
                else if (val == "conventional") cfg.noma.gamma_form = GammaForm::Conventional;
                else throw ConfigError("[noma] gamma_form: expected paper or conventional");
            } else if (key == "target_rate_bps_hz")
                cfg.noma.target_rate_bps_hz = to_real(section, key, val);
            else if (key == "link_budget_in_rho")
                cfg.noma.link_budget_in_rho = to_bool(section, key, val);
            else if (key == "cond_interferer_gain")
                cfg.noma.cond_interferer_gain = to_real(section, key, val);
            else if (key == "p_s_dbm") cfg.noma.p_s_dbm = to_real(section, key, val);
            else throw ConfigError("[noma] " + key + ": unknown key");
        } else if (section == "fl") {
            TrainConfig& t = cfg.fl.train;
            if (key == "classes") cfg.fl.classes = static_cast<int>(to_int(section, key, val));
            else if (key == "feature_dim")
                cfg.fl.feature_dim = static_cast<int>(to_int(section, key, val));
            else if (key == "samples") cfg.fl.samples = static_cast<int>(to_int(section, key, val));
            else if (key == "separation") cfg.fl.separation = to_real(section, key, val);
            else if (key == "partition") {
                if (val == "iid") cfg.fl.partition = PartitionMode::IID;
                else if (val == "noniid") cfg.fl.partition = PartitionMode::NonIID;
                else throw ConfigError("[fl] partition: expected iid or noniid");
            } else if (key == "local_epochs")
                t.local_epochs = static_cast<int>(to_int(section, key, val));
            else if (key == "batch_size") t.batch_size = static_cast<int>(to_int(section, key, val));
            else if (key == "l2_reg") t.l2_reg = to_real(section, key, val);
            else if (key == "lr_schedule") {
                if (val == "constant") t.schedule = LrSchedule::Constant;
                else if (val == "decaying") t.schedule = LrSchedule::Decaying;
                else throw ConfigError("[fl] lr_schedule: expected constant or decaying");
            } else if (key == "lr") t.lr = to_real(section, key, val);
            else if (key == "lr_epsilon") t.lr_epsilon = to_real(section, key, val);
            else if (key == "lr_delta0") t.lr_delta0 = to_real(section, key, val);
            else if (key == "train_time_s") cfg.fl.train_time_s = to_real(section, key, val);
            else if (key == "model_size_bits_override")
                cfg.fl.model_size_bits_override = to_real(section, key, val);
            else throw ConfigError("[fl] " + key + ": unknown key");
        } else if (section == "protocol") {
            ProtocolConfig& p = cfg.protocol;
            if (key == "direction") {
                if (val == "cw") p.direction = 1;
                else if (val == "ccw") p.direction = -1;
                else throw ConfigError("[protocol] direction: expected cw or ccw");
            } else if (key == "isl_rate_mbps") p.isl_rate_bps = to_real(section, key, val) * 1e6;
            else if (key == "ihl_rate_mbps") p.ihl_rate_bps = to_real(section, key, val) * 1e6;
            else if (key == "broadcast_rate_mbps")
                p.broadcast_rate_bps = to_real(section, key, val) * 1e6;
            else if (key == "instant_links") p.instant_links = to_bool(section, key, val);
            else if (key == "outage_coupling") p.outage_coupling = to_bool(section, key, val);
            else if (key == "max_rounds") p.max_rounds = static_cast<int>(to_int(section, key, val));
            else if (key == "target_accuracy") p.target_accuracy = to_real(section, key, val);
            else if (key == "target_loss") p.target_loss = to_real(section, key, val);
            else if (key == "max_sim_time_s") p.max_sim_time_s = to_real(section, key, val);
            else throw ConfigError("[protocol] " + key + ": unknown key");
        }
    }

    // Cross-field validation.
    for (size_t i = 0; i < cfg.nodes.size(); ++i) {
        const GroundNode& n = cfg.nodes[i];
        if (n.name.empty()) throw ConfigError("[node] name: required");
        if (n.min_elevation_deg < 0.0 || n.min_elevation_deg >= 90.0)
            throw ConfigError("[node] " + n.name + ": min_elevation_deg must be in [0, 90)");
        for (size_t j = 0; j < i; ++j)
            if (cfg.nodes[j].name == n.name)
                throw ConfigError("[node] " + n.name + ": duplicate node name");
    }
    for (const ShellConfig& s : cfg.shells) {
        if (!(s.spec.altitude_m > 0.0)) throw ConfigError("[shell] altitude_km: must be > 0");
        if (s.spec.num_orbits < 1) throw ConfigError("[shell] num_orbits: must be >= 1");
        if (s.spec.sats_per_orbit < 1) throw ConfigError("[shell] sats_per_orbit: must be >= 1");
        if (!s.spec.raan_offsets_deg.empty() &&
            static_cast<int>(s.spec.raan_offsets_deg.size()) != s.spec.num_orbits)
            throw ConfigError("[shell] raan_offsets_deg: length must equal num_orbits");
        if (!(s.sr_2b > 0.0) || s.sr_m < 1 || !(s.sr_omega > 0.0))
            throw ConfigError("[shell] sr_*: invalid shadowed-Rician parameters");
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open scenario file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
    std::ostringstream o;
    auto r = [](double v) { return format_double(v); };
    o << "seed = " << cfg.seed << "\n";
    for (const ShellConfig& s : cfg.shells) {
        o << "\n[shell]\n";
        o << "altitude_km = " << r(s.spec.altitude_m / 1e3) << "\n";
        o << "inclination_deg = " << r(s.spec.inclination_deg) << "\n";
        o << "num_orbits = " << s.spec.num_orbits << "\n";
        o << "sats_per_orbit = " << s.spec.sats_per_orbit << "\n";
        if (!s.spec.raan_offsets_deg.empty()) {
            o << "raan_offsets_deg = ";
            for (size_t i = 0; i < s.spec.raan_offsets_deg.size(); ++i)
                o << (i ? "," : "") << r(s.spec.raan_offsets_deg[i]);
            o << "\n";
        }
        if (s.spec.phase_offset_deg >= 0.0)
            o << "phase_offset_deg = " << r(s.spec.phase_offset_deg) << "\n";
        o << "sr_2b = " << r(s.sr_2b) << "\n";
        o << "sr_m = " << s.sr_m << "\n";
        o << "sr_omega = " << r(s.sr_omega) << "\n";
    }
    for (const GroundNode& n : cfg.nodes) {
        o << "\n[node]\n";
        o << "name = " << n.name << "\n";
        o << "kind = " << (n.kind == NodeKind::GS ? "gs" : "hap") << "\n";
        o << "latitude_deg = " << r(n.latitude_deg) << "\n";
        o << "longitude_deg = " << r(n.longitude_deg) << "\n";
        o << "altitude_km = " << r(n.altitude_m / 1e3) << "\n";
        o << "min_elevation_deg = " << r(n.min_elevation_deg) << "\n";
    }
    o << "\n[link]\n";
    o << "carrier_ghz = " << r(cfg.link.carrier_hz / 1e9) << "\n";
    o << "tx_gain_dbi = " << r(cfg.link.tx_antenna_gain_dbi) << "\n";
    o << "rx_gain_dbi = " << r(cfg.link.rx_antenna_gain_dbi) << "\n";
    o << "pointing_error_deg = " << r(cfg.link.pointing_error_deg) << "\n";
    o << "aperture_diameter_m = " << r(cfg.link.aperture_diameter_m) << "\n";
    o << "beam_edge_ks = " << r(cfg.link.beam_edge_constant) << "\n";
    o << "\n[noise]\n";
    o << "temperature_k = " << r(cfg.noise.temperature_k) << "\n";
    o << "bandwidth_mhz = " << r(cfg.noise.bandwidth_hz / 1e6) << "\n";
    o << "\n[noma]\n";
    o << "power_mode = " << (cfg.noma.power_mode == PowerMode::Static ? "static" : "dynamic")
      << "\n";
    o << "gamma_form = " << (cfg.noma.gamma_form == GammaForm::PaperTwoR ? "paper" : "conventional")
      << "\n";
    o << "target_rate_bps_hz = " << r(cfg.noma.target_rate_bps_hz) << "\n";
    o << "link_budget_in_rho = " << (cfg.noma.link_budget_in_rho ? "true" : "false") << "\n";
    o << "cond_interferer_gain = " << r(cfg.noma.cond_interferer_gain) << "\n";
    o << "p_s_dbm = " << r(cfg.noma.p_s_dbm) << "\n";
    o << "\n[fl]\n";
    o << "classes = " << cfg.fl.classes << "\n";
    o << "feature_dim = " << cfg.fl.feature_dim << "\n";
    o << "samples = " << cfg.fl.samples << "\n";
    o << "separation = " << r(cfg.fl.separation) << "\n";
    o << "partition = " << (cfg.fl.partition == PartitionMode::IID ? "iid" : "noniid") << "\n";
    o << "local_epochs = " << cfg.fl.train.local_epochs << "\n";
    o << "batch_size = " << cfg.fl.train.batch_size << "\n";
    o << "l2_reg = " << r(cfg.fl.train.l2_reg) << "\n";
    o << "lr_schedule = "
      << (cfg.fl.train.schedule == LrSchedule::Constant ? "constant" : "decaying") << "\n";
    o << "lr = " << r(cfg.fl.train.lr) << "\n";
    o << "lr_epsilon = " << r(cfg.fl.train.lr_epsilon) << "\n";
    o << "lr_delta0 = " << r(cfg.fl.train.lr_delta0) << "\n";
    o << "train_time_s = " << r(cfg.fl.train_time_s) << "\n";
    o << "model_size_bits_override = " << r(cfg.fl.model_size_bits_override) << "\n";
    o << "\n[protocol]\n";
    o << "direction = " << (cfg.protocol.direction > 0 ? "cw" : "ccw") << "\n";
    o << "isl_rate_mbps = " << r(cfg.protocol.isl_rate_bps / 1e6) << "\n";
    o << "ihl_rate_mbps = " << r(cfg.protocol.ihl_rate_bps / 1e6) << "\n";
    o << "broadcast_rate_mbps = " << r(cfg.protocol.broadcast_rate_bps / 1e6) << "\n";
    o << "instant_links = " << (cfg.protocol.instant_links ? "true" : "false") << "\n";
    o << "outage_coupling = " << (cfg.protocol.outage_coupling ? "true" : "false") << "\n";
    o << "max_rounds = " << cfg.protocol.max_rounds << "\n";
    o << "target_accuracy = " << r(cfg.protocol.target_accuracy) << "\n";
    o << "target_loss = " << r(cfg.protocol.target_loss) << "\n";
    o << "max_sim_time_s = " << r(cfg.protocol.max_sim_time_s) << "\n";
    return o.str();
}

}  // namespace leofl
