#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "leofl/channel.hpp"
#include "leofl/constellation.hpp"
#include "leofl/fl.hpp"
#include "leofl/noma.hpp"

namespace leofl {

// Thrown for any configuration problem; the message carries the field path.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ShellConfig {
    ShellSpec spec;
    double sr_2b = 0.279;
    int sr_m = 2;
    double sr_omega = 0.251;
    ShadowedRicianParams sr_params() const {
        return ShadowedRicianParams::from_2b(sr_2b, sr_m, sr_omega);
    }
};

struct NomaConfig {
    PowerMode power_mode = PowerMode::Static;
    GammaForm gamma_form = GammaForm::PaperTwoR;
    double target_rate_bps_hz = 1.0;
    bool link_budget_in_rho = false;
    double cond_interferer_gain = -1.0;  // < 0: use the NS shell mean 2b + omega
    double p_s_dbm = 30.0;
};

struct FlConfig {
    int classes = 4;
    int feature_dim = 16;
    int samples = 1200;
    double separation = 2.0;
    PartitionMode partition = PartitionMode::IID;
    TrainConfig train;
    double train_time_s = 1.0;
    double model_size_bits_override = 0.0;  // 0: dim * 32 + id metadata
};

struct ProtocolConfig {
    int direction = 1;  // +1 clockwise (ascending slot), -1 counterclockwise
    double isl_rate_bps = 100e6;
    double ihl_rate_bps = 500e6;
    double broadcast_rate_bps = 500e6;
    bool instant_links = false;
    bool outage_coupling = false;
    int max_rounds = 50;
    double target_accuracy = 2.0;  // > 1 disables
    double target_loss = -1.0;     // < 0 disables
    double max_sim_time_s = 432000.0;
};

struct ScenarioConfig {
    uint64_t seed = 1;
    std::vector<ShellConfig> shells;
    std::vector<GroundNode> nodes;
    LinkBudgetParams link;
    NoiseParams noise;
    NomaConfig noma;
    FlConfig fl;
    ProtocolConfig protocol;

    std::vector<ShellSpec> shell_specs() const {
        std::vector<ShellSpec> v;
        for (const auto& s : shells) v.push_back(s.spec);
        return v;
    }
};

// Nested key-value scenario format: [section] headers ([shell] and [node]
// repeat), key = value lines, '#' comments. Unknown keys or sections are
// errors with the offending field path in the message.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);
std::string serialize_scenario(const ScenarioConfig& cfg);

}  // namespace leofl
