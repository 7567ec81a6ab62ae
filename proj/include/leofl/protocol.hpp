#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leofl/constellation.hpp"
#include "leofl/fl.hpp"
#include "leofl/scenario.hpp"

namespace leofl {

// Parameter-server ring. Order is by ascending longitude; the source is the
// first node in the scenario, the sink the ring-farthest node from it.
struct HapRing {
    std::vector<std::string> haps;  // node names in ring order
    int source_index = 0;           // position in `haps`
    int sink_index = 0;
    double ihl_rate_bps = 500e6;
};

HapRing build_hap_ring(const std::vector<GroundNode>& nodes, double ihl_rate_bps);

// Minimal ring-hop distance between two ring positions.
int ring_hops(const HapRing& ring, int from, int to);

// Receipt time of the global model at every ring position when the source
// starts forwarding at t0; hop cost is model_bits / ihl_rate plus the
// hop propagation delay evaluated at t0.
std::vector<double> hap_receipt_times(const HapRing& ring, const std::vector<GroundNode>& nodes,
                                      double model_bits, double t0, bool instant);

struct SubOrbitalModel {
    ModelVector weights;                    // partially aggregated, gamma-weighted
    std::vector<SatelliteId> contributors;  // sorted, unique, all same orbit
    int shell = 0;
    int orbit = 0;
    int round = 0;
    double carried_size = 0.0;  // total |D| of the contributors
};

enum class EventKind {
    HapForward,
    HapBroadcast,
    SatTrainDone,
    IslHop,
    UplinkDone,
    ReverseForward,
    AggregateReady,
};

struct TraceEntry {
    double at_s = 0.0;
    EventKind kind = EventKind::HapForward;
    std::string src;
    std::string dst;
    double bits = 0.0;
};

struct RoundRecord {
    int round = 0;
    ModelVector global_model;
    double sim_time_s = 0.0;
    unsigned long long bytes_transmitted = 0;
    int contributors_count = 0;
    bool waited = false;  // aggregation deferred at least once this round
    double loss = 0.0;
    double accuracy = 0.0;
};

// Discrete-event engine for the three-phase model propagation (HAP ring
// forwarding, intra-orbit chains over ISLs, NOMA uplinks and reverse
// forwarding) plus the sort/dedup/balance aggregation rule. Deterministic for
// a fixed scenario and seed.
class Simulator {
  public:
    explicit Simulator(const ScenarioConfig& cfg);

    std::vector<RoundRecord> run_training();

    const Dataset& dataset() const { return dataset_; }
    const Constellation& constellation() const { return constellation_; }
    const std::vector<DatasetShard>& shards() const { return shards_; }
    const std::vector<TraceEntry>& trace() const { return trace_; }
    double model_bits() const { return model_bits_; }

  private:
    ScenarioConfig cfg_;
    Constellation constellation_;
    Dataset dataset_;
    std::vector<DatasetShard> shards_;
    std::vector<TraceEntry> trace_;
    double model_bits_ = 0.0;
};

// Reference FedAvg loop with the same per-(satellite, round) seed derivation
// as the simulator; the protocol with all-visible satellites and instant
// links must reproduce it round by round.
std::vector<ModelVector> reference_fedavg_rounds(const ScenarioConfig& cfg, int rounds);

const char* event_kind_name(EventKind k);

}  // namespace leofl
