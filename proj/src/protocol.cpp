#include "leofl/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include "leofl/constants.hpp"
#include "leofl/noma.hpp"
#include "leofl/rng.hpp"

namespace leofl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

HapRing build_hap_ring(const std::vector<GroundNode>& nodes, double ihl_rate_bps) {
    if (nodes.empty()) throw std::invalid_argument("hap ring: at least one node required");
    HapRing ring;
    ring.ihl_rate_bps = ihl_rate_bps;
    std::vector<size_t> order(nodes.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (nodes[a].longitude_deg != nodes[b].longitude_deg)
            return nodes[a].longitude_deg < nodes[b].longitude_deg;
        return nodes[a].name < nodes[b].name;
    });
    int source_pos = 0;
    for (size_t i = 0; i < order.size(); ++i) {
        ring.haps.push_back(nodes[order[i]].name);
        if (order[i] == 0) source_pos = static_cast<int>(i);  // first node in config order
    }
    ring.source_index = source_pos;
    int n = static_cast<int>(ring.haps.size());
    int best = source_pos, best_d = 0;
    for (int i = 0; i < n; ++i) {
        int d = ring_hops(ring, source_pos, i);
        if (d > best_d) {
            best_d = d;
            best = i;
        }
    }
    ring.sink_index = best;
    return ring;
}

int ring_hops(const HapRing& ring, int from, int to) {
    int n = static_cast<int>(ring.haps.size());
    int d = std::abs(from - to);
    return std::min(d, n - d);
}

std::vector<double> hap_receipt_times(const HapRing& ring, const std::vector<GroundNode>& nodes,
                                      double model_bits, double t0, bool instant) {
    std::map<std::string, const GroundNode*> by_name;
    for (const auto& n : nodes) by_name[n.name] = &n;
    std::vector<double> times(ring.haps.size(), t0);
    if (instant) return times;
    int n = static_cast<int>(ring.haps.size());
    for (int i = 0; i < n; ++i) {
        int hops = ring_hops(ring, ring.source_index, i);
        // March hop by hop along the shorter side (ties resolved toward
        // ascending ring positions) accumulating transfer and propagation.
        int dir = 0;
        if (hops > 0) {
            int up = (i - ring.source_index + n) % n;
            dir = up <= n - up ? 1 : -1;
        }
        double t = t0;
        int cur = ring.source_index;
        for (int h = 0; h < hops; ++h) {
            int nxt = (cur + dir + n) % n;
            Vec3 a = node_position(*by_name.at(ring.haps[static_cast<size_t>(cur)]), t);
            Vec3 b = node_position(*by_name.at(ring.haps[static_cast<size_t>(nxt)]), t);
            t += model_bits / ring.ihl_rate_bps + norm(a - b) / kSpeedOfLight;
            cur = nxt;
        }
        times[static_cast<size_t>(i)] = t;
    }
    return times;
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::HapForward: return "HapForward";
        case EventKind::HapBroadcast: return "HapBroadcast";
        case EventKind::SatTrainDone: return "SatTrainDone";
        case EventKind::IslHop: return "IslHop";
        case EventKind::UplinkDone: return "UplinkDone";
        case EventKind::ReverseForward: return "ReverseForward";
        case EventKind::AggregateReady: return "AggregateReady";
    }
    return "?";
}

namespace {

// Internal event kinds, ordered so that same-timestamp cascades process in
// causal order (broadcasts before training, training before hops, hops before
// uplinks, uplinks before source arrivals).
enum IKind : int {
    kBroadcast = 0,
    kRescueCheck = 1,
    kGlobalArrive = 2,
    kTrainDone = 3,
    kIslArrive = 4,
    kUplinkTry = 5,
    kUplinkFinish = 6,
    kSourceArrive = 7,
};

struct Ev {
    double at = 0.0;
    int kind = 0;
    uint64_t seq = 0;
    int round = 0;
    int a = 0;  // sat linear index or hap index
    size_t payload = 0;
    bool operator>(const Ev& o) const {
        if (at != o.at) return at > o.at;
        if (kind != o.kind) return kind > o.kind;
        return seq > o.seq;
    }
};

struct ChainMsg {
    ModelVector acc;
    std::vector<SatelliteId> contributors;
    double carried_size = 0.0;
    int at_sat = 0;  // linear index of the satellite currently holding it
};

struct Uplink {
    SubOrbitalModel model;
    int uplinker = 0;
    double bits_remaining = 0.0;
    int target_hap = -1;
    int attempt = 0;
    double gain = 0.0;
    double power_coeff = 0.0;
    bool active = false;
};

struct InboxEntry {
    SubOrbitalModel model;
    double receipt_s = 0.0;
};

struct SatState {
    bool has_global = false;
    bool producer = false;
    bool trained = false;
    bool contributed = false;
    ModelVector local;
    std::vector<size_t> parked_chains;
};

struct SimState {
    const ScenarioConfig& cfg;
    const Constellation& cons;
    const std::vector<DatasetShard>& shards;
    Dataset& dataset;
    std::vector<TraceEntry>& trace;
    double model_bits;

    HapRing ring;
    std::vector<int> ring_pos_of_node;  // node index -> ring position
    std::vector<double> shard_size;
    std::vector<double> orbit_total;       // per orbit index
    std::vector<std::vector<int>> orbits;  // orbit index -> sat linear indices
    std::vector<int> orbit_of_sat;
    double total_data = 0.0;
    std::vector<SrSampler> shell_samplers;
    double sigma2 = 0.0;
    double p_s_watts = 0.0;

    std::priority_queue<Ev, std::vector<Ev>, std::greater<Ev>> queue;
    uint64_t seq = 0;
    int round = 0;
    double now = 0.0;
    ModelVector w_global;
    unsigned long long bytes = 0;
    bool waited_this_round = false;

    std::vector<SatState> sat;
    std::vector<ChainMsg> chains;
    std::vector<Uplink> uplinks;
    std::vector<InboxEntry> inbox;
    std::vector<RoundRecord> records;
    bool done = false;

    SimState(const ScenarioConfig& c, const Constellation& cn,
             const std::vector<DatasetShard>& sh, Dataset& ds, std::vector<TraceEntry>& tr,
             double mb)
        : cfg(c), cons(cn), shards(sh), dataset(ds), trace(tr), model_bits(mb) {}

    void push(double at, int kind, int a, size_t payload = 0) {
        queue.push({at, kind, seq++, round, a, payload});
    }

    size_t sat_index(const SatelliteId& id) const {
        const auto& sats = cons.satellites();
        auto it = std::lower_bound(sats.begin(), sats.end(), id);
        return static_cast<size_t>(it - sats.begin());
    }

    const GroundNode& node(int i) const { return cfg.nodes[static_cast<size_t>(i)]; }

    std::string sat_name(int i) const {
        const SatelliteId& id = cons.satellites()[static_cast<size_t>(i)];
        return "sat(" + std::to_string(id.shell) + "," + std::to_string(id.orbit) + "," +
               std::to_string(id.slot) + ")";
    }

    void record_trace(EventKind k, const std::string& src, const std::string& dst, double bits) {
        trace.push_back({now, k, src, dst, bits});
    }

    // --- visibility helpers -------------------------------------------------

    bool visible(int sat_i, int node_i, double t) const {
        return is_visible(cons, cons.satellites()[static_cast<size_t>(sat_i)], node(node_i), t);
    }

    double next_visible_time(int sat_i, int node_i, double from, double horizon) const {
        const SatelliteId& id = cons.satellites()[static_cast<size_t>(sat_i)];
        const GroundNode& nd = node(node_i);
        if (is_visible(cons, id, nd, from)) return from;
        const double step = 30.0;
        for (double t = from + step; t <= horizon; t += step) {
            if (is_visible(cons, id, nd, t)) {
                double lo = t - step, hi = t;
                while (hi - lo > 1.0) {
                    double mid = 0.5 * (lo + hi);
                    if (is_visible(cons, id, nd, mid)) hi = mid; else lo = mid;
                }
                return hi;
            }
        }
        return kInf;
    }

    double visibility_end(int sat_i, int node_i, double from, double horizon) const {
        const SatelliteId& id = cons.satellites()[static_cast<size_t>(sat_i)];
        const GroundNode& nd = node(node_i);
        const double step = 10.0;
        double t = from;
        while (t < horizon && is_visible(cons, id, nd, t + step)) t += step;
        if (t >= horizon) return horizon;
        double lo = t, hi = t + step;
        while (hi - lo > 1.0) {
            double mid = 0.5 * (lo + hi);
            if (is_visible(cons, id, nd, mid)) lo = mid; else hi = mid;
        }
        return lo;
    }

    // Highest-elevation visible PS node for a satellite, or -1.
    int best_visible_hap(int sat_i, double t) const {
        int best = -1;
        double best_el = -1e9;
        for (size_t n = 0; n < cfg.nodes.size(); ++n) {
            double el =
                elevation_deg(cons, cons.satellites()[static_cast<size_t>(sat_i)], node(static_cast<int>(n)), t);
            if (el >= node(static_cast<int>(n)).min_elevation_deg && el > best_el) {
                best_el = el;
                best = static_cast<int>(n);
            }
        }
        return best;
    }

    // --- round phases -------------------------------------------------------

    void start_round() {
        waited_this_round = false;
        for (auto& s : sat) {
            s.has_global = s.producer = s.trained = s.contributed = false;
            s.parked_chains.clear();
        }
        chains.clear();
        uplinks.clear();
        inbox.clear();

        std::vector<double> receipt =
            hap_receipt_times(ring, cfg.nodes, model_bits, now, cfg.protocol.instant_links);
        double last = now;
        for (double t : receipt) last = std::max(last, t);
        // Ring forwarding: every non-source HAP receives one copy.
        int n = static_cast<int>(ring.haps.size());
        for (int i = 0; i < n; ++i)
            if (i != ring.source_index) bytes += static_cast<unsigned long long>(model_bits / 8.0);

        for (size_t pos = 0; pos < ring.haps.size(); ++pos) {
            int node_i = node_index_of_ring_pos(static_cast<int>(pos));
            if (static_cast<int>(pos) != ring.source_index)
                record_trace(EventKind::HapForward, ring.haps[static_cast<size_t>(ring.source_index)],
                             ring.haps[pos], model_bits);
            push(receipt[pos], kBroadcast, node_i);
        }
        push(last, kRescueCheck, 0);
    }

    int node_index_of_ring_pos(int pos) const {
        const std::string& name = ring.haps[static_cast<size_t>(pos)];
        for (size_t i = 0; i < cfg.nodes.size(); ++i)
            if (cfg.nodes[i].name == name) return static_cast<int>(i);
        throw std::logic_error("ring position without node");
    }

    void deliver_global(int sat_i, int node_i) {
        SatState& s = sat[static_cast<size_t>(sat_i)];
        s.has_global = true;
        s.producer = true;
        double slant =
            slant_range(cons, cons.satellites()[static_cast<size_t>(sat_i)], node(node_i), now);
        double delay = cfg.protocol.instant_links
                           ? 0.0
                           : model_bits / cfg.protocol.broadcast_rate_bps + slant / kSpeedOfLight;
        push(now + delay, kGlobalArrive, sat_i);
    }

    void on_broadcast(int node_i) {
        bool any = false;
        for (size_t i = 0; i < sat.size(); ++i) {
            if (sat[i].has_global) continue;
            if (visible(static_cast<int>(i), node_i, now)) {
                deliver_global(static_cast<int>(i), node_i);
                any = true;
            }
        }
        if (any) {
            bytes += static_cast<unsigned long long>(model_bits / 8.0);
            record_trace(EventKind::HapBroadcast, node(node_i).name, "visible-sats", model_bits);
        }
    }

    void on_rescue_check() {
        // Any orbit with no producer waits for its earliest satellite-node
        // contact; the model is then sent to that satellite directly.
        for (size_t o = 0; o < orbits.size(); ++o) {
            bool has_producer = false;
            for (int si : orbits[o]) has_producer |= sat[static_cast<size_t>(si)].producer;
            if (has_producer) continue;
            double best_t = kInf;
            int best_sat = -1, best_node = -1;
            for (int si : orbits[o]) {
                for (size_t n = 0; n < cfg.nodes.size(); ++n) {
                    double tv = next_visible_time(si, static_cast<int>(n), now,
                                                  cfg.protocol.max_sim_time_s);
                    if (tv < best_t) {
                        best_t = tv;
                        best_sat = si;
                        best_node = static_cast<int>(n);
                    }
                }
            }
            if (best_sat < 0 || best_t == kInf) {
                const SatelliteId& id = cons.satellites()[static_cast<size_t>(orbits[o][0])];
                throw std::runtime_error(
                    "unreachable orbit: no satellite of orbit (shell " + std::to_string(id.shell) +
                    ", orbit " + std::to_string(id.orbit) +
                    ") is visible to any parameter server within the simulation horizon");
            }
            push(best_t, kRescueCheck, -(1 + best_sat), static_cast<size_t>(best_node));
        }
    }

    void on_rescue_deliver(int sat_i, int node_i) {
        if (sat[static_cast<size_t>(sat_i)].has_global) return;  // covered meanwhile
        bytes += static_cast<unsigned long long>(model_bits / 8.0);
        record_trace(EventKind::HapBroadcast, node(node_i).name, sat_name(sat_i), model_bits);
        deliver_global(sat_i, node_i);
    }

    void on_global_arrive(int sat_i) {
        push(now + cfg.fl.train_time_s, kTrainDone, sat_i);
    }

    void train_now(int sat_i) {
        SatState& s = sat[static_cast<size_t>(sat_i)];
        const SatelliteId& id = cons.satellites()[static_cast<size_t>(sat_i)];
        uint64_t seed = derive_seed(cfg.seed, "train", static_cast<uint64_t>(id.shell),
                                    static_cast<uint64_t>(id.orbit), static_cast<uint64_t>(id.slot),
                                    static_cast<uint64_t>(round));
        s.local = local_train(w_global, shards[static_cast<size_t>(sat_i)], cfg.fl.train, round, seed);
        s.trained = true;
        record_trace(EventKind::SatTrainDone, sat_name(sat_i), sat_name(sat_i), 0.0);
    }

    void on_train_done(int sat_i) {
        SatState& s = sat[static_cast<size_t>(sat_i)];
        train_now(sat_i);
        if (s.producer) {
            // Start this producer's chain with its own weighted model.
            ChainMsg m;
            m.acc.w.assign(w_global.dim(), 0.0);
            m.acc = suborbital_accumulate(m.acc, s.local, shard_size[static_cast<size_t>(sat_i)],
                                          orbit_total[static_cast<size_t>(orbit_of_sat[static_cast<size_t>(sat_i)])]);
            m.contributors = {cons.satellites()[static_cast<size_t>(sat_i)]};
            m.carried_size = shard_size[static_cast<size_t>(sat_i)];
            m.at_sat = sat_i;
            s.contributed = true;
            chains.push_back(std::move(m));
            forward_chain(chains.size() - 1);
        } else {
            for (size_t ci : s.parked_chains) absorb_and_forward(ci);
            s.parked_chains.clear();
        }
    }

    void forward_chain(size_t chain_i) {
        ChainMsg& m = chains[chain_i];
        const SatelliteId& from = cons.satellites()[static_cast<size_t>(m.at_sat)];
        SatelliteId to = cons.ring_neighbor(from, cfg.protocol.direction);
        int to_i = static_cast<int>(sat_index(to));
        double delay = 0.0;
        double hop_bits = 2.0 * model_bits;  // global model travels with the chain
        if (!cfg.protocol.instant_links) {
            double d = norm(cons.propagate(from, now).position - cons.propagate(to, now).position);
            delay = hop_bits / cfg.protocol.isl_rate_bps + d / kSpeedOfLight;
        }
        bytes += static_cast<unsigned long long>(hop_bits / 8.0);
        record_trace(EventKind::IslHop, sat_name(m.at_sat), sat_name(to_i), hop_bits);
        m.at_sat = to_i;
        push(now + delay, kIslArrive, to_i, chain_i);
    }

    void on_isl_arrive(int sat_i, size_t chain_i) {
        SatState& s = sat[static_cast<size_t>(sat_i)];
        if (s.producer) {
            // Chain terminates here; this producer uplinks it.
            Uplink u;
            u.model.weights = chains[chain_i].acc;
            u.model.contributors = chains[chain_i].contributors;
            std::sort(u.model.contributors.begin(), u.model.contributors.end());
            const SatelliteId& id = u.model.contributors.front();
            u.model.shell = id.shell;
            u.model.orbit = id.orbit;
            u.model.round = round;
            u.model.carried_size = chains[chain_i].carried_size;
            u.uplinker = sat_i;
            u.bits_remaining = model_bits + 96.0 * static_cast<double>(u.model.contributors.size());
            uplinks.push_back(std::move(u));
            push(now, kUplinkTry, sat_i, uplinks.size() - 1);
            return;
        }
        s.has_global = true;
        if (!s.trained) {
            s.parked_chains.push_back(chain_i);
            push(now + cfg.fl.train_time_s, kTrainDone, sat_i);
            return;
        }
        absorb_and_forward(chain_i);
    }

    void absorb_and_forward(size_t chain_i) {
        ChainMsg& m = chains[chain_i];
        int sat_i = m.at_sat;
        SatState& s = sat[static_cast<size_t>(sat_i)];
        m.acc = suborbital_accumulate(m.acc, s.local, shard_size[static_cast<size_t>(sat_i)],
                                      orbit_total[static_cast<size_t>(orbit_of_sat[static_cast<size_t>(sat_i)])]);
        m.contributors.push_back(cons.satellites()[static_cast<size_t>(sat_i)]);
        m.carried_size += shard_size[static_cast<size_t>(sat_i)];
        s.contributed = true;
        forward_chain(chain_i);
    }

    void on_uplink_try(int sat_i, size_t up_i) {
        Uplink& u = uplinks[up_i];
        int hap = best_visible_hap(sat_i, now);
        if (hap < 0) {
            double best = kInf;
            for (size_t n = 0; n < cfg.nodes.size(); ++n)
                best = std::min(best, next_visible_time(sat_i, static_cast<int>(n), now,
                                                        cfg.protocol.max_sim_time_s));
            if (best == kInf)
                throw std::runtime_error("unreachable satellite: " + sat_name(sat_i) +
                                         " never regains visibility within the horizon");
            ++u.attempt;
            push(best, kUplinkTry, sat_i, up_i);
            return;
        }
        u.target_hap = hap;
        if (cfg.protocol.instant_links) {
            u.active = false;
            push(now, kUplinkFinish, sat_i, up_i);
            return;
        }

        const SatelliteId& id = cons.satellites()[static_cast<size_t>(sat_i)];
        uint64_t gseed = derive_seed(cfg.seed, "uplink_gain", static_cast<uint64_t>(round),
                                     static_cast<uint64_t>(sat_i), static_cast<uint64_t>(u.attempt));
        Rng rng(gseed);
        double fading = shell_samplers[static_cast<size_t>(id.shell)].draw(rng);
        double slant = slant_range(cons, id, node(hap), now);
        double budget = cfg.noma.link_budget_in_rho ? shl_budget(cfg.link, slant) : 1.0;
        u.gain = fading * budget;

        // Concurrent NOMA group at this HAP: active uplinks plus this one.
        std::vector<NomaUser> users;
        for (size_t i = 0; i < uplinks.size(); ++i) {
            if (i != up_i && (!uplinks[i].active || uplinks[i].target_hap != hap)) continue;
            const SatelliteId& mid = cons.satellites()[static_cast<size_t>(uplinks[i].uplinker)];
            NomaUser nu;
            nu.sat = mid;
            nu.gain = i == up_i ? u.gain : uplinks[i].gain;
            nu.shell_index = mid.shell;
            nu.target_rate = cfg.noma.target_rate_bps_hz;
            users.push_back(nu);
        }
        // Folded mode: rho = P_s / sigma^2 with the per-user budget already
        // multiplied into the gains; otherwise P_s in dBm is read as rho in dB.
        double rho = cfg.noma.link_budget_in_rho ? p_s_watts / sigma2
                                                 : db_to_linear(cfg.noma.p_s_dbm);
        NomaGroup group = order_by_gain(users, rho);
        std::vector<double> dists(group.users.size());
        for (size_t k = 0; k < group.users.size(); ++k)
            dists[k] = slant_range(cons, group.users[k].sat, node(hap), now);
        allocate_power(group, cfg.noma.power_mode, dists);
        size_t pos = 0;
        for (size_t k = 0; k < group.users.size(); ++k)
            if (group.users[k].sat == id) pos = k;
        double s = sinr(group, pos);

        if (cfg.protocol.outage_coupling) {
            double gamma = gamma_threshold(cfg.noma.target_rate_bps_hz, cfg.noma.gamma_form);
            if (s < gamma) {
                double wend = visibility_end(sat_i, hap, now, cfg.protocol.max_sim_time_s);
                ++u.attempt;
                push(wend + 1.0, kUplinkTry, sat_i, up_i);
                return;
            }
        }

        double rate_bps = std::log2(1.0 + s) * cfg.noise.bandwidth_hz;
        double wend = visibility_end(sat_i, hap, now, cfg.protocol.max_sim_time_s);
        double duration = u.bits_remaining / rate_bps;
        u.active = true;
        u.power_coeff = group.users[pos].power_coeff;
        if (now + duration <= wend) {
            push(now + duration + slant / kSpeedOfLight, kUplinkFinish, sat_i, up_i);
        } else {
            // Visibility ends mid-transfer: bank the transmitted bits and
            // resume at the next contact.
            double sent = (wend - now) * rate_bps;
            u.bits_remaining = std::max(0.0, u.bits_remaining - sent);
            u.active = false;
            ++u.attempt;
            push(wend + 1.0, kUplinkTry, sat_i, up_i);
        }
    }

    void on_uplink_finish(int sat_i, size_t up_i) {
        Uplink& u = uplinks[up_i];
        u.active = false;
        bytes += static_cast<unsigned long long>(
            (model_bits + 96.0 * static_cast<double>(u.model.contributors.size())) / 8.0);
        record_trace(EventKind::UplinkDone, sat_name(sat_i),
                     u.target_hap >= 0 ? node(u.target_hap).name : "?", model_bits);
        // Every currently visible PS receives the broadcast uplink.
        bool delivered = false;
        for (size_t n = 0; n < cfg.nodes.size(); ++n) {
            if (!visible(sat_i, static_cast<int>(n), now)) continue;
            delivered = true;
            route_to_source(static_cast<int>(n), u.model);
        }
        if (!delivered && u.target_hap >= 0) route_to_source(u.target_hap, u.model);
    }

    void route_to_source(int node_i, const SubOrbitalModel& m) {
        int pos = ring_pos_of_node[static_cast<size_t>(node_i)];
        int hops = ring_hops(ring, pos, ring.source_index);
        double t = now;
        if (hops > 0) {
            double hop_bits = model_bits + 96.0 * static_cast<double>(m.contributors.size());
            int n = static_cast<int>(ring.haps.size());
            int up = (ring.source_index - pos + n) % n;
            int dir = up <= n - up ? 1 : -1;
            int cur = pos;
            for (int h = 0; h < hops; ++h) {
                int nxt = (cur + dir + n) % n;
                if (!cfg.protocol.instant_links) {
                    Vec3 a = node_position(node(node_index_of_ring_pos(cur)), t);
                    Vec3 b = node_position(node(node_index_of_ring_pos(nxt)), t);
                    t += hop_bits / ring.ihl_rate_bps + norm(a - b) / kSpeedOfLight;
                }
                bytes += static_cast<unsigned long long>(hop_bits / 8.0);
                record_trace(EventKind::ReverseForward, ring.haps[static_cast<size_t>(cur)],
                             ring.haps[static_cast<size_t>(nxt)], hop_bits);
                cur = nxt;
            }
        }
        size_t slot = inbox.size();
        inbox.push_back({m, t});
        push(t, kSourceArrive, node_i, slot);
    }

    void on_source_arrive(size_t slot) {
        inbox[slot].receipt_s = now;
        try_aggregate();
    }

    // Deduplicate per orbit (larger contributor set wins, earliest receipt
    // breaks ties), then aggregate once every satellite is covered.
    void try_aggregate() {
        std::vector<std::vector<size_t>> per_orbit(orbits.size());
        for (size_t i = 0; i < inbox.size(); ++i) {
            const SubOrbitalModel& m = inbox[i].model;
            size_t o = static_cast<size_t>(
                orbit_of_sat[sat_index({m.shell, m.orbit, m.contributors.front().slot})]);
            per_orbit[o].push_back(i);
        }
        std::vector<std::vector<size_t>> kept(orbits.size());
        for (size_t o = 0; o < orbits.size(); ++o) {
            auto& cand = per_orbit[o];
            std::sort(cand.begin(), cand.end(), [&](size_t a, size_t b) {
                const auto& ma = inbox[a].model;
                const auto& mb = inbox[b].model;
                if (ma.contributors.size() != mb.contributors.size())
                    return ma.contributors.size() > mb.contributors.size();
                if (inbox[a].receipt_s != inbox[b].receipt_s)
                    return inbox[a].receipt_s < inbox[b].receipt_s;
                return ma.contributors < mb.contributors;
            });
            std::set<SatelliteId> covered;
            for (size_t ci : cand) {
                const auto& m = inbox[ci].model;
                bool overlap = false;
                for (const auto& id : m.contributors) overlap |= covered.count(id) > 0;
                if (overlap) continue;
                kept[o].push_back(ci);
                covered.insert(m.contributors.begin(), m.contributors.end());
            }
            if (covered.size() != orbits[o].size()) {
                waited_this_round = true;
                return;  // balancing: wait for the missing contributors
            }
        }

        // Eq.-style aggregation: the gamma-weighted chain models of one orbit
        // sum to that orbit's FedAvg; orbits combine weighted by their data
        // share so every satellite's effective weight is |D_k| / |D|.
        ModelVector next;
        next.w.assign(w_global.dim(), 0.0);
        int contributors = 0;
        for (size_t o = 0; o < orbits.size(); ++o) {
            ModelVector orbit_model;
            orbit_model.w.assign(w_global.dim(), 0.0);
            for (size_t ci : kept[o]) {
                const auto& m = inbox[ci].model;
                for (size_t i = 0; i < orbit_model.w.size(); ++i)
                    orbit_model.w[i] += m.weights.w[i];
                contributors += static_cast<int>(m.contributors.size());
            }
            double wgt = orbit_total[o] / total_data;
            for (size_t i = 0; i < next.w.size(); ++i) next.w[i] += wgt * orbit_model.w[i];
        }
        record_trace(EventKind::AggregateReady, ring.haps[static_cast<size_t>(ring.source_index)],
                     "global", model_bits);

        w_global = std::move(next);
        EvalResult ev = evaluate(w_global, dataset, cfg.fl.train.l2_reg);
        RoundRecord rec;
        rec.round = round;
        rec.global_model = w_global;
        rec.sim_time_s = now;
        rec.bytes_transmitted = bytes;
        rec.contributors_count = contributors;
        rec.waited = waited_this_round;
        rec.loss = ev.loss;
        rec.accuracy = ev.accuracy;
        records.push_back(std::move(rec));

        ++round;
        if (terminated()) {
            done = true;
            return;
        }
        start_round();
    }

    bool terminated() const {
        if (round >= cfg.protocol.max_rounds) return true;
        if (!records.empty()) {
            if (cfg.protocol.target_accuracy <= 1.0 &&
                records.back().accuracy >= cfg.protocol.target_accuracy)
                return true;
            if (cfg.protocol.target_loss >= 0.0 && records.back().loss <= cfg.protocol.target_loss)
                return true;
        }
        if (now > cfg.protocol.max_sim_time_s) return true;
        return false;
    }

    void run() {
        start_round();
        while (!done && !queue.empty()) {
            Ev ev = queue.top();
            queue.pop();
            if (ev.round != round) continue;  // stale duplicate from a closed round
            if (ev.at > cfg.protocol.max_sim_time_s) break;
            now = ev.at;
            switch (ev.kind) {
                case kBroadcast: on_broadcast(ev.a); break;
                case kRescueCheck:
                    if (ev.a < 0)
                        on_rescue_deliver(-(ev.a + 1), static_cast<int>(ev.payload));
                    else
                        on_rescue_check();
                    break;
                case kGlobalArrive: on_global_arrive(ev.a); break;
                case kTrainDone: on_train_done(ev.a); break;
                case kIslArrive: on_isl_arrive(ev.a, ev.payload); break;
                case kUplinkTry: on_uplink_try(ev.a, ev.payload); break;
                case kUplinkFinish: on_uplink_finish(ev.a, ev.payload); break;
                case kSourceArrive: on_source_arrive(ev.payload); break;
                default: throw std::logic_error("unknown event kind");
            }
        }
        if (!done && records.empty() && queue.empty())
            throw std::runtime_error(
                "protocol stalled: no rounds completed and no events pending (check visibility "
                "configuration)");
    }
};

}  // namespace

Simulator::Simulator(const ScenarioConfig& cfg)
    : cfg_(cfg), constellation_(cfg.shell_specs()) {
    if (cfg_.nodes.empty())
        throw ConfigError("scenario: at least one parameter-server node (HAP or GS) is required");
    dataset_ = generate_synthetic(cfg_.fl.classes, cfg_.fl.feature_dim, cfg_.fl.samples,
                                  cfg_.fl.separation, derive_seed(cfg_.seed, "dataset"));
    shards_ = partition(dataset_, cfg_.fl.partition, constellation_, derive_seed(cfg_.seed, "partition"));
    double dim_bits =
        32.0 * static_cast<double>(model_dim(cfg_.fl.classes, cfg_.fl.feature_dim));
    model_bits_ = cfg_.fl.model_size_bits_override > 0.0
                      ? cfg_.fl.model_size_bits_override
                      : dim_bits + 96.0 * static_cast<double>(constellation_.size());
}

std::vector<RoundRecord> Simulator::run_training() {
    trace_.clear();
    SimState st(cfg_, constellation_, shards_, dataset_, trace_, model_bits_);

    st.ring = build_hap_ring(cfg_.nodes, cfg_.protocol.ihl_rate_bps);
    st.ring_pos_of_node.assign(cfg_.nodes.size(), 0);
    for (size_t pos = 0; pos < st.ring.haps.size(); ++pos)
        for (size_t n = 0; n < cfg_.nodes.size(); ++n)
            if (cfg_.nodes[n].name == st.ring.haps[pos])
                st.ring_pos_of_node[n] = static_cast<int>(pos);

    const auto& sats = constellation_.satellites();
    st.sat.resize(sats.size());
    st.shard_size.resize(sats.size());
    st.orbit_of_sat.assign(sats.size(), 0);
    std::map<std::pair<int, int>, int> orbit_key;
    for (size_t i = 0; i < sats.size(); ++i) {
        st.shard_size[i] = static_cast<double>(shards_[i].data.n);
        std::pair<int, int> key{sats[i].shell, sats[i].orbit};
        auto [it, inserted] = orbit_key.try_emplace(key, static_cast<int>(st.orbits.size()));
        if (inserted) {
            st.orbits.emplace_back();
            st.orbit_total.push_back(0.0);
        }
        st.orbit_of_sat[i] = it->second;
        st.orbits[static_cast<size_t>(it->second)].push_back(static_cast<int>(i));
        st.orbit_total[static_cast<size_t>(it->second)] += st.shard_size[i];
        st.total_data += st.shard_size[i];
    }
    for (const auto& sh : cfg_.shells) st.shell_samplers.emplace_back(sh.sr_params());
    st.sigma2 = noise_power(cfg_.noise);
    st.p_s_watts = dbm_to_watts(cfg_.noma.p_s_dbm);
    st.w_global.w.assign(model_dim(cfg_.fl.classes, cfg_.fl.feature_dim), 0.0);

    st.run();
    return std::move(st.records);
}

std::vector<ModelVector> reference_fedavg_rounds(const ScenarioConfig& cfg, int rounds) {
    Constellation cons(cfg.shell_specs());
    Dataset data = generate_synthetic(cfg.fl.classes, cfg.fl.feature_dim, cfg.fl.samples,
                                      cfg.fl.separation, derive_seed(cfg.seed, "dataset"));
    std::vector<DatasetShard> shards =
        partition(data, cfg.fl.partition, cons, derive_seed(cfg.seed, "partition"));
    ModelVector global;
    global.w.assign(model_dim(cfg.fl.classes, cfg.fl.feature_dim), 0.0);
    std::vector<ModelVector> out;
    for (int r = 0; r < rounds; ++r) {
        std::vector<ModelVector> locals;
        std::vector<double> sizes;
        for (size_t k = 0; k < shards.size(); ++k) {
            const SatelliteId& id = shards[k].owner;
            uint64_t seed =
                derive_seed(cfg.seed, "train", static_cast<uint64_t>(id.shell),
                            static_cast<uint64_t>(id.orbit), static_cast<uint64_t>(id.slot),
                            static_cast<uint64_t>(r));
            locals.push_back(local_train(global, shards[k], cfg.fl.train, r, seed));
            sizes.push_back(static_cast<double>(shards[k].data.n));
        }
        global = fedavg(locals, sizes);
        out.push_back(global);
    }
    return out;
}

}  // namespace leofl
