#include "leofl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "leofl/rng.hpp"

namespace leofl {

namespace {

double max_row_norm_sq(const Dataset& data) {
    double best = 0.0;
    for (size_t i = 0; i < data.n; ++i) {
        double s = 1.0;  // bias feature
        for (size_t j = 0; j < data.d; ++j) {
            double v = data.features[i * data.d + j];
            s += v * v;
        }
        best = std::max(best, s);
    }
    return best;
}

double norm_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double dist_sq(const ModelVector& a, const ModelVector& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.dim(); ++i) {
        double d = a.w[i] - b.w[i];
        s += d * d;
    }
    return s;
}

}  // namespace

ModelVector full_batch_optimize(const Dataset& data, double l2_reg, double grad_tol,
                                int max_iters) {
    if (!(l2_reg > 0.0))
        throw std::invalid_argument("full_batch_optimize: needs l2_reg > 0 for strong convexity");
    ModelVector w;
    w.w.assign(model_dim(data.classes, static_cast<int>(data.d)), 0.0);
    double big_l = l2_reg + 0.5 * max_row_norm_sq(data);
    double lr = 2.0 / (big_l + l2_reg);
    std::vector<double> grad;
    for (int it = 0; it < max_iters; ++it) {
        logistic_grad(w, data, l2_reg, {}, grad);
        double gn = std::sqrt(norm_sq(grad));
        if (gn <= grad_tol) return w;
        for (size_t i = 0; i < w.w.size(); ++i) w.w[i] -= lr * grad[i];
    }
    throw std::runtime_error("full_batch_optimize: did not reach gradient tolerance");
}

ConvergenceConstants estimate_constants(const Dataset& data,
                                        const std::vector<DatasetShard>& shards, double l2_reg,
                                        int local_E, int batch_size, uint64_t seed) {
    if (shards.empty()) throw std::invalid_argument("estimate_constants: no shards");
    ConvergenceConstants c;
    c.strong_mu = l2_reg;
    c.smooth_L = l2_reg + 0.5 * max_row_norm_sq(data);
    c.local_E = local_E;

    double total = 0.0;
    for (const auto& sh : shards) total += static_cast<double>(sh.data.n);
    for (const auto& sh : shards) c.alpha_k.push_back(static_cast<double>(sh.data.n) / total);

    c.w_star = full_batch_optimize(data, l2_reg, 1e-10);
    c.f_star = logistic_loss(c.w_star, data, l2_reg);

    double sum_alpha_fk = 0.0;
    for (size_t k = 0; k < shards.size(); ++k) {
        ModelVector wk = full_batch_optimize(shards[k].data, l2_reg, 1e-8);
        sum_alpha_fk += c.alpha_k[k] * logistic_loss(wk, shards[k].data, l2_reg);
    }
    c.gamma_gap = std::max(0.0, c.f_star - sum_alpha_fk);

    // Empirical sigma_k and G: maxima over sampled mini-batch gradients at
    // probe points covering the w0 -> w* trajectory, then a 1.2 safety factor.
    ModelVector w0;
    w0.w.assign(c.w_star.dim(), 0.0);
    ModelVector mid;
    mid.w.resize(c.w_star.dim());
    for (size_t i = 0; i < mid.w.size(); ++i) mid.w[i] = 0.5 * c.w_star.w[i];
    ModelVector over;
    over.w.resize(c.w_star.dim());
    for (size_t i = 0; i < over.w.size(); ++i) over.w[i] = 1.5 * c.w_star.w[i];
    const ModelVector* probes[] = {&w0, &mid, &c.w_star, &over};

    const int draws = 64;
    double g_max_sq = 0.0;
    std::vector<double> gfull, gbatch;
    std::vector<size_t> idx(static_cast<size_t>(batch_size));
    c.sigma_k.assign(shards.size(), 0.0);
    for (size_t k = 0; k < shards.size(); ++k) {
        const Dataset& dk = shards[k].data;
        Rng rng(derive_seed(seed, "constants", static_cast<uint64_t>(k)));
        double sigma_sq = 0.0;
        for (const ModelVector* w : probes) {
            logistic_grad(*w, dk, l2_reg, {}, gfull);
            for (int s = 0; s < draws; ++s) {
                for (auto& i : idx) i = static_cast<size_t>(rng.uniform_below(dk.n));
                logistic_grad(*w, dk, l2_reg, idx, gbatch);
                double diff = 0.0;
                for (size_t i = 0; i < gbatch.size(); ++i) {
                    double d = gbatch[i] - gfull[i];
                    diff += d * d;
                }
                sigma_sq = std::max(sigma_sq, diff);
                g_max_sq = std::max(g_max_sq, norm_sq(gbatch));
            }
        }
        c.sigma_k[k] = std::sqrt(sigma_sq) * 1.2;
    }
    c.grad_G = std::sqrt(g_max_sq) * 1.2;
    return c;
}

double theorem1_bound(const ConvergenceConstants& c, double w0_dist_sq, int beta) {
    double upsilon = c.smooth_L / c.strong_mu;
    double delta = std::max(8.0 * upsilon, static_cast<double>(c.local_E));
    double z = 0.0;
    for (size_t k = 0; k < c.sigma_k.size(); ++k)
        z += c.alpha_k[k] * c.alpha_k[k] * c.sigma_k[k] * c.sigma_k[k];
    z += 6.0 * c.smooth_L * c.gamma_gap;
    z += 8.0 * (c.local_E - 1.0) * (c.local_E - 1.0) * c.grad_G * c.grad_G;
    return (2.0 * upsilon / (delta + beta)) *
           (z / c.strong_mu + 2.0 * c.smooth_L * w0_dist_sq);
}

namespace {

// One seed of the appendix-style loop: per-client SGD with synchronization
// every E steps; records the virtual averages and per-step statistics.
struct TraceAccum {
    std::vector<double> gap;    // F(w_bar^beta) - F*
    std::vector<double> delta;  // ||w_bar^beta - w*||^2
    std::vector<double> var;    // ||g^beta - gbar^beta||^2
    std::vector<double> drift;  // sum alpha_k ||w_bar^beta - w_k^beta||^2
};

void run_trace(const Dataset& data, const std::vector<DatasetShard>& shards,
               const ConvergenceConstants& c, double l2_reg, int batch_size, int steps,
               uint64_t seed, TraceAccum& acc) {
    size_t dim = c.w_star.dim();
    size_t kn = shards.size();
    double delta_sched = std::max(8.0 * c.smooth_L / c.strong_mu, static_cast<double>(c.local_E));

    std::vector<ModelVector> w(kn);
    for (auto& m : w) m.w.assign(dim, 0.0);
    ModelVector wbar;
    wbar.w.assign(dim, 0.0);

    std::vector<double> g(dim), gbar(dim), gfull, gbatch;
    std::vector<size_t> idx(static_cast<size_t>(batch_size));
    Rng rng(seed);

    for (int beta = 0; beta <= steps; ++beta) {
        // Virtual average and the statistics at the current step.
        std::fill(wbar.w.begin(), wbar.w.end(), 0.0);
        for (size_t k = 0; k < kn; ++k)
            for (size_t i = 0; i < dim; ++i) wbar.w[i] += c.alpha_k[k] * w[k].w[i];
        acc.gap[static_cast<size_t>(beta)] += logistic_loss(wbar, data, l2_reg) - c.f_star;
        acc.delta[static_cast<size_t>(beta)] += dist_sq(wbar, c.w_star);
        double drift = 0.0;
        for (size_t k = 0; k < kn; ++k) drift += c.alpha_k[k] * dist_sq(wbar, w[k]);
        acc.drift[static_cast<size_t>(beta)] += drift;
        if (beta == steps) break;

        double zeta = 2.0 / (c.strong_mu * (delta_sched + beta));
        std::fill(g.begin(), g.end(), 0.0);
        std::fill(gbar.begin(), gbar.end(), 0.0);
        for (size_t k = 0; k < kn; ++k) {
            const Dataset& dk = shards[k].data;
            for (auto& i : idx) i = static_cast<size_t>(rng.uniform_below(dk.n));
            logistic_grad(w[k], dk, l2_reg, idx, gbatch);
            logistic_grad(w[k], dk, l2_reg, {}, gfull);
            for (size_t i = 0; i < dim; ++i) {
                g[i] += c.alpha_k[k] * gbatch[i];
                gbar[i] += c.alpha_k[k] * gfull[i];
                w[k].w[i] -= zeta * gbatch[i];
            }
        }
        double var = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            double d = g[i] - gbar[i];
            var += d * d;
        }
        acc.var[static_cast<size_t>(beta)] += var;

        if ((beta + 1) % c.local_E == 0) {
            std::fill(wbar.w.begin(), wbar.w.end(), 0.0);
            for (size_t k = 0; k < kn; ++k)
                for (size_t i = 0; i < dim; ++i) wbar.w[i] += c.alpha_k[k] * w[k].w[i];
            for (size_t k = 0; k < kn; ++k) w[k] = wbar;
        }
    }
}

TraceAccum averaged_trace(const Dataset& data, const std::vector<DatasetShard>& shards,
                          const ConvergenceConstants& c, double l2_reg, int batch_size, int steps,
                          int seeds, uint64_t seed) {
    TraceAccum acc;
    acc.gap.assign(static_cast<size_t>(steps) + 1, 0.0);
    acc.delta.assign(static_cast<size_t>(steps) + 1, 0.0);
    acc.var.assign(static_cast<size_t>(steps), 0.0);
    acc.drift.assign(static_cast<size_t>(steps) + 1, 0.0);
    for (int s = 0; s < seeds; ++s)
        run_trace(data, shards, c, l2_reg, batch_size, steps,
                  derive_seed(seed, "trace", static_cast<uint64_t>(s)), acc);
    for (auto& v : acc.gap) v /= seeds;
    for (auto& v : acc.delta) v /= seeds;
    for (auto& v : acc.var) v /= seeds;
    for (auto& v : acc.drift) v /= seeds;
    return acc;
}

}  // namespace

std::vector<BoundCurvePoint> theorem1_curve(const Dataset& data,
                                            const std::vector<DatasetShard>& shards,
                                            const ConvergenceConstants& c, double l2_reg,
                                            int batch_size, int steps, int seeds, uint64_t seed) {
    TraceAccum acc = averaged_trace(data, shards, c, l2_reg, batch_size, steps, seeds, seed);
    double w0_dist = norm_sq(c.w_star.w);  // w0 = 0
    std::vector<BoundCurvePoint> pts;
    pts.reserve(static_cast<size_t>(steps) + 1);
    for (int beta = 0; beta <= steps; ++beta)
        pts.push_back({beta, acc.gap[static_cast<size_t>(beta)], theorem1_bound(c, w0_dist, beta)});
    return pts;
}

LemmaReport verify_lemmas(const Dataset& data, const std::vector<DatasetShard>& shards,
                          const ConvergenceConstants& c, const TrainConfig& cfg, int steps,
                          int seeds, uint64_t seed) {
    LemmaReport rep;
    if (cfg.schedule != LrSchedule::Decaying) {
        rep.skipped = true;
        rep.note = "lemma checks require the decaying schedule; constant lr trace skipped";
        return rep;
    }
    TraceAccum acc =
        averaged_trace(data, shards, c, cfg.l2_reg, cfg.batch_size, steps, seeds, seed);
    double delta_sched = std::max(8.0 * c.smooth_L / c.strong_mu, static_cast<double>(c.local_E));
    double z = 0.0;
    for (size_t k = 0; k < c.sigma_k.size(); ++k)
        z += c.alpha_k[k] * c.alpha_k[k] * c.sigma_k[k] * c.sigma_k[k];
    z += 6.0 * c.smooth_L * c.gamma_gap;
    z += 8.0 * (c.local_E - 1.0) * (c.local_E - 1.0) * c.grad_G * c.grad_G;
    double var_bound = 0.0;
    for (size_t k = 0; k < c.sigma_k.size(); ++k)
        var_bound += c.alpha_k[k] * c.alpha_k[k] * c.sigma_k[k] * c.sigma_k[k];

    int pass1 = 0, pass2 = 0, pass3 = 0;
    rep.steps = steps;
    for (int beta = 0; beta < steps; ++beta) {
        double zeta = 2.0 / (c.strong_mu * (delta_sched + beta));
        size_t b = static_cast<size_t>(beta);

        double rhs1 = (1.0 - zeta * c.strong_mu) * acc.delta[b] + zeta * zeta * z;
        double m1 = acc.delta[b + 1] / std::max(rhs1, 1e-300);
        rep.lemma1_worst_margin = std::max(rep.lemma1_worst_margin, m1);
        pass1 += m1 <= 1.0;

        double m2 = acc.var[b] / std::max(var_bound, 1e-300);
        rep.lemma2_worst_margin = std::max(rep.lemma2_worst_margin, m2);
        pass2 += m2 <= 1.0;

        double rhs3 = 4.0 * zeta * zeta * (c.local_E - 1.0) * (c.local_E - 1.0) * c.grad_G *
                      c.grad_G;
        double m3 = c.local_E == 1 ? (acc.drift[b] > 0.0 ? 2.0 : 0.0)
                                   : acc.drift[b] / std::max(rhs3, 1e-300);
        rep.lemma3_worst_margin = std::max(rep.lemma3_worst_margin, m3);
        pass3 += m3 <= 1.0;
    }
    rep.lemma1_pass_fraction = static_cast<double>(pass1) / steps;
    rep.lemma2_pass_fraction = static_cast<double>(pass2) / steps;
    rep.lemma3_pass_fraction = static_cast<double>(pass3) / steps;
    return rep;
}

void emit_bound_curve(const std::vector<BoundCurvePoint>& pts, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("emit_bound_curve: cannot open " + path);
    f << "beta,empirical_gap,bound,margin_ratio\n";
    char buf[160];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", p.beta, p.empirical, p.bound,
                      p.empirical / p.bound);
        f << buf;
    }
}

}  // namespace leofl
