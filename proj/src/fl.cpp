#include "leofl/fl.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "leofl/rng.hpp"

namespace leofl {

size_t model_dim(int classes, int feature_dim) {
    return static_cast<size_t>(classes) * (static_cast<size_t>(feature_dim) + 1);
}

Dataset generate_synthetic(int classes, int dim, int n, double separation, uint64_t seed) {
    if (classes < 2 || dim < 1 || n < 1)
        throw std::invalid_argument("generate_synthetic: need classes >= 2, dim >= 1, n >= 1");
    Dataset ds;
    ds.n = static_cast<size_t>(n);
    ds.d = static_cast<size_t>(dim);
    ds.classes = classes;
    ds.features.resize(ds.n * ds.d);
    ds.labels.resize(ds.n);

    // Class centers: random unit directions scaled by the separation.
    std::vector<double> centers(static_cast<size_t>(classes) * ds.d);
    Rng crng(derive_seed(seed, "synth_centers"));
    for (int c = 0; c < classes; ++c) {
        double nrm = 0.0;
        for (size_t j = 0; j < ds.d; ++j) {
            double v = crng.normal();
            centers[c * ds.d + j] = v;
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) nrm = 1.0;
        for (size_t j = 0; j < ds.d; ++j) centers[c * ds.d + j] *= separation / nrm;
    }
    Rng xrng(derive_seed(seed, "synth_samples"));
    for (size_t i = 0; i < ds.n; ++i) {
        int c = static_cast<int>(i % static_cast<size_t>(classes));
        ds.labels[i] = c;
        for (size_t j = 0; j < ds.d; ++j)
            ds.features[i * ds.d + j] = centers[c * ds.d + j] + xrng.normal();
    }
    return ds;
}

namespace {

DatasetShard make_shard(const Dataset& data, const std::vector<size_t>& idx, SatelliteId owner) {
    DatasetShard sh;
    sh.owner = owner;
    sh.data.n = idx.size();
    sh.data.d = data.d;
    sh.data.classes = data.classes;
    sh.data.features.resize(idx.size() * data.d);
    sh.data.labels.resize(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) {
        std::copy_n(&data.features[idx[r] * data.d], data.d, &sh.data.features[r * data.d]);
        sh.data.labels[r] = data.labels[idx[r]];
    }
    return sh;
}

}  // namespace

std::vector<DatasetShard> partition(const Dataset& data, PartitionMode mode,
                                    const Constellation& c, uint64_t seed) {
    const auto& sats = c.satellites();
    if (sats.empty()) throw std::invalid_argument("partition: empty constellation");
    if (data.n < sats.size())
        throw std::invalid_argument("partition: fewer samples than satellites");
    std::vector<DatasetShard> shards;
    shards.reserve(sats.size());

    if (mode == PartitionMode::IID) {
        std::vector<size_t> order(data.n);
        std::iota(order.begin(), order.end(), size_t{0});
        Rng rng(derive_seed(seed, "partition_iid"));
        rng.shuffle(order);
        size_t base = data.n / sats.size();
        size_t extra = data.n % sats.size();
        size_t pos = 0;
        for (size_t s = 0; s < sats.size(); ++s) {
            size_t take = base + (s < extra ? 1 : 0);
            std::vector<size_t> idx(order.begin() + pos, order.begin() + pos + take);
            pos += take;
            shards.push_back(make_shard(data, idx, sats[s]));
        }
        return shards;
    }

    // Non-IID: shells own disjoint class groups sized {30%, 30%, 40%}.
    size_t n_shells = c.shells().size();
    if (n_shells != 3)
        throw std::invalid_argument("partition: non-IID split is defined for 3 shells");
    int c30 = static_cast<int>(std::floor(0.3 * data.classes));
    if (c30 < 1) throw std::invalid_argument("partition: too few classes for non-IID split");
    std::vector<int> class_shell(static_cast<size_t>(data.classes));
    for (int cl = 0; cl < data.classes; ++cl)
        class_shell[cl] = cl < c30 ? 0 : (cl < 2 * c30 ? 1 : 2);

    // Satellites per shell, then per-satellite round-robin over the shell's
    // class sample lists so classes split equally within a shell.
    std::vector<std::vector<size_t>> shell_sats(n_shells);
    for (size_t s = 0; s < sats.size(); ++s)
        shell_sats[static_cast<size_t>(sats[s].shell)].push_back(s);
    std::vector<std::vector<size_t>> per_sat_idx(sats.size());
    std::vector<std::vector<size_t>> class_rows(static_cast<size_t>(data.classes));
    for (size_t i = 0; i < data.n; ++i)
        class_rows[static_cast<size_t>(data.labels[i])].push_back(i);
    Rng rng(derive_seed(seed, "partition_noniid"));
    for (auto& rows : class_rows) rng.shuffle(rows);

    for (int cl = 0; cl < data.classes; ++cl) {
        const auto& owners = shell_sats[static_cast<size_t>(class_shell[cl])];
        if (owners.empty()) throw std::invalid_argument("partition: shell without satellites");
        const auto& rows = class_rows[static_cast<size_t>(cl)];
        for (size_t r = 0; r < rows.size(); ++r)
            per_sat_idx[owners[r % owners.size()]].push_back(rows[r]);
    }
    for (size_t s = 0; s < sats.size(); ++s) {
        if (per_sat_idx[s].empty())
            throw std::invalid_argument("partition: satellite received no data");
        std::sort(per_sat_idx[s].begin(), per_sat_idx[s].end());
        shards.push_back(make_shard(data, per_sat_idx[s], sats[s]));
    }
    return shards;
}

namespace {

// Softmax cross-entropy over one row; returns loss, accumulates gradient.
double row_loss_grad(const ModelVector& m, const Dataset& data, size_t row,
                     std::vector<double>* grad) {
    size_t stride = data.d + 1;
    int classes = data.classes;
    const double* x = &data.features[row * data.d];
    thread_local std::vector<double> logits;
    logits.assign(static_cast<size_t>(classes), 0.0);
    for (int c = 0; c < classes; ++c) {
        const double* wc = &m.w[static_cast<size_t>(c) * stride];
        double z = wc[data.d];  // bias
        for (size_t j = 0; j < data.d; ++j) z += wc[j] * x[j];
        logits[static_cast<size_t>(c)] = z;
    }
    double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - zmax);
        sum += z;
    }
    int y = data.labels[row];
    double p_y = logits[static_cast<size_t>(y)] / sum;
    if (grad) {
        for (int c = 0; c < classes; ++c) {
            double p = logits[static_cast<size_t>(c)] / sum;
            double g = p - (c == y ? 1.0 : 0.0);
            double* gc = &(*grad)[static_cast<size_t>(c) * stride];
            for (size_t j = 0; j < data.d; ++j) gc[j] += g * x[j];
            gc[data.d] += g;
        }
    }
    return -std::log(std::max(p_y, 1e-300));
}

}  // namespace

double logistic_loss(const ModelVector& m, const Dataset& data, double l2_reg,
                     std::span<const size_t> idx) {
    if (m.dim() != model_dim(data.classes, static_cast<int>(data.d)))
        throw std::invalid_argument("logistic_loss: model/dataset dimension mismatch");
    double total = 0.0;
    size_t count = idx.empty() ? data.n : idx.size();
    for (size_t r = 0; r < count; ++r) total += row_loss_grad(m, data, idx.empty() ? r : idx[r], nullptr);
    total /= static_cast<double>(count);
    double reg = 0.0;
    for (double wi : m.w) reg += wi * wi;
    return total + 0.5 * l2_reg * reg;
}

void logistic_grad(const ModelVector& m, const Dataset& data, double l2_reg,
                   std::span<const size_t> idx, std::vector<double>& grad_out) {
    if (m.dim() != model_dim(data.classes, static_cast<int>(data.d)))
        throw std::invalid_argument("logistic_grad: model/dataset dimension mismatch");
    grad_out.assign(m.dim(), 0.0);
    size_t count = idx.empty() ? data.n : idx.size();
    for (size_t r = 0; r < count; ++r) row_loss_grad(m, data, idx.empty() ? r : idx[r], &grad_out);
    double inv = 1.0 / static_cast<double>(count);
    for (size_t i = 0; i < grad_out.size(); ++i) grad_out[i] = grad_out[i] * inv + l2_reg * m.w[i];
}

ModelVector local_train(const ModelVector& model, const DatasetShard& shard,
                        const TrainConfig& cfg, int round_index, uint64_t base_seed) {
    if (cfg.local_epochs < 1) throw std::invalid_argument("local_train: local_epochs must be >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("local_train: batch_size must be >= 1");
    const Dataset& data = shard.data;
    if (model.dim() != model_dim(data.classes, static_cast<int>(data.d)))
        throw std::invalid_argument("local_train: model/shard dimension mismatch");

    double lr = cfg.schedule == LrSchedule::Constant
                    ? cfg.lr
                    : cfg.lr_epsilon / (round_index + cfg.lr_delta0);

    ModelVector w = model;
    std::vector<size_t> order(data.n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<double> grad;
    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        Rng rng(derive_seed(base_seed, "epoch", static_cast<uint64_t>(epoch)));
        rng.shuffle(order);
        for (size_t pos = 0; pos < data.n; pos += static_cast<size_t>(cfg.batch_size)) {
            size_t take = std::min(static_cast<size_t>(cfg.batch_size), data.n - pos);
            logistic_grad(w, data, cfg.l2_reg, {order.data() + pos, take}, grad);
            for (double g : grad)
                if (!std::isfinite(g))
                    throw std::runtime_error("local_train: non-finite gradient at satellite (" +
                                             std::to_string(shard.owner.shell) + "," +
                                             std::to_string(shard.owner.orbit) + "," +
                                             std::to_string(shard.owner.slot) + ") round " +
                                             std::to_string(round_index));
            for (size_t i = 0; i < w.w.size(); ++i) w.w[i] -= lr * grad[i];
        }
    }
    return w;
}

ModelVector fedavg(std::span<const ModelVector> models, std::span<const double> sizes) {
    if (models.empty() || models.size() != sizes.size())
        throw std::invalid_argument("fedavg: need one size per model");
    double total = 0.0;
    for (double s : sizes) total += s;
    if (!(total > 0.0)) throw std::invalid_argument("fedavg: total size must be > 0");
    ModelVector out;
    out.w.assign(models[0].dim(), 0.0);
    for (size_t k = 0; k < models.size(); ++k) {
        if (models[k].dim() != out.dim())
            throw std::invalid_argument("fedavg: inconsistent model dimensions");
        double wk = sizes[k] / total;
        for (size_t i = 0; i < out.dim(); ++i) out.w[i] += wk * models[k].w[i];
    }
    return out;
}

ModelVector suborbital_accumulate(const ModelVector& incoming, const ModelVector& own,
                                  double own_size, double orbit_total_size) {
    if (incoming.dim() != own.dim())
        throw std::invalid_argument("suborbital_accumulate: dimension mismatch");
    if (!(orbit_total_size > 0.0))
        throw std::invalid_argument("suborbital_accumulate: orbit total size must be > 0");
    double gamma = own_size / orbit_total_size;
    ModelVector out = incoming;
    for (size_t i = 0; i < out.dim(); ++i) out.w[i] += gamma * own.w[i];
    return out;
}

EvalResult evaluate(const ModelVector& m, const Dataset& data, double l2_reg) {
    EvalResult res;
    res.loss = logistic_loss(m, data, l2_reg);
    size_t stride = data.d + 1;
    size_t correct = 0;
    for (size_t i = 0; i < data.n; ++i) {
        const double* x = &data.features[i * data.d];
        int best = 0;
        double best_z = -1e300;
        for (int c = 0; c < data.classes; ++c) {
            const double* wc = &m.w[static_cast<size_t>(c) * stride];
            double z = wc[data.d];
            for (size_t j = 0; j < data.d; ++j) z += wc[j] * x[j];
            if (z > best_z) {
                best_z = z;
                best = c;
            }
        }
        correct += best == data.labels[i];
    }
    res.accuracy = static_cast<double>(correct) / static_cast<double>(data.n);
    return res;
}

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_dataset: cannot open " + path);
    const char magic[4] = {'L', 'F', 'D', 'S'};
    uint32_t version = 1;
    uint64_t n = data.n, d = data.d;
    uint32_t classes = static_cast<uint32_t>(data.classes);
    f.write(magic, 4);
    f.write(reinterpret_cast<const char*>(&version), sizeof version);
    f.write(reinterpret_cast<const char*>(&n), sizeof n);
    f.write(reinterpret_cast<const char*>(&d), sizeof d);
    f.write(reinterpret_cast<const char*>(&classes), sizeof classes);
    f.write(reinterpret_cast<const char*>(data.features.data()),
            static_cast<std::streamsize>(data.features.size() * sizeof(double)));
    std::vector<int32_t> labels(data.labels.begin(), data.labels.end());
    f.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size() * sizeof(int32_t)));
    if (!f) throw std::runtime_error("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_dataset: cannot open " + path);
    char magic[4];
    uint32_t version = 0, classes = 0;
    uint64_t n = 0, d = 0;
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "LFDS", 4) != 0)
        throw std::runtime_error("load_dataset: bad magic in " + path);
    f.read(reinterpret_cast<char*>(&version), sizeof version);
    if (version != 1) throw std::runtime_error("load_dataset: unsupported version");
    f.read(reinterpret_cast<char*>(&n), sizeof n);
    f.read(reinterpret_cast<char*>(&d), sizeof d);
    f.read(reinterpret_cast<char*>(&classes), sizeof classes);
    Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.classes = static_cast<int>(classes);
    ds.features.resize(n * d);
    f.read(reinterpret_cast<char*>(ds.features.data()),
           static_cast<std::streamsize>(ds.features.size() * sizeof(double)));
    std::vector<int32_t> labels(n);
    f.read(reinterpret_cast<char*>(labels.data()),
           static_cast<std::streamsize>(labels.size() * sizeof(int32_t)));
    if (!f) throw std::runtime_error("load_dataset: truncated file " + path);
    ds.labels.assign(labels.begin(), labels.end());
    return ds;
}

}  // namespace leofl
