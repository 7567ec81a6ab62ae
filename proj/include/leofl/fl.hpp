#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "leofl/constellation.hpp"

namespace leofl {

// Flat parameter vector. The default model family is L2-regularized
// multinomial logistic regression with weights laid out as
// [class][feature..., bias], dim = classes * (feature_dim + 1).
struct ModelVector {
    std::vector<double> w;
    size_t dim() const { return w.size(); }
};

struct Dataset {
    size_t n = 0;
    size_t d = 0;
    int classes = 0;
    std::vector<double> features;  // row-major n x d
    std::vector<int> labels;       // in [0, classes)
};

struct DatasetShard {
    Dataset data;
    SatelliteId owner;
};

enum class LrSchedule { Constant, Decaying };

struct TrainConfig {
    int local_epochs = 1;              // J
    LrSchedule schedule = LrSchedule::Constant;
    double lr = 0.05;                  // zeta for Constant
    double lr_epsilon = 0.0;           // Decaying: zeta_b = epsilon / (b + delta0)
    double lr_delta0 = 1.0;
    int batch_size = 32;
    double l2_reg = 0.0;
};

size_t model_dim(int classes, int feature_dim);

// Gaussian class clusters with spacing controlled by separation; class
// centers are random unit directions scaled by separation. Deterministic per
// seed; labels are balanced round-robin.
Dataset generate_synthetic(int classes, int dim, int n, double separation, uint64_t seed);

enum class PartitionMode { IID, NonIID };

// IID: one random equal split across all satellites. NonIID: with three
// shells, two shells each receive a disjoint 30% of the classes and the third
// the remaining 40%; within a shell, classes split equally across satellites.
std::vector<DatasetShard> partition(const Dataset& data, PartitionMode mode,
                                    const Constellation& c, uint64_t seed);

// Regularized cross-entropy loss/gradient over the listed rows (all rows when
// idx is empty).
double logistic_loss(const ModelVector& m, const Dataset& data, double l2_reg,
                     std::span<const size_t> idx = {});
void logistic_grad(const ModelVector& m, const Dataset& data, double l2_reg,
                   std::span<const size_t> idx, std::vector<double>& grad_out);

// J epochs of mini-batch SGD on the shard, starting from `model`; batch order
// reshuffles each epoch with a seed derived from (base_seed, epoch), so the
// result is independent of scheduling. Throws on a non-finite gradient.
ModelVector local_train(const ModelVector& model, const DatasetShard& shard,
                        const TrainConfig& cfg, int round_index, uint64_t base_seed);

// Data-size weighted average sum_k (|D_k|/|D|) w_k.
ModelVector fedavg(std::span<const ModelVector> models, std::span<const double> sizes);

// One link of the sequential sub-orbital chain: incoming already carries its
// upstream weighting; returns incoming + (own_size / orbit_total) * own.
ModelVector suborbital_accumulate(const ModelVector& incoming, const ModelVector& own,
                                  double own_size, double orbit_total_size);

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

EvalResult evaluate(const ModelVector& m, const Dataset& data, double l2_reg);

// Flat binary dataset cache.
// Header: magic "LFDS", u32 version, u64 n, u64 d, u32 classes; then
// row-major float64 features and int32 labels.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace leofl
