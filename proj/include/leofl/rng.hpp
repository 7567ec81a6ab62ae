#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace leofl {

// All randomness in the project flows from a single scenario seed through
// derive_seed(base, label, indices...). The derivation is a SplitMix64 hash
// chain over the label bytes and the indices, so adding a sweep point or a
// component never perturbs the streams of any other component.
//
// Monte-Carlo loops use one derived seed per trial (counter-based), which
// makes any parallel partitioning of trials bit-identical to the sequential
// order.

uint64_t mix64(uint64_t z);

uint64_t derive_seed(uint64_t base, std::string_view label);
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t i0);
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t i0, uint64_t i1);
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t i0, uint64_t i1, uint64_t i2);
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t i0, uint64_t i1, uint64_t i2,
                     uint64_t i3);

// Small, fast generator for Monte-Carlo trials and shuffles. Deterministic
// across platforms (unlike std::shuffle / std::uniform_real_distribution).
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform01();

    // Uniform in [0, n).
    uint64_t uniform_below(uint64_t n);

    // Standard normal via Box-Muller (two uniforms per call, no cached spare).
    double normal();

    // Deterministic Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.empty()) return;
        for (size_t i = v.size() - 1; i > 0; --i) {
            size_t j = static_cast<size_t>(uniform_below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

  private:
    uint64_t state_;
};

}  // namespace leofl
