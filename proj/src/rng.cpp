#include "leofl/rng.hpp"

#include <cmath>

#include "leofl/constants.hpp"

namespace leofl {

uint64_t mix64(uint64_t z) {
    // SplitMix64 finalizer (Steele, Lea, Flood 2014).
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {
uint64_t hash_label(uint64_t h, std::string_view label) {
    for (unsigned char c : label) h = mix64(h ^ c);
    return h;
}
}  // namespace

uint64_t derive_seed(uint64_t base, std::string_view label) {
    return mix64(hash_label(mix64(base), label));
}
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t i0) {
    return mix64(derive_seed(base, label) ^ i0);
}
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t i0, uint64_t i1) {
    return mix64(derive_seed(base, label, i0) ^ i1);
}
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t i0, uint64_t i1, uint64_t i2) {
    return mix64(derive_seed(base, label, i0, i1) ^ i2);
}
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t i0, uint64_t i1, uint64_t i2,
                     uint64_t i3) {
    return mix64(derive_seed(base, label, i0, i1, i2) ^ i3);
}

uint64_t Rng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform01() {
    // 53 random bits -> [0,1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_below(uint64_t n) {
    // Modulo with rejection to avoid bias.
    uint64_t threshold = (0 - n) % n;
    for (;;) {
        uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double Rng::normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
double watts_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

}  // namespace leofl
