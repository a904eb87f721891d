#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace taildep {

/// Base class for all library errors. Subclasses identify the failure kind
/// so callers (and the CLI) can map them to exit codes and messages.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument values: out-of-domain parameters, bad lags, bad probabilities.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data rejected at a module boundary: NaNs, zero variance, too short.
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during evaluation: explosive recursion, singular
/// regression, non-convergent root search.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Requested fit is infeasible for the family (e.g. negative sample tau
/// for a positive-dependence-only copula).
class InfeasibleFitError : public Error {
public:
    using Error::Error;
};

/// Configuration / CLI usage problems detected before any computation.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// splitmix64 step; used to derive independent seeds for sub-streams from a
/// master seed so that parallel work is reproducible regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive the seed for sub-stream `tag` of the stream seeded by `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    return splitmix64(master ^ splitmix64(tag));
}

/// Seeded random stream. All library sampling goes through explicit Rng
/// instances; there is no global RNG state anywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), seed_base_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform draw strictly inside (0,1): 53-bit mantissa shifted off zero.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via inverse CDF; keeps every sampler a deterministic
    /// function of the uniform stream.
    double normal();

    /// Independent child stream identified by `tag`. Derivation depends only
    /// on the seed this stream was created with, not on how much has been
    /// consumed, so parallel fan-out is schedule-independent.
    Rng spawn(std::uint64_t tag) const {
        return Rng(derive_seed(seed_base_, tag));
    }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_base_;
};

inline double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double variance_of(std::span<const double> x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace taildep
