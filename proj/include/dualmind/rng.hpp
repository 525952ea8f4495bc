#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dualmind {

/// Deterministic random source. The engine is mt19937_64 (its sequence is
/// fixed by the standard); the uniform/normal transforms are hand-rolled so
/// no libstdc++ distribution internals leak into trained parameters.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    /// Box-Muller; two uniform draws per sample.
    double normal(double mean, double stddev);

  private:
    std::mt19937_64 engine_;
};

/// Expand one master seed into per-component seeds. Stable across runs; the
/// (master, tag) pairs are recorded in run manifests.
std::uint64_t child_seed(std::uint64_t master, std::string_view tag);

}  // namespace dualmind
