#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ergolab/chain.hpp"

namespace ergolab {

/// Cross-call memo for the cached strategy: partial chain states keyed by
/// (slot, exponent assignment) and resumable partial sums keyed by the outer
/// exponent prefix, evicted least-recently-used within a byte budget. One
/// cache serves one chain configuration; handing it a different chain (or a
/// different sample set) raises an Argument error instead of silently mixing
/// results. Not thread-safe — the cached strategy is sequential by design.
class EngineCache {
public:
    static constexpr std::size_t kDefaultBytes = std::size_t{256} << 20;

    explicit EngineCache(std::size_t byte_budget = kDefaultBytes);
    ~EngineCache();
    EngineCache(EngineCache&&) noexcept;
    EngineCache& operator=(EngineCache&&) noexcept;
    EngineCache(const EngineCache&) = delete;
    EngineCache& operator=(const EngineCache&) = delete;

    std::size_t byte_budget() const;
    std::size_t bytes_used() const;
    std::size_t hits() const;
    std::size_t misses() const;

    struct Impl;
    Impl& impl() const { return *impl_; }

private:
    std::unique_ptr<Impl> impl_;
};

struct EngineOptions {
    /// Worker threads for the parallel strategies (naive and the tensor flow
    /// path); 0 means one per hardware thread. The partial-sum grid is fixed,
    /// so results are identical for every worker count.
    int workers = 0;
    /// Byte budget for the throwaway cache created when `cache` is null.
    std::size_t cache_bytes = EngineCache::kDefaultBytes;
    /// Reused across calls (schedule points) by the cached strategy.
    EngineCache* cache = nullptr;
};

/// One summand: the chain applied at lattice point ns = (n_1, ..., n_k),
/// i.e. right to left T_1^{q_{alpha(1)}(n_1)}, A_1, ..., T_m^{...} on f.
/// Entries of ns must be nonnegative; discrete chains only.
FunctionRep evaluate_chain(const ChainSpec& chain, const std::vector<std::int64_t>& ns);

/// The multi-Cesàro mean (1/N^u) sum over the lattice {1..N}^u of used
/// indices. Strategies agree within 1e-10 in L2; factorized requires an
/// injective alpha (Strategy error otherwise). Raises WindowCap when the
/// averaged function cannot be stored (wide cylinder sums) — use the
/// sampled variant there.
FunctionRep entangled_average(const ChainSpec& chain, std::int64_t N, Strategy strategy,
                              const EngineOptions& options = {});

/// As entangled_average, but reporting the average's values at the given
/// sample points instead of materializing the function.
std::vector<cplx> entangled_average_samples(const ChainSpec& chain, std::int64_t N,
                                            Strategy strategy, const SampleSet& samples,
                                            const EngineOptions& options = {});

/// Multi-Cesàro mean of the pointwise absolute value of each summand.
/// Fourier summands are converted to the chain's declared grid resolution
/// first (|f| of a trig polynomial is not one).
FunctionRep entangled_average_abs(const ChainSpec& chain, std::int64_t N,
                                  const EngineOptions& options = {});

std::vector<cplx> entangled_average_abs_samples(const ChainSpec& chain, std::int64_t N,
                                                const SampleSet& samples,
                                                const EngineOptions& options = {});

/// Both lanes of one schedule point from a single sweep: the materialized
/// average (absent when it cannot be stored) and its values at the sample
/// points. Sharing one sweep keeps a reused EngineCache valid across an
/// entire schedule, which two separate calls would not.
struct AveragePoint {
    std::optional<FunctionRep> average;
    std::vector<cplx> sample_values;
};

AveragePoint entangled_average_point(const ChainSpec& chain, std::int64_t N, Strategy strategy,
                                     const SampleSet& samples, const EngineOptions& options = {});

AveragePoint entangled_average_abs_point(const ChainSpec& chain, std::int64_t N,
                                         const SampleSet& samples,
                                         const EngineOptions& options = {});

/// Continuous-time analogue over [0, horizon]^u: midpoint-rule tensor
/// quadrature with horizon/step nodes per axis. `step` must divide the
/// horizon within 1e-9 and be smaller than it; all systems must be flows.
FunctionRep flow_entangled_average(const ChainSpec& chain, double horizon, double step,
                                   const EngineOptions& options = {});

/// Ground truth for strategy tests: literal enumeration of the full
/// {1..N}^k lattice (unused indices included), Koopman powers applied as
/// repeated single steps, no caching. finite_cyclic systems only and
/// N^k <= 10^6 (Budget error). Matches the naive strategy bit for bit on
/// surjective alpha because both traverse the same lattice order and fold
/// the same fixed partial-sum grid.
FunctionRep brute_force_average(const ChainSpec& chain, std::int64_t N);

} // namespace ergolab
