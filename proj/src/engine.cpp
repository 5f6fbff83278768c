#include "ergolab/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <list>
#include <optional>
#include <unordered_map>
#include <utility>
#include <variant>

#include "ergolab/errors.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// ============================ cache internals ============================

namespace {

struct CacheKey {
    std::uint8_t tag = 0;  // 0 = chain state after a slot, 1 = resumable partial sum
    int slot = 0;          // tag 0 only
    std::vector<std::int64_t> ns;  // the exponent assignment the value depends on

    bool operator==(const CacheKey&) const = default;
};

struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const {
        std::uint64_t h = splitmix64(0x9E3779B9ULL ^ (static_cast<std::uint64_t>(k.tag) << 32) ^
                                     static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.slot)));
        for (std::int64_t v : k.ns) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
        return static_cast<std::size_t>(h);
    }
};

/// A partially accumulated innermost sum: terms 1 .. next_n-1 are already in.
struct ResumeSum {
    std::int64_t next_n = 1;
    bool rep_alive = false;
    bool rep_ok = true;
    FunctionRep rep;
    std::vector<cplx> samples;
};

} // namespace

struct EngineCache::Impl {
    using Value = std::variant<FunctionRep, ResumeSum>;
    struct Entry {
        CacheKey key;
        Value value;
        std::size_t bytes = 0;
    };

    std::size_t budget;
    std::size_t used = 0;
    std::size_t hit_count = 0;
    std::size_t miss_count = 0;
    bool bound = false;
    std::uint64_t bound_fp = 0;
    std::list<Entry> lru;  // front = most recently used
    std::unordered_map<CacheKey, std::list<Entry>::iterator, CacheKeyHash> map;

    explicit Impl(std::size_t byte_budget) : budget(byte_budget) {}

    /// A cache belongs to one (chain, sample set, mode) configuration; mixing
    /// configurations would hand back states from a different chain.
    void bind(std::uint64_t fp) {
        if (!bound) {
            bound = true;
            bound_fp = fp;
        } else if (bound_fp != fp) {
            fail(ErrorCode::Argument,
                 "engine cache reused across a different chain configuration");
        }
    }

    static std::size_t rep_bytes(const FunctionRep& r) { return r.size() * sizeof(cplx) + 96; }

    static std::size_t value_bytes(const CacheKey& k, const Value& v) {
        std::size_t b = 64 + k.ns.size() * sizeof(std::int64_t);
        if (const auto* r = std::get_if<FunctionRep>(&v)) {
            b += rep_bytes(*r);
        } else {
            const auto& rs = std::get<ResumeSum>(v);
            b += rep_bytes(rs.rep) + rs.samples.size() * sizeof(cplx) + 32;
        }
        return b;
    }

    const FunctionRep* find_state(const CacheKey& key) {
        auto it = map.find(key);
        if (it == map.end()) {
            ++miss_count;
            return nullptr;
        }
        ++hit_count;
        lru.splice(lru.begin(), lru, it->second);
        return &std::get<FunctionRep>(lru.front().value);
    }

    std::optional<ResumeSum> find_resume(const CacheKey& key) {
        auto it = map.find(key);
        if (it == map.end()) {
            ++miss_count;
            return std::nullopt;
        }
        ++hit_count;
        lru.splice(lru.begin(), lru, it->second);
        return std::get<ResumeSum>(lru.front().value);
    }

    void put(CacheKey key, Value value) {
        const std::size_t bytes = value_bytes(key, value);
        auto it = map.find(key);
        if (it != map.end()) {
            used -= it->second->bytes;
            lru.erase(it->second);
            map.erase(it);
        }
        if (bytes > budget) return;  // larger than the whole budget: not worth thrashing
        lru.push_front(Entry{std::move(key), std::move(value), bytes});
        map.emplace(lru.front().key, lru.begin());
        used += bytes;
        while (used > budget && !lru.empty()) {
            used -= lru.back().bytes;
            map.erase(lru.back().key);
            lru.pop_back();
        }
    }
};

EngineCache::EngineCache(std::size_t byte_budget) : impl_(std::make_unique<Impl>(byte_budget)) {}
EngineCache::~EngineCache() = default;
EngineCache::EngineCache(EngineCache&&) noexcept = default;
EngineCache& EngineCache::operator=(EngineCache&&) noexcept = default;
std::size_t EngineCache::byte_budget() const { return impl_->budget; }
std::size_t EngineCache::bytes_used() const { return impl_->used; }
std::size_t EngineCache::hits() const { return impl_->hit_count; }
std::size_t EngineCache::misses() const { return impl_->miss_count; }

// ============================ sweep internals ============================

namespace {

/// Which 1-based lattice index each enumeration depth binds, and at which
/// depth each slot's exponent assignment is complete. Depth 0 is outermost.
struct Layout {
    std::vector<int> class_at_depth;  // 1-based class index per depth
    std::vector<int> depth_of_class;  // [class] -> depth, -1 when unused; size k+1
    std::vector<int> slot_depth;      // per slot: depth where its prefix state is determined
};

/// `first_use` orders depths by first appearance along the chain (the cached
/// strategy needs prefix states to complete one depth at a time);
/// `all_classes` includes unused indices (the literal brute-force lattice).
/// Otherwise depths are the used classes in ascending index order.
Layout make_layout(const ChainSpec& chain, bool first_use, bool all_classes) {
    Layout lay;
    lay.depth_of_class.assign(static_cast<std::size_t>(chain.k) + 1, -1);
    if (all_classes) {
        for (int c = 1; c <= chain.k; ++c) {
            lay.depth_of_class[static_cast<std::size_t>(c)] = c - 1;
            lay.class_at_depth.push_back(c);
        }
    } else if (first_use) {
        for (int a : chain.alpha) {
            if (lay.depth_of_class[static_cast<std::size_t>(a)] < 0) {
                lay.depth_of_class[static_cast<std::size_t>(a)] =
                    static_cast<int>(lay.class_at_depth.size());
                lay.class_at_depth.push_back(a);
            }
        }
    } else {
        for (int c : chain.used_classes()) {
            lay.depth_of_class[static_cast<std::size_t>(c)] =
                static_cast<int>(lay.class_at_depth.size());
            lay.class_at_depth.push_back(c);
        }
    }
    lay.slot_depth.resize(static_cast<std::size_t>(chain.m));
    int deepest = 0;
    for (int i = 0; i < chain.m; ++i) {
        const int d = lay.depth_of_class[static_cast<std::size_t>(chain.alpha[static_cast<std::size_t>(i)])];
        deepest = std::max(deepest, d);
        lay.slot_depth[static_cast<std::size_t>(i)] = deepest;
    }
    return lay;
}

/// exps[d][n-1] = q_{class(d)}(n) for n in 1..N. Positivity over the whole
/// range is the documented precondition for averages and is checked here.
std::vector<std::vector<std::int64_t>> exponent_tables(const ChainSpec& chain, const Layout& lay,
                                                       std::int64_t N, bool check_positive) {
    std::vector<std::vector<std::int64_t>> exps(lay.class_at_depth.size());
    for (std::size_t d = 0; d < exps.size(); ++d) {
        const int c = lay.class_at_depth[d];
        const IntPolynomial& p = chain.poly_for_class(c);
        exps[d].resize(static_cast<std::size_t>(N));
        for (std::int64_t n = 1; n <= N; ++n) {
            const std::int64_t e = p.eval(n);
            if (check_positive && e < 1)
                fail(ErrorCode::Argument, "exponent polynomial " + p.label() +
                                              " is not positive at n = " + std::to_string(n));
            exps[d][static_cast<std::size_t>(n - 1)] = e;
        }
    }
    return exps;
}

cplx sample_value(const FunctionRep& g, const SampleSet& ss, std::size_t idx) {
    switch (ss.kind) {
        case RepKind::Grid: {
            auto i = static_cast<std::int64_t>(ss.xs[idx] * static_cast<double>(g.grid_points()));
            if (i >= g.grid_points()) i = g.grid_points() - 1;
            return g.eval_grid(i);
        }
        case RepKind::Fourier: return g.eval_point(ss.xs[idx]);
        case RepKind::Finite: return g.eval_finite(ss.residues[idx]);
        case RepKind::Cylinder: return g.eval_coin(ss.seeds[idx]);
    }
    return cplx(0, 0);
}

/// Summand windows drift apart with the exponents, so a cylinder sum's union
/// window can hit table sizes in the gigabytes well before the hard width
/// cap. Past this width the summed representation is refused up front —
/// callers fall back to sample values, which need no table at all.
constexpr std::int64_t kRepSumWidthBound = 20;

bool sum_would_overflow(const FunctionRep& a, const FunctionRep& b) {
    if (a.rep() != RepKind::Cylinder || b.rep() != RepKind::Cylinder) return false;
    const std::int64_t lo = std::min(a.window_lo(), b.window_lo());
    const std::int64_t hi = std::max(a.window_hi(), b.window_hi());
    return hi - lo + 1 > kRepSumWidthBound;
}

/// Accumulates summands as a full representation and/or as values at sample
/// points. When a cylinder sum outgrows the window cap and samples are being
/// collected, the representation lane shuts off and sampling carries on.
struct Accum {
    bool want_rep = false;
    bool abs_mode = false;
    int abs_res = 512;
    const SampleSet* samples = nullptr;

    bool rep_alive = false;
    bool rep_ok = true;
    FunctionRep rep_sum;
    std::vector<cplx> sample_sum;

    static Accum like(const Accum& proto) {
        Accum a;
        a.want_rep = proto.want_rep;
        a.abs_mode = proto.abs_mode;
        a.abs_res = proto.abs_res;
        a.samples = proto.samples;
        if (a.samples) a.sample_sum.assign(a.samples->size(), cplx(0, 0));
        return a;
    }

    static FunctionRep abs_rep(const FunctionRep& g, int res) {
        if (g.rep() == RepKind::Fourier)
            return pointwise_abs(convert(g, RepTarget{RepKind::Grid, res}));
        return pointwise_abs(g);
    }

    void add_rep(const FunctionRep& term) {
        if (!want_rep || !rep_ok) return;
        try {
            if (!rep_alive) {
                rep_sum = term;
                rep_alive = true;
            } else {
                if (sum_would_overflow(rep_sum, term))
                    fail(ErrorCode::WindowCap,
                         "summed cylinder window exceeds the materialization bound; "
                         "use the sampled variant");
                rep_sum = add(rep_sum, term);
            }
        } catch (const Error& err) {
            if (err.code() == ErrorCode::WindowCap && samples != nullptr) {
                rep_ok = false;
                rep_alive = false;
                rep_sum = FunctionRep();
            } else {
                throw;
            }
        }
    }

    void add_summand(const FunctionRep& g) {
        if (want_rep && rep_ok) add_rep(abs_mode ? abs_rep(g, abs_res) : g);
        if (samples) {
            for (std::size_t s = 0; s < sample_sum.size(); ++s) {
                const cplx v = sample_value(g, *samples, s);
                sample_sum[s] += abs_mode ? cplx(std::abs(v), 0.0) : v;
            }
        }
    }

    void fold(Accum&& other) {
        if (want_rep) {
            if (!other.rep_ok) {
                rep_ok = false;
                rep_alive = false;
                rep_sum = FunctionRep();
            } else if (other.rep_alive) {
                add_rep(other.rep_sum);
            }
        }
        if (samples) {
            for (std::size_t s = 0; s < sample_sum.size(); ++s)
                sample_sum[s] += other.sample_sum[s];
        }
    }
};

/// True division, not reciprocal multiplication: x/x is exactly 1 in IEEE
/// arithmetic, so averaging N^k identical summands returns them unchanged.
FunctionRep divided(FunctionRep f, double divisor) {
    for (cplx& v : f.mutable_data()) v /= divisor;
    return f;
}

/// A finished average: the function (when storable) and/or sample values.
struct Outcome {
    bool rep_ok = true;
    std::optional<FunctionRep> rep;
    std::vector<cplx> samples;
};

Outcome finish(Accum&& acc, double divisor) {
    Outcome out;
    out.rep_ok = acc.rep_ok;
    if (acc.want_rep && acc.rep_ok && acc.rep_alive)
        out.rep = divided(std::move(acc.rep_sum), divisor);
    out.samples = std::move(acc.sample_sum);
    for (cplx& v : out.samples) v /= divisor;
    return out;
}

/// Enumerate {1..N}^depths lexicographically with depth 0 split over the
/// fixed reduction grid; partial accumulators fold in block order, so the
/// result is one bit pattern no matter how many workers run.
template <typename Emit>
Accum blocked_lattice_sweep(std::int64_t N, int depths, int workers, const Accum& proto,
                            const Emit& emit) {
    const auto blocks = reduction_blocks(N);
    std::vector<Accum> partial;
    partial.reserve(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) partial.push_back(Accum::like(proto));

    run_blocks(blocks, workers, [&](int b, BlockRange r) {
        Accum& acc = partial[static_cast<std::size_t>(b)];
        std::vector<std::int64_t> n(static_cast<std::size_t>(depths), 1);
        std::function<void(int)> rec = [&](int d) {
            if (d == depths) {
                emit(acc, n);
                return;
            }
            const std::int64_t lo = d == 0 ? r.lo + 1 : 1;
            const std::int64_t hi = d == 0 ? r.hi : N;
            for (std::int64_t v = lo; v <= hi; ++v) {
                n[static_cast<std::size_t>(d)] = v;
                rec(d + 1);
            }
        };
        rec(0);
    });

    Accum total = Accum::like(proto);
    for (Accum& p : partial) total.fold(std::move(p));
    return total;
}

FunctionRep chain_summand(const ChainSpec& chain, const Layout& lay,
                          const std::vector<std::vector<std::int64_t>>& exps,
                          const std::vector<std::int64_t>& n, bool literal_powers) {
    FunctionRep g = chain.input;
    for (int i = 0; i < chain.m; ++i) {
        const int d = lay.depth_of_class[static_cast<std::size_t>(
            chain.alpha[static_cast<std::size_t>(i)])];
        const std::int64_t e =
            exps[static_cast<std::size_t>(d)][static_cast<std::size_t>(n[static_cast<std::size_t>(d)] - 1)];
        const auto& sys = chain.systems[static_cast<std::size_t>(i)];
        if (literal_powers) {
            for (std::int64_t s = 0; s < e; ++s) g = koopman_apply(sys, 1, g);
        } else {
            g = koopman_apply(sys, e, g);
        }
        if (i + 1 < chain.m) g = apply_operator(chain.operators[static_cast<std::size_t>(i)], g);
    }
    return g;
}

Outcome sweep_naive(const ChainSpec& chain, std::int64_t N, const EngineOptions& opts,
                    const Accum& proto, bool literal_powers, bool all_classes) {
    const Layout lay = make_layout(chain, /*first_use=*/false, all_classes);
    const auto exps = exponent_tables(chain, lay, N, /*check_positive=*/true);
    const int depths = static_cast<int>(lay.class_at_depth.size());
    const int workers = literal_powers ? 1 : opts.workers;
    Accum total = blocked_lattice_sweep(
        N, depths, workers, proto, [&](Accum& acc, const std::vector<std::int64_t>& n) {
            acc.add_summand(chain_summand(chain, lay, exps, n, literal_powers));
        });
    return finish(std::move(total), std::pow(static_cast<double>(N), depths));
}

std::uint64_t chain_fingerprint(const ChainSpec& chain, const SampleSet* samples, bool want_rep) {
    std::uint64_t h = splitmix64(0xC0FFEEULL ^ (want_rep ? 0x10 : 0x20));
    auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
    for (unsigned char c : chain.label()) mix(c);
    auto mix_rep = [&](const FunctionRep& r) {
        mix(static_cast<std::uint64_t>(r.rep()));
        mix(r.size());
        if (r.rep() == RepKind::Cylinder) {
            mix(static_cast<std::uint64_t>(r.window_lo()));
            mix(static_cast<std::uint64_t>(r.window_hi()));
        }
        for (const cplx& z : r.data()) {
            mix(std::bit_cast<std::uint64_t>(z.real()));
            mix(std::bit_cast<std::uint64_t>(z.imag()));
        }
    };
    mix_rep(chain.input);
    for (const auto& op : chain.operators) {
        mix(static_cast<std::uint64_t>(op.kind()));
        switch (op.kind()) {
            case OperatorKind::FiniteRank:
                for (const auto& [u, v] : op.pairs()) {
                    mix_rep(u);
                    mix_rep(v);
                }
                break;
            case OperatorKind::Multiplication: mix_rep(op.multiplier()); break;
            case OperatorKind::Matrix:
                for (const cplx& z : op.matrix_entries()) {
                    mix(std::bit_cast<std::uint64_t>(z.real()));
                    mix(std::bit_cast<std::uint64_t>(z.imag()));
                }
                break;
            default: break;
        }
    }
    if (samples) mix(samples->fingerprint());
    return h;
}

/// The cached strategy: one sequential pass whose loop nest binds lattice
/// indices in first-use order, so every chain prefix is computed exactly once
/// per distinct restricted exponent assignment. On top of that structure the
/// LRU memo keeps (a) prefix states across schedule points and (b) resumable
/// innermost partial sums, and Koopman powers advance incrementally along the
/// innermost loop instead of being recomputed from scratch.
Outcome sweep_cached(const ChainSpec& chain, std::int64_t N, const EngineOptions& opts,
                     const Accum& proto) {
    const Layout lay = make_layout(chain, /*first_use=*/true, /*all_classes=*/false);
    const auto exps = exponent_tables(chain, lay, N, /*check_positive=*/true);
    const int depths = static_cast<int>(lay.class_at_depth.size());
    const int m = chain.m;

    std::unique_ptr<EngineCache> local;
    EngineCache* cache = opts.cache;
    if (!cache) {
        local = std::make_unique<EngineCache>(opts.cache_bytes);
        cache = local.get();
    }
    EngineCache::Impl& C = cache->impl();
    C.bind(chain_fingerprint(chain, proto.samples, proto.want_rep));

    std::vector<std::vector<int>> slots_at(static_cast<std::size_t>(depths));
    for (int i = 0; i < m; ++i)
        slots_at[static_cast<std::size_t>(lay.slot_depth[static_cast<std::size_t>(i)])].push_back(i);

    std::vector<std::int64_t> n(static_cast<std::size_t>(depths), 1);
    std::vector<FunctionRep> state(static_cast<std::size_t>(m));

    // Incremental powering of the first slot at each depth: that slot's base
    // is fixed while the depth's index sweeps, so T^{e(n)} h follows from
    // T^{e(n-1)} h by stepping the difference.
    std::vector<bool> inc_valid(static_cast<std::size_t>(depths), false);
    std::vector<std::int64_t> inc_e(static_cast<std::size_t>(depths), 0);
    std::vector<FunctionRep> inc_state(static_cast<std::size_t>(depths));

    auto restricted_key = [&](std::uint8_t tag, int slot, int upto_depth) {
        CacheKey key;
        key.tag = tag;
        key.slot = slot;
        key.ns.assign(n.begin(), n.begin() + upto_depth);
        return key;
    };

    auto update_slots = [&](int d) {
        bool first_here = true;
        for (int i : slots_at[static_cast<std::size_t>(d)]) {
            const std::size_t si = static_cast<std::size_t>(i);
            const int dc = lay.depth_of_class[static_cast<std::size_t>(chain.alpha[si])];
            const std::int64_t e =
                exps[static_cast<std::size_t>(dc)][static_cast<std::size_t>(n[static_cast<std::size_t>(dc)] - 1)];
            const bool use_lru = d + 1 < depths;  // innermost states are used once each
            if (use_lru) {
                if (const FunctionRep* hit = C.find_state(restricted_key(0, i, d + 1))) {
                    state[si] = *hit;
                    if (first_here && dc == d) {
                        inc_valid[static_cast<std::size_t>(d)] = true;
                        inc_e[static_cast<std::size_t>(d)] = e;
                        inc_state[static_cast<std::size_t>(d)] = state[si];
                    }
                    first_here = false;
                    continue;
                }
            }
            const auto& sys = chain.systems[si];
            if (first_here && dc == d && inc_valid[static_cast<std::size_t>(d)] &&
                e >= inc_e[static_cast<std::size_t>(d)]) {
                state[si] = koopman_apply(sys, e - inc_e[static_cast<std::size_t>(d)],
                                          inc_state[static_cast<std::size_t>(d)]);
            } else {
                const FunctionRep base =
                    i == 0 ? chain.input
                           : apply_operator(chain.operators[si - 1], state[si - 1]);
                state[si] = koopman_apply(sys, e, base);
            }
            if (first_here && dc == d) {
                inc_valid[static_cast<std::size_t>(d)] = true;
                inc_e[static_cast<std::size_t>(d)] = e;
                inc_state[static_cast<std::size_t>(d)] = state[si];
            }
            first_here = false;
            if (use_lru) C.put(restricted_key(0, i, d + 1), state[si]);
        }
    };

    Accum total = Accum::like(proto);

    std::function<void(int)> rec = [&](int d) {
        inc_valid[static_cast<std::size_t>(d)] = false;
        if (d == depths - 1) {
            // Innermost sweep, resumable across schedule points.
            const CacheKey key = restricted_key(1, 0, depths - 1);
            Accum local_acc = Accum::like(proto);
            std::int64_t start = 1;
            if (auto rs = C.find_resume(key); rs && rs->next_n <= N + 1) {
                start = rs->next_n;
                local_acc.rep_alive = rs->rep_alive;
                local_acc.rep_ok = rs->rep_ok;
                local_acc.rep_sum = std::move(rs->rep);
                if (proto.samples) local_acc.sample_sum = std::move(rs->samples);
            }
            for (std::int64_t v = start; v <= N; ++v) {
                n[static_cast<std::size_t>(d)] = v;
                update_slots(d);
                local_acc.add_summand(state[static_cast<std::size_t>(m - 1)]);
            }
            ResumeSum store;
            store.next_n = N + 1;
            store.rep_alive = local_acc.rep_alive;
            store.rep_ok = local_acc.rep_ok;
            store.rep = local_acc.rep_sum;
            store.samples = local_acc.sample_sum;
            C.put(key, std::move(store));
            total.fold(std::move(local_acc));
        } else {
            for (std::int64_t v = 1; v <= N; ++v) {
                n[static_cast<std::size_t>(d)] = v;
                update_slots(d);
                rec(d + 1);
            }
        }
    };
    rec(0);

    return finish(std::move(total), std::pow(static_cast<double>(N), depths));
}

/// Telescoped evaluation for injective alpha: each slot contributes one
/// Cesàro mean, O(N*m) Koopman applications in total. Finite-rank operators
/// are applied through averaged inner products, so the slot average they
/// consume never needs to be materialized (this is what keeps wide cylinder
/// windows representable).
Outcome sweep_factorized(const ChainSpec& chain, std::int64_t N, const Accum& proto) {
    if (!chain.alpha_injective())
        fail(ErrorCode::Strategy, "factorized strategy requires an injective entanglement map");
    const int m = chain.m;

    FunctionRep b = chain.input;
    Accum total = Accum::like(proto);
    for (int i = 0; i < m; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        const auto& sys = chain.systems[si];
        const IntPolynomial& p = chain.poly_for_class(chain.alpha[si]);
        std::vector<std::int64_t> tbl(static_cast<std::size_t>(N));
        for (std::int64_t nn = 1; nn <= N; ++nn) {
            tbl[static_cast<std::size_t>(nn - 1)] = p.eval(nn);
            if (tbl[static_cast<std::size_t>(nn - 1)] < 1)
                fail(ErrorCode::Argument, "exponent polynomial " + p.label() +
                                              " is not positive at n = " + std::to_string(nn));
        }
        const bool last = i + 1 == m;
        const OperatorSpec* op = last ? nullptr : &chain.operators[si];
        if (last) {
            for (std::int64_t nn = 1; nn <= N; ++nn)
                total.add_summand(koopman_apply(sys, tbl[static_cast<std::size_t>(nn - 1)], b));
        } else if (op->kind() == OperatorKind::FiniteRank) {
            const auto& prs = op->pairs();
            std::vector<cplx> cs(prs.size(), cplx(0, 0));
            for (std::int64_t nn = 1; nn <= N; ++nn) {
                const FunctionRep t = koopman_apply(sys, tbl[static_cast<std::size_t>(nn - 1)], b);
                for (std::size_t j = 0; j < prs.size(); ++j) cs[j] += inner_product(t, prs[j].first);
            }
            FunctionRep nb = FunctionRep::zero_like(prs.front().second);
            for (std::size_t j = 0; j < prs.size(); ++j)
                nb = add_scaled(nb, prs[j].second, cs[j] / static_cast<double>(N));
            b = std::move(nb);
        } else {
            FunctionRep acc;
            bool started = false;
            for (std::int64_t nn = 1; nn <= N; ++nn) {
                FunctionRep t = koopman_apply(sys, tbl[static_cast<std::size_t>(nn - 1)], b);
                if (started && sum_would_overflow(acc, t))
                    fail(ErrorCode::WindowCap,
                         "slot average of drifting cylinder windows is not materializable; "
                         "only finite-rank operators collapse such slots");
                acc = started ? add(acc, t) : std::move(t);
                started = true;
            }
            b = apply_operator(*op, divided(std::move(acc), static_cast<double>(N)));
        }
    }
    return finish(std::move(total), static_cast<double>(N));
}

Outcome dispatch_average(const ChainSpec& chain, std::int64_t N, Strategy strategy,
                         const EngineOptions& opts, const Accum& proto) {
    switch (strategy) {
        case Strategy::Naive:
            return sweep_naive(chain, N, opts, proto, /*literal=*/false, /*all_classes=*/false);
        case Strategy::Cached: return sweep_cached(chain, N, opts, proto);
        case Strategy::Factorized: return sweep_factorized(chain, N, proto);
    }
    fail(ErrorCode::Strategy, "unknown strategy");
}

void require_discrete(const ChainSpec& chain, std::int64_t N) {
    chain.validate();
    if (chain.continuous)
        fail(ErrorCode::Argument, "continuous chains average through flow_entangled_average");
    if (N < 1) fail(ErrorCode::Argument, "N must be positive");
}

void require_samples_kind(const ChainSpec& chain, const SampleSet& samples) {
    if (samples.kind != chain.input.rep())
        fail(ErrorCode::Argument, "sample set representation does not match the chain input");
}

} // namespace

// ============================ public operations ============================

FunctionRep evaluate_chain(const ChainSpec& chain, const std::vector<std::int64_t>& ns) {
    chain.validate();
    if (chain.continuous)
        fail(ErrorCode::Argument, "evaluate_chain is for discrete chains");
    if (static_cast<int>(ns.size()) != chain.k)
        fail(ErrorCode::Argument, "need one lattice coordinate per index class");
    for (std::int64_t v : ns)
        if (v < 0) fail(ErrorCode::Argument, "lattice coordinates must be nonnegative");
    FunctionRep g = chain.input;
    for (int i = 0; i < chain.m; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        const int c = chain.alpha[si];
        const std::int64_t e = chain.poly_for_class(c).eval(ns[static_cast<std::size_t>(c - 1)]);
        g = koopman_apply(chain.systems[si], e, g);
        if (i + 1 < chain.m) g = apply_operator(chain.operators[si], g);
    }
    return g;
}

FunctionRep entangled_average(const ChainSpec& chain, std::int64_t N, Strategy strategy,
                              const EngineOptions& options) {
    require_discrete(chain, N);
    Accum proto;
    proto.want_rep = true;
    proto.abs_res = chain.abs_grid_resolution;
    Outcome out = dispatch_average(chain, N, strategy, options, proto);
    if (!out.rep_ok || !out.rep)
        fail(ErrorCode::WindowCap,
             "averaged function is too wide to store; use entangled_average_samples");
    return *std::move(out.rep);
}

std::vector<cplx> entangled_average_samples(const ChainSpec& chain, std::int64_t N,
                                            Strategy strategy, const SampleSet& samples,
                                            const EngineOptions& options) {
    require_discrete(chain, N);
    require_samples_kind(chain, samples);
    Accum proto;
    proto.samples = &samples;
    proto.abs_res = chain.abs_grid_resolution;
    return dispatch_average(chain, N, strategy, options, proto).samples;
}

FunctionRep entangled_average_abs(const ChainSpec& chain, std::int64_t N,
                                  const EngineOptions& options) {
    require_discrete(chain, N);
    Accum proto;
    proto.want_rep = true;
    proto.abs_mode = true;
    proto.abs_res = chain.abs_grid_resolution;
    Outcome out = sweep_naive(chain, N, options, proto, /*literal=*/false, /*all_classes=*/false);
    if (!out.rep_ok || !out.rep)
        fail(ErrorCode::WindowCap,
             "averaged function is too wide to store; use entangled_average_abs_samples");
    return *std::move(out.rep);
}

std::vector<cplx> entangled_average_abs_samples(const ChainSpec& chain, std::int64_t N,
                                                const SampleSet& samples,
                                                const EngineOptions& options) {
    require_discrete(chain, N);
    require_samples_kind(chain, samples);
    Accum proto;
    proto.abs_mode = true;
    proto.abs_res = chain.abs_grid_resolution;
    proto.samples = &samples;
    return sweep_naive(chain, N, options, proto, /*literal=*/false, /*all_classes=*/false).samples;
}

AveragePoint entangled_average_point(const ChainSpec& chain, std::int64_t N, Strategy strategy,
                                     const SampleSet& samples, const EngineOptions& options) {
    require_discrete(chain, N);
    require_samples_kind(chain, samples);
    Accum proto;
    proto.want_rep = true;
    proto.samples = &samples;
    proto.abs_res = chain.abs_grid_resolution;
    Outcome out = dispatch_average(chain, N, strategy, options, proto);
    AveragePoint point;
    if (out.rep_ok && out.rep) point.average = *std::move(out.rep);
    point.sample_values = std::move(out.samples);
    return point;
}

AveragePoint entangled_average_abs_point(const ChainSpec& chain, std::int64_t N,
                                         const SampleSet& samples,
                                         const EngineOptions& options) {
    require_discrete(chain, N);
    require_samples_kind(chain, samples);
    Accum proto;
    proto.want_rep = true;
    proto.abs_mode = true;
    proto.samples = &samples;
    proto.abs_res = chain.abs_grid_resolution;
    Outcome out = sweep_naive(chain, N, options, proto, /*literal=*/false, /*all_classes=*/false);
    AveragePoint point;
    if (out.rep_ok && out.rep) point.average = *std::move(out.rep);
    point.sample_values = std::move(out.samples);
    return point;
}

FunctionRep flow_entangled_average(const ChainSpec& chain, double horizon, double step,
                                   const EngineOptions& options) {
    chain.validate();
    if (!chain.continuous)
        fail(ErrorCode::Argument, "flow averages need a continuous chain");
    if (!(horizon > 0.0)) fail(ErrorCode::Argument, "horizon must be positive");
    if (!(step > 0.0)) fail(ErrorCode::Argument, "step must be positive");
    if (!(step < horizon)) fail(ErrorCode::Argument, "step must be smaller than the horizon");
    const auto nodes = static_cast<std::int64_t>(std::llround(horizon / step));
    if (nodes < 1 || std::abs(static_cast<double>(nodes) * step - horizon) >
                         1e-9 * std::max(1.0, std::abs(horizon)))
        fail(ErrorCode::Argument, "step must divide the horizon");

    Accum proto;
    proto.want_rep = true;

    if (chain.alpha_injective()) {
        // Telescoped midpoint quadrature, one Cesàro integral per slot.
        FunctionRep b = chain.input;
        Accum total = Accum::like(proto);
        for (int i = 0; i < chain.m; ++i) {
            const std::size_t si = static_cast<std::size_t>(i);
            const auto& sys = chain.systems[si];
            const bool last = i + 1 == chain.m;
            FunctionRep acc;
            bool started = false;
            for (std::int64_t l = 0; l < nodes; ++l) {
                const double t = (static_cast<double>(l) + 0.5) * step;
                FunctionRep ft = flow_apply(sys, t, b);
                if (last) {
                    total.add_summand(ft);
                } else {
                    acc = started ? add(acc, ft) : std::move(ft);
                    started = true;
                }
            }
            if (!last)
                b = apply_operator(chain.operators[si],
                                   divided(std::move(acc), static_cast<double>(nodes)));
        }
        Outcome out = finish(std::move(total), static_cast<double>(nodes));
        return *std::move(out.rep);
    }

    const Layout lay = make_layout(chain, /*first_use=*/false, /*all_classes=*/false);
    const int depths = static_cast<int>(lay.class_at_depth.size());
    Accum total = blocked_lattice_sweep(
        nodes, depths, options.workers, proto,
        [&](Accum& acc, const std::vector<std::int64_t>& n) {
            FunctionRep g = chain.input;
            for (int i = 0; i < chain.m; ++i) {
                const std::size_t si = static_cast<std::size_t>(i);
                const int d = lay.depth_of_class[static_cast<std::size_t>(chain.alpha[si])];
                const double t =
                    (static_cast<double>(n[static_cast<std::size_t>(d)]) - 0.5) * step;
                g = flow_apply(chain.systems[si], t, g);
                if (i + 1 < chain.m) g = apply_operator(chain.operators[si], g);
            }
            acc.add_summand(g);
        });
    Outcome out = finish(std::move(total), std::pow(static_cast<double>(nodes), depths));
    return *std::move(out.rep);
}

FunctionRep brute_force_average(const ChainSpec& chain, std::int64_t N) {
    require_discrete(chain, N);
    for (const auto& sys : chain.systems)
        if (sys.kind() != SystemKind::FiniteCyclic)
            fail(ErrorCode::Kind, "brute_force_average runs on finite cyclic systems only");
    double lattice = 1.0;
    for (int c = 0; c < chain.k; ++c) lattice *= static_cast<double>(N);
    if (lattice > 1e6)
        fail(ErrorCode::Budget, "brute-force lattice exceeds the 10^6 tuple budget");
    Accum proto;
    proto.want_rep = true;
    EngineOptions seq;
    seq.workers = 1;
    Outcome out = sweep_naive(chain, N, seq, proto, /*literal=*/true, /*all_classes=*/true);
    return *std::move(out.rep);
}

} // namespace ergolab
