// ActionTable: a computed minimal-action slice plus its provenance, with a
// binary cache format ("HJACT"): header fields, then row-major IEEE-754
// little-endian doubles. Cache entries are keyed by a content hash of
// (medium id, environment, lattice, source, horizon, scale, pruning).
#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "hjh/action.hpp"

namespace hjh {

inline std::string env_digest(const EnvironmentSample& w) {
    std::string s = w.medium_id + "|" + std::to_string(w.seed);
    for (double p : w.params) s += "|" + format_double(p);
    return hex64(fnv1a64(s));
}

template <int N>
struct ActionTable {
    std::string medium_id;
    std::string omega;  // env digest
    double dx = 0, dt = 0, speed_cap = 0, domain_radius = 0;
    Idx<N> source{};
    int steps = 0;
    double cost_scale = 1.0;
    bool pruned = false;
    Idx<N> target{};
    Field<N> values;

    std::string cache_key() const {
        std::string s = "HJACT|" + medium_id + "|" + omega + "|" +
                        format_double(dx) + "|" + format_double(dt) + "|" +
                        format_double(speed_cap) + "|" + format_double(domain_radius) +
                        "|" + std::to_string(steps) + "|" + format_double(cost_scale) +
                        "|" + (pruned ? "p" : "f");
        for (int a = 0; a < N; ++a) s += "|" + std::to_string(source[a]);
        if (pruned)
            for (int a = 0; a < N; ++a) s += "|" + std::to_string(target[a]);
        return hex64(fnv1a64(s));
    }
};

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void put_f64(std::ostream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(os, v);
}

inline double get_f64(std::istream& is) {
    std::uint64_t v = get_u64(is);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace detail

template <int N>
inline void write_action_table(const ActionTable<N>& t, const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw Error("cannot write action table: " + p.string());
    os.write("HJACT", 5);
    detail::put_u64(os, 1);  // version
    detail::put_u64(os, fnv1a64(t.medium_id));
    detail::put_u64(os, fnv1a64(t.omega));
    detail::put_f64(os, t.dx);
    detail::put_f64(os, t.dt);
    detail::put_f64(os, t.speed_cap);
    detail::put_f64(os, t.domain_radius);
    detail::put_u64(os, static_cast<std::uint64_t>(t.steps));
    detail::put_f64(os, t.cost_scale);
    detail::put_u64(os, t.pruned ? 1 : 0);
    detail::put_u64(os, static_cast<std::uint64_t>(N));
    for (int a = 0; a < N; ++a) {
        detail::put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(t.source[a])));
        detail::put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(t.target[a])));
        detail::put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(t.values.box().lo[a])));
        detail::put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(t.values.box().hi[a])));
    }
    for (std::size_t i = 0; i < t.values.size(); ++i)
        detail::put_f64(os, t.values.data()[i]);
}

template <int N>
inline bool read_action_table(ActionTable<N>& t, const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) return false;
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, "HJACT", 5) != 0) return false;
    if (detail::get_u64(is) != 1) return false;
    if (detail::get_u64(is) != fnv1a64(t.medium_id)) return false;
    if (detail::get_u64(is) != fnv1a64(t.omega)) return false;
    if (detail::get_f64(is) != t.dx) return false;
    if (detail::get_f64(is) != t.dt) return false;
    if (detail::get_f64(is) != t.speed_cap) return false;
    if (detail::get_f64(is) != t.domain_radius) return false;
    if (detail::get_u64(is) != static_cast<std::uint64_t>(t.steps)) return false;
    if (detail::get_f64(is) != t.cost_scale) return false;
    if ((detail::get_u64(is) != 0) != t.pruned) return false;
    if (detail::get_u64(is) != static_cast<std::uint64_t>(N)) return false;
    Box<N> box;
    for (int a = 0; a < N; ++a) {
        auto src = static_cast<int>(static_cast<std::int64_t>(detail::get_u64(is)));
        auto tgt = static_cast<int>(static_cast<std::int64_t>(detail::get_u64(is)));
        if (src != t.source[a]) return false;
        if (t.pruned && tgt != t.target[a]) return false;
        box.lo[a] = static_cast<int>(static_cast<std::int64_t>(detail::get_u64(is)));
        box.hi[a] = static_cast<int>(static_cast<std::int64_t>(detail::get_u64(is)));
    }
    Field<N> f(box);
    for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = detail::get_f64(is);
    if (!is) return false;
    t.values = std::move(f);
    return true;
}

// Runs the DP (or loads it) and returns the final slice as an ActionTable.
// `cache_dir` empty disables caching.
template <int N>
struct CacheStats {
    int hits = 0;
    int misses = 0;
};

template <int N>
inline ActionTable<N> minimal_action_table(const Medium<N>& m,
                                           const EnvironmentSample& w,
                                           const Lattice<N>& lat, const Idx<N>& x0,
                                           int steps, const ConeDpOptions<N>& opt,
                                           const std::filesystem::path& cache_dir = {},
                                           CacheStats<N>* stats = nullptr) {
    ActionTable<N> t;
    t.medium_id = m.id;
    t.omega = env_digest(w);
    t.dx = lat.dx;
    t.dt = lat.dt;
    t.speed_cap = lat.speed_cap;
    t.domain_radius = lat.domain_radius;
    t.source = x0;
    t.steps = steps;
    t.cost_scale = opt.cost_scale;
    t.pruned = opt.prune_to_target;
    t.target = opt.target;

    std::filesystem::path file;
    if (!cache_dir.empty()) {
        file = cache_dir / ("HJACT_" + t.cache_key() + ".bin");
        if (read_action_table(t, file)) {
            if (stats) stats->hits++;
            return t;
        }
    }
    t.values = dp_from_point(m, w, lat, x0, steps, opt);
    if (!cache_dir.empty()) {
        std::filesystem::create_directories(cache_dir);
        write_action_table(t, file);
        if (stats) stats->misses++;
    }
    return t;
}

}  // namespace hjh
