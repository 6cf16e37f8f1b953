// Small shared vocabulary: fixed-dimension vectors, errors, deterministic
// RNG and content hashing. Everything downstream includes this first.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjh {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace dim_detail {
template <int N>
struct dim {
    using vec = std::array<double, static_cast<std::size_t>(N)>;
    using idx = std::array<int, static_cast<std::size_t>(N)>;
};
}  // namespace dim_detail

// Dependent aliases: function parameters of these types are non-deduced, so
// the dimension always comes from the Medium/Lattice argument or an explicit
// template argument.
template <int N>
using Vec = typename dim_detail::dim<N>::vec;

template <int N>
using Idx = typename dim_detail::dim<N>::idx;

template <class T, std::size_t M>
inline std::array<T, M> operator+(const std::array<T, M>& a,
                                  const std::array<T, M>& b) {
    std::array<T, M> r{};
    for (std::size_t i = 0; i < M; ++i) r[i] = a[i] + b[i];
    return r;
}

template <class T, std::size_t M>
inline std::array<T, M> operator-(const std::array<T, M>& a,
                                  const std::array<T, M>& b) {
    std::array<T, M> r{};
    for (std::size_t i = 0; i < M; ++i) r[i] = a[i] - b[i];
    return r;
}

template <class T, std::size_t M>
inline std::array<T, M> operator*(double s, const std::array<T, M>& a) {
    std::array<T, M> r{};
    for (std::size_t i = 0; i < M; ++i) r[i] = static_cast<T>(s * a[i]);
    return r;
}

template <int N>
inline double dot(const Vec<N>& a, const Vec<N>& b) {
    double s = 0;
    for (int i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <int N>
inline double norm2(const Vec<N>& a) {
    return std::sqrt(dot<N>(a, a));
}

template <int N>
inline double norm_inf(const Vec<N>& a) {
    double m = 0;
    for (int i = 0; i < N; ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Errors. The CLI maps ConfigError to exit code 2 and audit failures to 1;
// everything else is a hard defect.

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

struct LatticeError : Error {
    explicit LatticeError(const std::string& what) : Error(what) {}
};

struct ConeError : Error {
    explicit ConeError(const std::string& what) : Error(what) {}
};

struct ResonanceError : Error {
    explicit ResonanceError(const std::string& what) : Error(what) {}
};

struct MediumError : Error {
    explicit MediumError(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Deterministic RNG. std::uniform_real_distribution is implementation-defined,
// so the 53-bit uniform is spelled out; values must match across platforms.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // decorrelate small consecutive seeds
        splitmix64(state_);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// FNV-1a content hashing, used for medium ids, config hashes and artifacts.

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

// Shortest round-trip decimal form; used everywhere numbers become text so
// that artifacts are byte-stable.
inline std::string format_double(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        std::ostringstream os;
        os.precision(prec);
        os << v;
        double back = 0;
        std::istringstream is(os.str());
        is >> back;
        if (back == v) return os.str();
    }
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline double frac_mod1(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f -= 1.0;
    return f;
}

}  // namespace hjh
