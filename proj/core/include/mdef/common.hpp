#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdef {

inline constexpr const char* library_version = "0.1.0";

// Default tolerances: exact finite-grid identities vs quadrature-backed ones.
inline constexpr double grid_tol = 1e-9;
inline constexpr double quadrature_tol = 1e-6;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Splittable counter generator built on the splitmix64 mixing function.
// Every stream is a pure function of (seed, stream, counter), so draws are
// reproducible regardless of how work is chunked.  Reports quote the
// algorithm as "splitmix64".
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform on [0,1), 53 mantissa bits
    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }

    // independent child stream; parent state advances by one draw
    SplitMix64 split() { return SplitMix64(next() ^ 0xd6e8feb86659fd93ull); }

  private:
    std::uint64_t state_;
};

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    return g.next();
}

// Summation by recursive halving.  The result depends only on the order of
// the input values, never on how the caller partitions work.
double pairwise_sum(std::span<const double> xs);

// Shortest decimal form that round-trips through a double.
std::string format_double(double v);

// FNV-1a over raw bytes, used to stamp config identity into report headers.
std::uint64_t fnv1a64(std::span<const char> bytes);
std::string hex64(std::uint64_t v);

}  // namespace mdef
