/// Reproducible random inputs for the sampling experiments.
///
/// Streams are counter-based: every draw is a pure function of
/// (master_seed, level, sample_index, counter), so replays are bit-identical
/// regardless of thread scheduling or evaluation order.
#pragma once

#include <cstdint>
#include <vector>

namespace wavemc {

/// splitmix64 finalizer; full-period mixing of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct StreamId {
    std::uint64_t master_seed = 0;
    std::uint32_t level = 0;
    std::uint64_t sample_index = 0;
};

class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint32_t level, std::uint64_t sample_index);

    std::uint64_t next_u64();
    /// Uniform in [0,1), 53 significant bits.
    double next_unit();
    double next_uniform(double lo, double hi);
    /// Uniform in [-1,1).
    double next_symmetric();

    const StreamId& id() const { return id_; }

private:
    StreamId id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

RngStream derive_stream(std::uint64_t master_seed, std::uint32_t level, std::uint64_t sample_index);

enum class FieldKind { KlExpansion, JumpPosition, ChannelWidth };

inline constexpr int kKlTerms = 100;
inline constexpr double kDomain1dLength = 6.0;
inline constexpr double kChannelWidthLo = 0.001;
inline constexpr double kChannelWidthHi = 0.007;

/// One realization of the random input, replayable from its stream.
struct FieldSample {
    FieldKind kind = FieldKind::KlExpansion;
    std::vector<double> kl_cos;  // xi_k^(1), kKlTerms entries in [-1,1]
    std::vector<double> kl_sin;  // xi_k^(2), kKlTerms entries in [-1,1]
    double jump_position = 0.0;  // xi in [4 - H0, 4]
    double channel_width = 0.0;  // b in [0.001, 0.007]
};

/// Truncated series field: c^2(x) = 1 + sum_k (cos + sin terms)/(4 pi^2 k^2).
FieldSample sample_kl(RngStream& stream);

/// Jump position xi ~ U(4 - coarse_h, 4).
FieldSample sample_jump(RngStream& stream, double coarse_h);

/// Channel width b ~ U(0.001, 0.007).
FieldSample sample_width(RngStream& stream);

/// Squared wave speed at position x. Throws std::domain_error for x outside
/// [0,6] on the 1D kinds. ChannelWidth samples have constant unit speed.
double eval_speed_squared(const FieldSample& sample, double x);

/// Upper bound on |c^2 - 1| for the series field: (1/(2 pi^2)) sum_k k^-2.
double kl_amplitude_bound();

}  // namespace wavemc
