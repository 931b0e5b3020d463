#include "wavemc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wavemc {

namespace {
constexpr std::uint64_t kLevelSalt = 0xa511e9b3cc1f25d1ULL;
constexpr std::uint64_t kIndexSalt = 0x63d1c71ad3e29f0bULL;
}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint32_t level, std::uint64_t sample_index)
    : id_{master_seed, level, sample_index} {
    std::uint64_t k = mix64(master_seed);
    k = mix64(k ^ (kLevelSalt + level));
    k = mix64(k ^ (kIndexSalt + sample_index));
    key_ = k;
}

std::uint64_t RngStream::next_u64() {
    return mix64(key_ + counter_++ * 0x9e3779b97f4a7c15ULL);
}

double RngStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
}

double RngStream::next_symmetric() {
    return 2.0 * next_unit() - 1.0;
}

RngStream derive_stream(std::uint64_t master_seed, std::uint32_t level, std::uint64_t sample_index) {
    return RngStream(master_seed, level, sample_index);
}

FieldSample sample_kl(RngStream& stream) {
    FieldSample s;
    s.kind = FieldKind::KlExpansion;
    s.kl_cos.resize(kKlTerms);
    s.kl_sin.resize(kKlTerms);
    for (int k = 0; k < kKlTerms; ++k) s.kl_cos[k] = stream.next_symmetric();
    for (int k = 0; k < kKlTerms; ++k) s.kl_sin[k] = stream.next_symmetric();
    return s;
}

FieldSample sample_jump(RngStream& stream, double coarse_h) {
    FieldSample s;
    s.kind = FieldKind::JumpPosition;
    s.jump_position = stream.next_uniform(4.0 - coarse_h, 4.0);
    return s;
}

FieldSample sample_width(RngStream& stream) {
    FieldSample s;
    s.kind = FieldKind::ChannelWidth;
    s.channel_width = stream.next_uniform(kChannelWidthLo, kChannelWidthHi);
    return s;
}

double eval_speed_squared(const FieldSample& sample, double x) {
    switch (sample.kind) {
        case FieldKind::KlExpansion: {
            if (x < 0.0 || x > kDomain1dLength)
                throw std::domain_error("eval_speed_squared: x outside [0,6]");
            const double pi = std::numbers::pi;
            double value = 1.0;
            for (int k = 1; k <= kKlTerms; ++k) {
                const double arg = k * pi * x / kDomain1dLength;
                const double amp = 1.0 / (4.0 * pi * pi * k * k);
                value += amp * (std::cos(arg) * sample.kl_cos[k - 1] +
                                std::sin(arg) * sample.kl_sin[k - 1]);
            }
            return value;
        }
        case FieldKind::JumpPosition:
            if (x < 0.0 || x > kDomain1dLength)
                throw std::domain_error("eval_speed_squared: x outside [0,6]");
            return x < sample.jump_position ? 1.0 : 4.0;
        case FieldKind::ChannelWidth:
            return 1.0;
    }
    throw std::logic_error("eval_speed_squared: bad kind");
}

double kl_amplitude_bound() {
    const double pi = std::numbers::pi;
    double partial = 0.0;
    for (int k = 1; k <= kKlTerms; ++k) partial += 1.0 / (static_cast<double>(k) * k);
    return partial / (2.0 * pi * pi);
}

}  // namespace wavemc
