#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace bes3 {

/// Anything the samplers can pull uniform and standard-normal draws from.
/// Production code uses RngStream; tests plug in scripted sources.
template <class S>
concept DrawSource = requires(S& s) {
  { s.draw_uniform01() } -> std::convertible_to<double>;
  { s.draw_standard_normal() } -> std::convertible_to<double>;
};

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3"). Key is the 64-bit seed, the upper 64 counter
/// bits select the substream and the lower 64 count blocks within it.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block apply(const Block& ctr, const Key& key) noexcept {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    auto round = [&]() {
      const std::uint64_t p0 = std::uint64_t{kMul0} * c0;
      const std::uint64_t p1 = std::uint64_t{kMul1} * c2;
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      c0 = hi1 ^ c1 ^ k0;
      c1 = static_cast<std::uint32_t>(p1);
      c2 = hi0 ^ c3 ^ k1;
      c3 = static_cast<std::uint32_t>(p0);
    };
    round();
    for (int r = 1; r < 10; ++r) {
      k0 += kWeyl0;
      k1 += kWeyl1;
      round();
    }
    return {c0, c1, c2, c3};
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// 64-bit uniform random bit generator over one Philox substream.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  PhiloxEngine(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (lane_ == 2) refill();
    return buffer_[lane_++];
  }

 private:
  void refill() noexcept {
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_id_),
                                static_cast<std::uint32_t>(stream_id_ >> 32)};
    const auto out = Philox4x32::apply(ctr, key_);
    buffer_[0] = std::uint64_t{out[0]} | (std::uint64_t{out[1]} << 32);
    buffer_[1] = std::uint64_t{out[2]} | (std::uint64_t{out[3]} << 32);
    ++block_;
    lane_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
};

/// Deterministic draw stream addressed by (seed, stream_id).
///
/// Identical addresses reproduce the identical draw sequence bit for bit;
/// distinct stream ids are disjoint Philox counter ranges. A stream is a plain
/// value: copy it to fork, never share one between threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
      : seed_(seed), stream_id_(stream_id), engine_(seed, stream_id) {}

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double draw_uniform01() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Ziggurat (Boost.Random) on top of the Philox engine.
  double draw_standard_normal() { return normal_(engine_); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  PhiloxEngine engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

inline RngStream make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

}  // namespace bes3
