#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace lfpp {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A stream is fixed by (key, stream_a, stream_b); the low 64 counter bits walk the stream.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3], k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
      const auto n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      const auto n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      c1 = static_cast<std::uint32_t>(p1);
      c3 = static_cast<std::uint32_t>(p0);
      c0 = n0;
      c2 = n2;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {c0, c1, c2, c3};
  }
};

// UniformRandomBitGenerator over one Philox stream, 64-bit outputs.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  CounterStream(std::uint64_t seed, std::uint32_t stream_a, std::uint32_t stream_b)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        a_(stream_a),
        b_(stream_b) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (slot_ == 2) refill();
    const std::uint64_t lo = buf_[2 * slot_], hi = buf_[2 * slot_ + 1];
    ++slot_;
    return (hi << 32) | lo;
  }

  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  void refill() {
    buf_ = Philox4x32::block({static_cast<std::uint32_t>(pos_), static_cast<std::uint32_t>(pos_ >> 32), a_, b_},
                             key_);
    ++pos_;
    slot_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t a_, b_;
  std::uint64_t pos_ = 0;
  Philox4x32::Counter buf_{};
  int slot_ = 2;
};

// Stream purposes, kept distinct so no two consumers share a stream.
enum class StreamPurpose : std::uint32_t {
  spectral_noise = 1,
  layer_noise = 2,
  bootstrap = 3,
  gw_paths = 4,
  centers = 5,
  test_data = 6,
  scramble = 7,
};

inline CounterStream make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint32_t sub,
                                 std::uint32_t block = 0) {
  return CounterStream(seed, (static_cast<std::uint32_t>(purpose) << 24) ^ sub, block);
}

}  // namespace lfpp
