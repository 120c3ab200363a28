#pragma once

#include <cstdint>
#include <initializer_list>

namespace oec {

// Philox 4x32-10 counter generator. Draws are addressed by (arrival, stage,
// slot) instead of being consumed from a shared sequence, so replicas and
// trials produce identical numbers no matter what order they execute in, and
// truncating a stream never shifts the draws of an earlier prefix.
class Philox {
 public:
  Philox() = default;

  Philox(uint64_t seed, uint64_t stream) {
    uint64_t k = mix64(seed ^ mix64(stream ^ 0x7ED4A3A10A3F5E1BULL));
    key0_ = static_cast<uint32_t>(k);
    key1_ = static_cast<uint32_t>(k >> 32);
    salt_ = static_cast<uint32_t>(mix64(k));
  }

  // Raw keyed block function, exposed for the known-answer tests.
  static void block(const uint32_t ctr_in[4], const uint32_t key_in[2], uint32_t out[4]) {
    uint32_t c0 = ctr_in[0], c1 = ctr_in[1], c2 = ctr_in[2], c3 = ctr_in[3];
    uint32_t k0 = key_in[0], k1 = key_in[1];
    for (int round = 0; round < 10; ++round) {
      uint64_t m0 = static_cast<uint64_t>(kPhiloxM4x32A) * c0;
      uint64_t m1 = static_cast<uint64_t>(kPhiloxM4x32B) * c2;
      uint32_t hi0 = static_cast<uint32_t>(m0 >> 32), lo0 = static_cast<uint32_t>(m0);
      uint32_t hi1 = static_cast<uint32_t>(m1 >> 32), lo1 = static_cast<uint32_t>(m1);
      uint32_t n0 = hi1 ^ c1 ^ k0;
      uint32_t n1 = lo1;
      uint32_t n2 = hi0 ^ c3 ^ k1;
      uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += kPhiloxW32A;
      k1 += kPhiloxW32B;
    }
    out[0] = c0; out[1] = c1; out[2] = c2; out[3] = c3;
  }

  uint64_t bits(uint32_t arrival, uint32_t stage, uint32_t slot = 0) const {
    uint32_t ctr[4] = {slot, stage, arrival, salt_};
    uint32_t key[2] = {key0_, key1_};
    uint32_t out[4];
    block(ctr, key, out);
    return (static_cast<uint64_t>(out[0]) << 32) | out[1];
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform(uint32_t arrival, uint32_t stage, uint32_t slot = 0) const {
    return static_cast<double>(bits(arrival, stage, slot) >> 11) * 0x1.0p-53;
  }

  static uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr uint32_t kPhiloxW32A = 0x9E3779B9;
  static constexpr uint32_t kPhiloxW32B = 0xBB67AE85;
  static constexpr uint32_t kPhiloxM4x32A = 0xD2511F53;
  static constexpr uint32_t kPhiloxM4x32B = 0xCD9E8D57;

  uint32_t key0_ = 0, key1_ = 0, salt_ = 0;
};

// Stream ids for unrelated random decisions are derived by folding a tag path
// into the root seed, one mix per element.
inline uint64_t substream(uint64_t root, std::initializer_list<uint64_t> path) {
  uint64_t s = root;
  for (uint64_t e : path) s = Philox::mix64(s ^ (e + 0x9E3779B97F4A7C15ULL));
  return s;
}

// Tags keeping the generator, rounding, coloring and diagnostics draws in
// disjoint stream families for one user seed.
enum StreamTag : uint64_t {
  kStreamGen = 1,
  kStreamRound = 2,
  kStreamTrial = 3,
  kStreamColorPass = 4,
  kStreamSplit = 5,
  kStreamConcentration = 6,
};

}  // namespace oec
