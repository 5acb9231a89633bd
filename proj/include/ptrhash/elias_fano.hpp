#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ptrhash/cacheline_ef.hpp"
#include "ptrhash/common.hpp"

namespace ptrhash {

// Classic Elias-Fano over a non-decreasing sequence: each value splits into
// l = floor(log2(universe/count)) packed low bits and a unary-coded high
// part. Access needs select on the high bitvector; positions of every 512th
// set bit are sampled so a get() scans at most a few words.
class EliasFano {
  public:
    EliasFano() = default;

    static EliasFano build(std::span<const uint64_t> values, uint64_t universe);

    uint64_t get(size_t i) const;

    uint64_t size() const { return count_; }
    uint64_t universe() const { return universe_; }
    uint8_t low_bits() const { return low_bits_; }

    size_t payload_bytes() const {
        return low_words_.size() * 8 + high_words_.size() * 8 + samples_.size() * 8;
    }

    // Raw pieces, used by the index serializer.
    const std::vector<uint64_t>& low_words() const { return low_words_; }
    const std::vector<uint64_t>& high_words() const { return high_words_; }
    const std::vector<uint64_t>& samples() const { return samples_; }
    static EliasFano from_parts(uint64_t count, uint64_t universe, uint8_t low_bits,
                                std::vector<uint64_t> low_words,
                                std::vector<uint64_t> high_words,
                                std::vector<uint64_t> samples);

  private:
    static constexpr uint64_t kSampleEvery = 512;

    uint64_t low_value(size_t i) const;

    uint64_t count_ = 0;
    uint64_t universe_ = 0;
    uint8_t low_bits_ = 0;
    std::vector<uint64_t> low_words_;
    std::vector<uint64_t> high_words_;
    std::vector<uint64_t> samples_;  // word index of every kSampleEvery'th set bit
};

}  // namespace ptrhash
