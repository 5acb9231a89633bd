#include "ptrhash/elias_fano.hpp"

#include <bit>
#include <stdexcept>

namespace ptrhash {

// Each sample packs (word index << 16) | in-word rank of the sampled set bit,
// so get() can start selecting right at the sampled word.

EliasFano EliasFano::build(std::span<const uint64_t> values, uint64_t universe) {
    EliasFano ef;
    ef.count_ = values.size();
    ef.universe_ = universe;
    if (values.empty()) return ef;
    if (universe == 0) universe = 1;

    uint8_t l = 0;
    const uint64_t per_value = universe / values.size();
    if (per_value > 1) l = static_cast<uint8_t>(63 - std::countl_zero(per_value));
    ef.low_bits_ = l;

    ef.low_words_.assign(div_ceil(values.size() * l, 64) + 1, 0);
    const uint64_t high_universe = (universe >> l) + values.size() + 1;
    ef.high_words_.assign(div_ceil(high_universe, 64) + 1, 0);

    uint64_t prev = 0;
    for (size_t i = 0; i < values.size(); i++) {
        const uint64_t v = values[i];
        if (v < prev) throw std::invalid_argument("elias-fano: values must be non-decreasing");
        if (v > universe) throw std::invalid_argument("elias-fano: value above universe");
        prev = v;
        if (l > 0) {
            const uint64_t bitpos = i * l;
            const uint64_t low = v & ((uint64_t{1} << l) - 1);
            ef.low_words_[bitpos / 64] |= low << (bitpos % 64);
            if (bitpos % 64 + l > 64)
                ef.low_words_[bitpos / 64 + 1] |= low >> (64 - bitpos % 64);
        }
        const uint64_t hpos = (v >> l) + i;  // strictly increasing in i
        if (i % kSampleEvery == 0) {
            const uint64_t in_word_rank =
                static_cast<uint64_t>(std::popcount(ef.high_words_[hpos / 64]));
            ef.samples_.push_back(((hpos / 64) << 16) | in_word_rank);
        }
        ef.high_words_[hpos / 64] |= uint64_t{1} << (hpos % 64);
    }
    return ef;
}

uint64_t EliasFano::low_value(size_t i) const {
    if (low_bits_ == 0) return 0;
    const uint64_t bitpos = i * low_bits_;
    uint64_t v = low_words_[bitpos / 64] >> (bitpos % 64);
    if (bitpos % 64 + low_bits_ > 64) v |= low_words_[bitpos / 64 + 1] << (64 - bitpos % 64);
    return v & ((uint64_t{1} << low_bits_) - 1);
}

uint64_t EliasFano::get(size_t i) const {
    const uint64_t sample = samples_[i / kSampleEvery];
    size_t word = static_cast<size_t>(sample >> 16);
    uint32_t want = static_cast<uint32_t>(sample & 0xffff) +
                    static_cast<uint32_t>(i % kSampleEvery);
    while (true) {
        const uint32_t c = static_cast<uint32_t>(std::popcount(high_words_[word]));
        if (want < c) break;
        want -= c;
        word++;
    }
    const uint64_t pos = word * 64 + select_in_word(high_words_[word], want);
    return ((pos - i) << low_bits_) | low_value(i);
}

EliasFano EliasFano::from_parts(uint64_t count, uint64_t universe, uint8_t low_bits,
                                std::vector<uint64_t> low_words,
                                std::vector<uint64_t> high_words,
                                std::vector<uint64_t> samples) {
    EliasFano ef;
    ef.count_ = count;
    ef.universe_ = universe;
    ef.low_bits_ = low_bits;
    ef.low_words_ = std::move(low_words);
    ef.high_words_ = std::move(high_words);
    ef.samples_ = std::move(samples);
    return ef;
}

}  // namespace ptrhash
