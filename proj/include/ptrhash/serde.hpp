#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ptrhash/index.hpp"

namespace ptrhash {

// On-disk index format, all fields little-endian:
//
//   offset size  field
//   0      4     magic "PTRH"
//   4      4     format version (1)
//   8      1     key kind id
//   9      1     hash algorithm id
//   10     1     bucket function id
//   11     1     remap kind id
//   12     1     reduce kind id
//   13     3     reserved (zero)
//   16     8     n
//   24     8     P (parts)
//   32     8     S (slots per part)
//   40     8     B (buckets per part)
//   48     8     seed
//   56     8     pilot byte length (P*B)
//   64     8     remap payload byte length
//   72     ...   pilots, then the remap payload
//
// The header fully determines how to parse the payload, and unknown
// versions/ids are rejected. CacheLineEF blocks serialize bit-exact in their
// pinned 64-byte layout.

inline constexpr uint32_t kIndexFormatVersion = 1;
inline constexpr size_t kIndexHeaderBytes = 72;

class SerdeError : public std::runtime_error {
  public:
    explicit SerdeError(const std::string& what) : std::runtime_error(what) {}
};

std::vector<uint8_t> serialize(const PtrHashIndex& index);
PtrHashIndex deserialize(std::span<const uint8_t> bytes);

void save_index(const PtrHashIndex& index, const std::filesystem::path& path);
PtrHashIndex load_index(const std::filesystem::path& path);

}  // namespace ptrhash
