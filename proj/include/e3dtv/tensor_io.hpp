#pragma once

#include "e3dtv/compressive_operator.hpp"
#include "e3dtv/errors.hpp"
#include "e3dtv/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace e3dtv {

// Tensor file (all integers and floats little-endian):
//   "E3DTVT01"  8 bytes
//   h, w, s     u32 each
//   dtype       u32, 1 = float64
//   payload     h*w*s float64 in canonical order (i fastest, then j, then k)
//   checksum    u64, FNV-1a over the payload bytes
//
// Measurement file:
//   "E3DTVM01"  8 bytes
//   seed        u64
//   h, w, s     u32 each
//   n_pad       u64
//   ratio       float64
//   m           u64
//   payload     m float64
//   checksum    u64, FNV-1a over the payload bytes

inline constexpr std::uint32_t kDtypeFloat64 = 1;

using Bytes = std::vector<std::uint8_t>;

[[nodiscard]] std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

[[nodiscard]] Bytes encode_tensor(const HsiTensor& t);
/// Throws FormatError on bad magic, size mismatch or checksum mismatch.
[[nodiscard]] HsiTensor decode_tensor(std::span<const std::uint8_t> bytes);

/// Everything needed to rebuild the measurement operator bit-exactly.
struct OperatorDescriptor {
    std::uint64_t seed = 0;
    Dims dims;
    Index n_pad = 0;
    double ratio = 0.0;
    Index m = 0;

    static OperatorDescriptor describe(const CompressiveOperator& op);
    /// Rebuilds and cross-checks n_pad and m. Throws FormatError on mismatch.
    [[nodiscard]] CompressiveOperator build() const;
};

struct Measurement {
    OperatorDescriptor op;
    Vector y;
};

[[nodiscard]] Bytes encode_measurement(const Measurement& meas);
[[nodiscard]] Measurement decode_measurement(std::span<const std::uint8_t> bytes);

/// File helpers. Reads throw FormatError (bad content) or std::runtime_error
/// (cannot open). Writes go to a sibling temporary that is renamed into
/// place, so a failed write never leaves a partial file.
[[nodiscard]] Bytes read_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const HsiTensor& t);
[[nodiscard]] HsiTensor read_tensor(const std::filesystem::path& path);
void write_measurement(const std::filesystem::path& path, const Measurement& meas);
[[nodiscard]] Measurement read_measurement(const std::filesystem::path& path);

}  // namespace e3dtv
