#pragma once

// ".ten" binary tensor format, all integers little-endian:
//   "TNSR" | u8 version (=1) | u8 rank | rank x u32 dims | prod(dims) x f32

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/tensor.hpp"

namespace tomofuse {

inline constexpr std::array<char, 4> kTensorMagic{'T', 'N', 'S', 'R'};
inline constexpr std::uint8_t kTensorVersion = 1;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
    return v;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace detail

inline void encode_tensor(const Tensor& t, std::vector<std::uint8_t>& out) {
    if (t.rank() == 0) throw Error(ErrorCode::InvalidTensor, ".ten requires rank >= 1");
    if (t.rank() > std::numeric_limits<std::uint8_t>::max()) {
        throw Error(ErrorCode::ShapeOverflow, "rank " + std::to_string(t.rank()) + " exceeds 255");
    }
    out.insert(out.end(), kTensorMagic.begin(), kTensorMagic.end());
    out.push_back(kTensorVersion);
    out.push_back(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.shape()) {
        if (d == 0) throw Error(ErrorCode::InvalidTensor, "zero-length dimension");
        if (d > std::numeric_limits<std::uint32_t>::max()) {
            throw Error(ErrorCode::ShapeOverflow, "dimension " + std::to_string(d) + " exceeds u32");
        }
        detail::put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (float v : t.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
    std::vector<std::uint8_t> out;
    out.reserve(6 + 4 * t.rank() + 4 * t.size());
    encode_tensor(t, out);
    return out;
}

// Decodes one tensor starting at `offset` and advances it past the payload.
inline Tensor decode_tensor(std::span<const std::uint8_t> in, std::size_t& offset) {
    const auto remaining = [&] { return in.size() - offset; };
    if (remaining() < 6) throw Error(ErrorCode::TruncatedFile, "header shorter than 6 bytes");
    if (std::memcmp(in.data() + offset, kTensorMagic.data(), kTensorMagic.size()) != 0) {
        throw Error(ErrorCode::BadMagic, "expected TNSR");
    }
    if (in[offset + 4] != kTensorVersion) {
        throw Error(ErrorCode::BadMagic, "unsupported version " + std::to_string(in[offset + 4]));
    }
    const std::size_t rank = in[offset + 5];
    if (rank == 0) throw Error(ErrorCode::InvalidTensor, "rank 0 in file");
    offset += 6;
    if (remaining() < 4 * rank) throw Error(ErrorCode::TruncatedFile, "dimension list cut short");

    Shape shape(rank);
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        shape[i] = detail::get_u32(in, offset + 4 * i);
        if (shape[i] == 0) throw Error(ErrorCode::InvalidTensor, "zero-length dimension");
        if (count > std::numeric_limits<std::size_t>::max() / 4 / shape[i]) {
            throw Error(ErrorCode::ShapeOverflow, "element count overflows");
        }
        count *= shape[i];
    }
    offset += 4 * rank;
    if (remaining() / 4 < count) {
        throw Error(ErrorCode::TruncatedFile, "payload holds " + std::to_string(remaining()) +
                                                  " bytes, need " + std::to_string(4 * count));
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<float>(detail::get_u32(in, offset + 4 * i));
    }
    offset += 4 * count;
    return Tensor(std::move(shape), std::move(data));
}

inline void write_tensor(const Tensor& t, const std::filesystem::path& path) {
    detail::write_file_bytes(path, encode_tensor(t));
}

inline Tensor read_tensor(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    std::size_t offset = 0;
    Tensor t = decode_tensor(bytes, offset);
    if (offset != bytes.size()) {
        throw Error(ErrorCode::InvalidTensor, path.string() + " has trailing bytes");
    }
    return t;
}

}  // namespace tomofuse
