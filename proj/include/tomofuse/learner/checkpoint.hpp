#pragma once

// Checkpoint layout (integers little-endian):
//   "TFCK" | u8 version = 1
//   u32 header length | header: UTF-8 "key = value" lines (config snapshot)
//   u32 tensor count
//   per tensor: u32 name length | name | one .ten record
// Tensors follow the head's fixed parameter order.

#include <array>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "tomofuse/error.hpp"
#include "tomofuse/kv.hpp"
#include "tomofuse/learner/head.hpp"
#include "tomofuse/tensor_io.hpp"

namespace tomofuse {

inline constexpr std::array<char, 4> kCheckpointMagic{'T', 'F', 'C', 'K'};

struct Checkpoint {
    KeyValues config;  // includes head.* geometry keys
    ClassifierHead head;
};

inline void add_head_keys(KeyValues& kv, const HeadConfig& hc) {
    std::string shape;
    for (std::size_t i = 0; i < hc.input_shape.size(); ++i) shape += (i ? "," : "") + std::to_string(hc.input_shape[i]);
    kv.set("head.input_shape", shape);
    kv.set("head.conv_filters", std::to_string(hc.conv_filters));
    kv.set("head.conv_kernel", std::to_string(hc.conv_kernel));
    kv.set("head.conv_stride", std::to_string(hc.conv_stride));
    kv.set("head.hidden", std::to_string(hc.hidden));
    kv.set("head.dropout", format_double(hc.dropout));
}

inline HeadConfig head_config_from(const KeyValues& kv) {
    auto uint_key = [&](const char* key) {
        auto v = parse_uint(kv.require(key));
        if (!v) throw Error(ErrorCode::InvalidConfig, std::string("bad ") + key);
        return static_cast<std::size_t>(*v);
    };
    HeadConfig hc;
    for (const auto& part : split_list(kv.require("head.input_shape"))) {
        auto v = parse_uint(part);
        if (!v) throw Error(ErrorCode::InvalidConfig, "bad head.input_shape");
        hc.input_shape.push_back(*v);
    }
    hc.conv_filters = uint_key("head.conv_filters");
    hc.conv_kernel = uint_key("head.conv_kernel");
    hc.conv_stride = uint_key("head.conv_stride");
    hc.hidden = uint_key("head.hidden");
    auto d = parse_double(kv.require("head.dropout"));
    if (!d) throw Error(ErrorCode::InvalidConfig, "bad head.dropout");
    hc.dropout = *d;
    return hc;
}

inline std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
    KeyValues header = ck.config;
    add_head_keys(header, ck.head.config());
    const std::string text = header.to_text();
    std::vector<std::uint8_t> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
    out.push_back(1);
    detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    detail::put_u32(out, static_cast<std::uint32_t>(ck.head.parameters().size()));
    for (const auto& p : ck.head.parameters()) {
        detail::put_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out.insert(out.end(), p.name.begin(), p.name.end());
        encode_tensor(p.value, out);
    }
    return out;
}

inline Checkpoint decode_checkpoint(std::span<const std::uint8_t> in) {
    std::size_t at = 0;
    auto need = [&](std::size_t n) {
        if (in.size() - at < n) throw Error(ErrorCode::TruncatedFile, "checkpoint cut short");
    };
    need(5);
    if (std::memcmp(in.data(), kCheckpointMagic.data(), 4) != 0) throw Error(ErrorCode::BadMagic, "expected TFCK");
    if (in[4] != 1) throw Error(ErrorCode::BadMagic, "unsupported checkpoint version");
    at = 5;
    need(4);
    const std::size_t header_len = detail::get_u32(in, at);
    at += 4;
    need(header_len);
    Checkpoint ck;
    ck.config = KeyValues::parse(std::string_view(reinterpret_cast<const char*>(in.data() + at), header_len),
                                 "checkpoint header");
    at += header_len;
    ck.head = ClassifierHead(head_config_from(ck.config));
    need(4);
    const std::size_t count = detail::get_u32(in, at);
    at += 4;
    if (count != ck.head.parameters().size()) {
        throw Error(ErrorCode::ShapeMismatch, "checkpoint holds " + std::to_string(count) + " tensors, head needs " +
                                                  std::to_string(ck.head.parameters().size()));
    }
    for (auto& p : ck.head.parameters()) {
        need(4);
        const std::size_t name_len = detail::get_u32(in, at);
        at += 4;
        need(name_len);
        const std::string name(reinterpret_cast<const char*>(in.data() + at), name_len);
        at += name_len;
        if (name != p.name) throw Error(ErrorCode::ShapeMismatch, "expected tensor " + p.name + ", found " + name);
        Tensor t = decode_tensor(in, at);
        if (t.shape() != p.value.shape()) {
            throw Error(ErrorCode::ShapeMismatch, name + " has shape " + shape_string(t.shape()) + ", expected " +
                                                      shape_string(p.value.shape()));
        }
        p.value = std::move(t);
    }
    return ck;
}

inline void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    detail::write_file_bytes(path, encode_checkpoint(ck));
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(detail::read_file_bytes(path));
}

}  // namespace tomofuse
