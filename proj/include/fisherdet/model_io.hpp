#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fisherdet/checksum.hpp"
#include "fisherdet/errors.hpp"
#include "fisherdet/network.hpp"

namespace fisherdet {

/**
 * Model container: one file holding a single-line JSON manifest followed by
 * the raw parameter blob (64-bit floats, little-endian). The manifest pins
 * the architecture, the parameter layout (offset table) and an FNV-1a 64
 * checksum of the blob, so a load either reproduces the saved network
 * bit-exactly or fails.
 */
inline constexpr const char* kModelFormat = "fisherdet-model";
inline constexpr int kModelVersion = 1;

namespace detail {

inline void put_le64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline nlohmann::json layer_to_json(const LayerSpec& l) {
    nlohmann::json j;
    j["kind"] = layer_kind_name(l.kind);
    switch (l.kind) {
        case LayerKind::dense:
            j["in"] = l.in;
            j["out"] = l.out;
            j["bias"] = l.bias;
            break;
        case LayerKind::conv2d:
            j["in_channels"] = l.in_channels;
            j["out_channels"] = l.out_channels;
            j["kernel"] = l.kernel;
            j["stride"] = l.stride;
            break;
        case LayerKind::maxpool2d:
            j["window"] = l.window;
            j["stride"] = l.pool_stride;
            break;
        case LayerKind::relu:
        case LayerKind::flatten:
        case LayerKind::softmax:
            break;
    }
    return j;
}

inline LayerSpec layer_from_json(const nlohmann::json& j) {
    LayerKind kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (kind) {
        case LayerKind::dense:
            return LayerSpec::dense(j.at("in").get<std::size_t>(), j.at("out").get<std::size_t>(),
                                    j.value("bias", true));
        case LayerKind::conv2d:
            return LayerSpec::conv2d(j.at("in_channels").get<std::size_t>(),
                                     j.at("out_channels").get<std::size_t>(),
                                     j.at("kernel").get<std::size_t>(),
                                     j.at("stride").get<std::size_t>());
        case LayerKind::maxpool2d:
            return LayerSpec::maxpool2d(j.at("window").get<std::size_t>(),
                                        j.at("stride").get<std::size_t>());
        case LayerKind::relu: return LayerSpec::relu();
        case LayerKind::flatten: return LayerSpec::flatten();
        case LayerKind::softmax: return LayerSpec::softmax();
    }
    throw ConfigError("unknown layer kind in manifest");
}

} // namespace detail

inline void save_model(const Network& net, const std::string& path) {
    std::string blob;
    blob.reserve(net.param_count() * 8);
    for (double v : net.params()) detail::put_le64(blob, std::bit_cast<std::uint64_t>(v));

    nlohmann::json m;
    m["format"] = kModelFormat;
    m["version"] = kModelVersion;
    m["dtype"] = "float64";
    m["byte_order"] = "little";
    m["input_shape"] = net.input_shape();
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : net.layers()) layers.push_back(detail::layer_to_json(l));
    m["layers"] = std::move(layers);
    m["param_count"] = net.param_count();
    nlohmann::json offsets = nlohmann::json::array();
    for (const auto& b : net.offset_table())
        offsets.push_back({{"layer", b.layer}, {"offset", b.offset}, {"count", b.count}});
    m["offset_table"] = std::move(offsets);
    m["blob_fnv1a64"] = hex64(fnv1a64(blob.data(), blob.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << m.dump() << '\n' << blob;
    if (!out) throw IoError("write failure on " + path);
}

inline Network load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw TruncatedFileError(path + ": missing manifest line");

    nlohmann::json m;
    try {
        m = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": manifest is not valid JSON: " + e.what());
    }

    try {
        if (m.at("format").get<std::string>() != kModelFormat)
            throw IoError(path + ": not a model file");
        if (m.at("version").get<int>() != kModelVersion)
            throw IoError(path + ": unsupported model version " +
                          std::to_string(m.at("version").get<int>()));
        if (m.at("dtype").get<std::string>() != "float64" ||
            m.at("byte_order").get<std::string>() != "little")
            throw IoError(path + ": unsupported blob encoding");

        std::vector<std::size_t> input_shape = m.at("input_shape").get<std::vector<std::size_t>>();
        std::vector<LayerSpec> layers;
        for (const auto& jl : m.at("layers")) layers.push_back(detail::layer_from_json(jl));
        Network net(std::move(input_shape), std::move(layers));

        std::size_t declared = m.at("param_count").get<std::size_t>();
        if (declared != net.param_count())
            throw IoError(path + ": manifest declares " + std::to_string(declared) +
                          " parameters, architecture has " + std::to_string(net.param_count()));

        // the offset table must match the one this architecture induces;
        // a manifest spliced from a different network is rejected here
        const auto& table = net.offset_table();
        const auto& jt = m.at("offset_table");
        if (jt.size() != table.size())
            throw IoError(path + ": offset table does not match architecture");
        for (std::size_t i = 0; i < table.size(); ++i) {
            ParamBlock b{jt[i].at("layer").get<std::size_t>(), jt[i].at("offset").get<std::size_t>(),
                         jt[i].at("count").get<std::size_t>()};
            if (b != table[i]) throw IoError(path + ": offset table does not match architecture");
        }

        std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (blob.size() != net.param_count() * 8)
            throw TruncatedFileError(path + ": blob holds " + std::to_string(blob.size()) +
                                     " bytes, manifest requires " +
                                     std::to_string(net.param_count() * 8));
        std::string want = m.at("blob_fnv1a64").get<std::string>();
        std::string got = hex64(fnv1a64(blob.data(), blob.size()));
        if (got != want)
            throw ChecksumError(path + ": blob checksum " + got + " != manifest " + want);

        ParamVector p(net.param_count());
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = std::bit_cast<double>(detail::get_le64(
                reinterpret_cast<const unsigned char*>(blob.data()) + i * 8));
        net.set_params(std::move(p));
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed manifest: " + e.what());
    }
}

} // namespace fisherdet
