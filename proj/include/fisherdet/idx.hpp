#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "fisherdet/dataset.hpp"
#include "fisherdet/errors.hpp"
#include "fisherdet/tensor.hpp"

namespace fisherdet {

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on " + path);
    return bytes;
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t at,
                               const std::string& path) {
    if (at + 4 > b.size()) throw TruncatedFileError(path + ": truncated header");
    return (std::uint32_t(b[at]) << 24) | (std::uint32_t(b[at + 1]) << 16) |
           (std::uint32_t(b[at + 2]) << 8) | std::uint32_t(b[at + 3]);
}

} // namespace detail

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// MNIST-style IDX pair: big-endian headers, one byte per pixel/label,
/// pixels scaled by 1/255 into [0,1].
inline LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    using detail::read_be32;
    auto img = detail::read_file_bytes(images_path);
    auto lab = detail::read_file_bytes(labels_path);

    if (read_be32(img, 0, images_path) != kIdxImageMagic)
        throw BadMagicError(images_path + ": not an IDX image file (magic != 0x00000803)");
    if (read_be32(lab, 0, labels_path) != kIdxLabelMagic)
        throw BadMagicError(labels_path + ": not an IDX label file (magic != 0x00000801)");

    std::uint32_t n_img = read_be32(img, 4, images_path);
    std::uint32_t rows = read_be32(img, 8, images_path);
    std::uint32_t cols = read_be32(img, 12, images_path);
    std::uint32_t n_lab = read_be32(lab, 4, labels_path);
    if (n_img != n_lab)
        throw CountMismatchError("image file declares " + std::to_string(n_img) +
                                 " items, label file declares " + std::to_string(n_lab));

    std::size_t pixels = std::size_t(rows) * cols;
    if (img.size() < 16 + std::size_t(n_img) * pixels)
        throw TruncatedFileError(images_path + ": payload shorter than header declares");
    if (lab.size() < 8 + std::size_t(n_lab))
        throw TruncatedFileError(labels_path + ": payload shorter than header declares");

    LabeledDataset ds;
    ds.provenance = "idx(" + images_path + ", " + labels_path + ")";
    ds.inputs.reserve(n_img);
    ds.labels.reserve(n_img);
    for (std::uint32_t i = 0; i < n_img; ++i) {
        Tensor t = Tensor::zeros({rows, cols});
        const unsigned char* src = img.data() + 16 + std::size_t(i) * pixels;
        for (std::size_t p = 0; p < pixels; ++p) t.data[p] = src[p] / 255.0;
        ds.inputs.push_back(std::move(t));
        ds.labels.push_back(lab[8 + i]);
    }
    return ds;
}

/// Writes a dataset as an IDX pair. Pixels are quantized to bytes by
/// round(v * 255); inputs that came from an IDX file (multiples of 1/255)
/// round-trip exactly, anything else loses sub-1/255 precision.
inline void save_idx(const LabeledDataset& ds, const std::string& images_path,
                     const std::string& labels_path) {
    ds.validate();
    if (ds.inputs[0].shape.size() != 2)
        throw ShapeError("save_idx expects rank-2 image tensors, got shape " +
                         shape_string(ds.inputs[0].shape));
    std::uint32_t rows = static_cast<std::uint32_t>(ds.inputs[0].shape[0]);
    std::uint32_t cols = static_cast<std::uint32_t>(ds.inputs[0].shape[1]);
    std::uint32_t n = static_cast<std::uint32_t>(ds.size());

    auto put_be32 = [](std::ofstream& out, std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };

    std::ofstream iout(images_path, std::ios::binary | std::ios::trunc);
    if (!iout) throw IoError("cannot write " + images_path);
    put_be32(iout, kIdxImageMagic);
    put_be32(iout, n);
    put_be32(iout, rows);
    put_be32(iout, cols);
    for (const auto& t : ds.inputs) {
        for (double v : t.data) {
            double q = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
            unsigned char b = static_cast<unsigned char>(q);
            iout.write(reinterpret_cast<const char*>(&b), 1);
        }
    }
    if (!iout) throw IoError("write failure on " + images_path);

    std::ofstream lout(labels_path, std::ios::binary | std::ios::trunc);
    if (!lout) throw IoError("cannot write " + labels_path);
    put_be32(lout, kIdxLabelMagic);
    put_be32(lout, n);
    for (std::size_t l : ds.labels) {
        unsigned char b = static_cast<unsigned char>(l);
        lout.write(reinterpret_cast<const char*>(&b), 1);
    }
    if (!lout) throw IoError("write failure on " + labels_path);
}

} // namespace fisherdet
