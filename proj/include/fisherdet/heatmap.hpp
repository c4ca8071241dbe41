#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fisherdet/errors.hpp"
#include "fisherdet/scores.hpp"
#include "fisherdet/tensor.hpp"

namespace fisherdet {

enum class HeatmapScaling { shared_scale, per_image_scale };
enum class ValueView { signed_values, absolute_values };
enum class HeatmapFormat { pgm, csv };

/**
 * shared_scale maps values with the caller-supplied [shared_min, shared_max]
 * so several maps (clean vs adversarial) land on one gray scale;
 * per_image_scale uses the map's own extrema. A degenerate range (constant
 * map) renders as mid-gray 128. Out-of-range values under shared_scale are
 * clamped. CSV output is raw full-precision values and ignores scaling.
 */
struct HeatmapExportConfig {
    HeatmapScaling scaling = HeatmapScaling::per_image_scale;
    ValueView value_view = ValueView::absolute_values;
    HeatmapFormat format = HeatmapFormat::pgm;
    double shared_min = 0.0;
    double shared_max = 0.0;
};

namespace detail {

struct GridShape {
    std::size_t rows, cols;
};

inline GridShape grid_shape(const Tensor& t) {
    if (t.shape.size() == 1) return {1, t.shape[0]};
    if (t.shape.size() == 2) return {t.shape[0], t.shape[1]};
    throw ShapeError("heatmap export expects a rank-1 or rank-2 map, got " +
                     shape_string(t.shape));
}

inline void write_pgm(const std::string& path, const std::vector<unsigned char>& pixels,
                      GridShape g) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << g.cols << ' ' << g.rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("write failure on " + path);
}

} // namespace detail

inline void export_heatmap(const FisMap& map, const HeatmapExportConfig& cfg,
                           const std::string& path) {
    map.values.require_finite("heatmap");
    detail::GridShape g = detail::grid_shape(map.values);

    std::vector<double> vals = map.values.data;
    if (cfg.value_view == ValueView::absolute_values)
        for (double& v : vals) v = std::abs(v);

    if (cfg.format == HeatmapFormat::csv) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + path);
        out.precision(17);
        out << "shape";
        for (std::size_t d : map.values.shape) out << ',' << d;
        out << '\n';
        for (std::size_t r = 0; r < g.rows; ++r) {
            for (std::size_t c = 0; c < g.cols; ++c)
                out << (c ? "," : "") << vals[r * g.cols + c];
            out << '\n';
        }
        if (!out) throw IoError("write failure on " + path);
        return;
    }

    double lo, hi;
    if (cfg.scaling == HeatmapScaling::shared_scale) {
        lo = cfg.shared_min;
        hi = cfg.shared_max;
        if (hi < lo) throw ConfigError("shared_scale range is inverted");
    } else {
        lo = *std::min_element(vals.begin(), vals.end());
        hi = *std::max_element(vals.begin(), vals.end());
    }
    std::vector<unsigned char> pixels(vals.size());
    if (hi <= lo) {
        std::fill(pixels.begin(), pixels.end(), static_cast<unsigned char>(128));
    } else {
        for (std::size_t i = 0; i < vals.size(); ++i) {
            double t = (vals[i] - lo) / (hi - lo) * 255.0;
            pixels[i] = static_cast<unsigned char>(std::clamp(std::round(t), 0.0, 255.0));
        }
    }
    detail::write_pgm(path, pixels, g);
}

/// Reads back a CSV heatmap written by export_heatmap, bit-exactly.
inline Tensor import_heatmap_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("shape", 0) != 0)
        throw IoError(path + ": missing heatmap shape header");
    std::vector<std::size_t> shape;
    {
        std::stringstream ss(line.substr(5));
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) shape.push_back(static_cast<std::size_t>(std::stoull(tok)));
    }
    if (shape.empty()) throw IoError(path + ": empty shape header");
    std::vector<double> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    }
    return Tensor(shape, std::move(vals)); // throws ShapeError on count mismatch
}

/// Grayscale PGM of an image already in [0,1]; no autoscaling.
inline void export_image_pgm(const Tensor& image, const std::string& path) {
    image.require_finite("image");
    detail::GridShape g = detail::grid_shape(image);
    std::vector<unsigned char> pixels(image.size());
    for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = static_cast<unsigned char>(
            std::clamp(std::round(image.data[i] * 255.0), 0.0, 255.0));
    detail::write_pgm(path, pixels, g);
}

} // namespace fisherdet
