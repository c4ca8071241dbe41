#pragma once

#include <chrono>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fisherdet/checksum.hpp"
#include "fisherdet/errors.hpp"

namespace fisherdet {

/// FNV-1a 64 of a file's bytes, as hex.
inline std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for checksumming");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return hex64(h);
}

/**
 * Record of one CLI run: what was asked, what was read, what was produced.
 * Re-running with the same parameters and inputs must reproduce the same
 * output checksums.
 */
struct RunManifest {
    std::string subcommand;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<std::string> input_paths;
    std::map<std::string, std::string> output_checksums;
    double wall_seconds = 0.0;

    void add_output(const std::string& path) { output_checksums[path] = file_checksum(path); }

    void write(const std::string& path) const {
        nlohmann::json j;
        j["subcommand"] = subcommand;
        j["parameters"] = parameters;
        j["inputs"] = input_paths;
        j["outputs"] = output_checksums;
        j["wall_seconds"] = wall_seconds;
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write " + path);
        out << j.dump(2) << '\n';
        if (!out) throw IoError("write failure on " + path);
    }
};

/// Wall-clock stopwatch for manifest durations.
class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace fisherdet
