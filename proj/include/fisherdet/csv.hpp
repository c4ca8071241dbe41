#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fisherdet/errors.hpp"

namespace fisherdet {

/// One scored sample. is_adversarial: 1 yes, 0 no, -1 unknown.
struct ScoreRow {
    std::size_t sample_index = 0;
    std::size_t label = 0;
    std::size_t predicted = 0;
    int is_adversarial = -1;
    double trace = 0.0;
    double form = 0.0;
    double normalized_form = 0.0;
};

inline constexpr const char* kScoreCsvHeader =
    "sample_index,label,predicted,is_adversarial,trace,form,normalized_form";

inline void write_scores_csv(const std::vector<ScoreRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    out << kScoreCsvHeader << '\n';
    for (const auto& r : rows)
        out << r.sample_index << ',' << r.label << ',' << r.predicted << ','
            << r.is_adversarial << ',' << r.trace << ',' << r.form << ','
            << r.normalized_form << '\n';
    if (!out) throw IoError("write failure on " + path);
}

inline std::vector<ScoreRow> read_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kScoreCsvHeader)
        throw IoError(path + ": not a score CSV (bad header)");
    std::vector<ScoreRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 7)
            throw IoError(path + ": line " + std::to_string(lineno) + " has " +
                          std::to_string(f.size()) + " fields, expected 7");
        try {
            ScoreRow r;
            r.sample_index = static_cast<std::size_t>(std::stoull(f[0]));
            r.label = static_cast<std::size_t>(std::stoull(f[1]));
            r.predicted = static_cast<std::size_t>(std::stoull(f[2]));
            r.is_adversarial = std::stoi(f[3]);
            r.trace = std::stod(f[4]);
            r.form = std::stod(f[5]);
            r.normalized_form = std::stod(f[6]);
            rows.push_back(r);
        } catch (const std::exception&) {
            throw IoError(path + ": line " + std::to_string(lineno) + " is malformed");
        }
    }
    return rows;
}

/// Pulls one score column out of parsed rows.
inline std::vector<double> score_column(const std::vector<ScoreRow>& rows,
                                        const std::string& quantity) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (quantity == "trace") out.push_back(r.trace);
        else if (quantity == "form") out.push_back(r.form);
        else if (quantity == "nform") out.push_back(r.normalized_form);
        else throw ConfigError("unknown score quantity '" + quantity + "'");
    }
    return out;
}

} // namespace fisherdet
