#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dkgraph/error.hpp"
#include "dkgraph/labeled_tree.hpp"

namespace dkgraph {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ParseError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::ParseError, "cannot write " + path);
    out << text;
}

/// FNV-1a, 64-bit, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

struct NamedMatrix {
    std::vector<std::string> names;
    Matrix<double> values;
};

/// Dense CSV with a header row of mark names.
inline NamedMatrix parse_matrix_csv(const std::string& text) {
    NamedMatrix out;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (header) {
            out.names = cells;
            header = false;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(c, &used));
            } catch (const std::exception&) {
                fail(ErrorCode::ParseError, "bad number '" + c + "'");
            }
        }
        if (row.size() != out.names.size()) fail(ErrorCode::ShapeMismatch, "row length differs from header");
        out.values.push_back(std::move(row));
    }
    if (out.values.size() != out.names.size()) fail(ErrorCode::ShapeMismatch, "matrix is not square");
    return out;
}

inline std::string matrix_csv(const std::vector<std::string>& names, const Matrix<double>& m) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? "," : "") + names[i];
    out += '\n';
    for (const auto& row : m) {
        for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + format_double(row[j]);
        out += '\n';
    }
    return out;
}

/// CSV table with '#'-prefixed metadata rows before the header.
class StatTable {
public:
    explicit StatTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
    void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

    std::string csv() const {
        std::string out;
        for (const auto& [k, v] : meta_) out += "# " + k + ": " + v + "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
        out += '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
            out += '\n';
        }
        return out;
    }

    nlohmann::json json() const {
        nlohmann::json j;
        for (const auto& [k, v] : meta_) j["meta"][k] = v;
        j["rows"] = nlohmann::json::array();
        for (const auto& r : rows_) {
            nlohmann::json o;
            for (std::size_t i = 0; i < r.size() && i < columns_.size(); ++i) o[columns_[i]] = r[i];
            j["rows"].push_back(o);
        }
        return j;
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<std::string>> rows_;
};

/// Everything needed to re-run a command; contains no timestamps.
struct ExperimentManifest {
    std::string experiment;
    std::vector<std::string> argv;
    std::vector<std::pair<std::string, std::string>> param_hashes;  // path, fnv1a
    std::uint64_t seed = 0;
    std::uint64_t reps = 0;
    std::vector<std::uint64_t> streams;
    std::string version = kToolVersion;
    nlohmann::json extra = nlohmann::json::object();

    nlohmann::json json() const {
        nlohmann::json hashes = nlohmann::json::array();
        for (const auto& [p, h] : param_hashes) hashes.push_back({{"file", p}, {"fnv1a64", h}});
        return {{"experiment", experiment}, {"argv", argv},   {"params", hashes},
                {"seed", seed},             {"reps", reps},   {"streams", streams},
                {"version", version},       {"extra", extra}};
    }
};

} // namespace dkgraph
