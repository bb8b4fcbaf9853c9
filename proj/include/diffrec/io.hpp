#pragma once

#include <charconv>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diffrec/diffusion.hpp"
#include "diffrec/graph.hpp"

namespace diffrec {

// Shortest round-trip decimal form; identical bytes for identical doubles,
// so re-runs diff clean.
inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

// FNV-1a, used to stamp reports with their resolved configuration.
inline std::string fnv1a_hex(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::initializer_list<std::string_view> header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
        bool first = true;
        for (const auto& h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }

    void row(std::initializer_list<std::string> cells) {
        bool first = true;
        for (const auto& c : cells) {
            if (!first) out_ << ',';
            out_ << c;
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline void write_links_file(const std::string& path, const std::vector<Link>& links) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& [u, it] : links) out << u << '\t' << it << '\n';
}

inline std::vector<Link> read_links_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open links file: " + path);
    std::vector<Link> links;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        Link l{};
        if (!(ss >> l.user >> l.item))
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": expected 'user<TAB>item'");
        links.push_back(l);
    }
    return links;
}

inline void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

inline nlohmann::ordered_json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open json file: " + path);
    nlohmann::ordered_json j;
    in >> j;
    return j;
}

// Recommendation dump rows: user<TAB>item<TAB>score<TAB>rank.
inline void write_recommendations(const std::string& path,
                                  const std::vector<RecommendationList>& lists) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& l : lists)
        for (std::size_t rank = 0; rank < l.items.size(); ++rank)
            out << l.user << '\t' << l.items[rank] << '\t' << format_double(l.scores[rank]) << '\t'
                << rank + 1 << '\n';
}

}  // namespace diffrec
