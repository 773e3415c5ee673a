#include "taycast/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "taycast/errors.hpp"

namespace taycast {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

KvDoc KvDoc::parse_file(const std::string& path) {
    std::ifstream file(path);
    if (!file.is_open()) throw IoError("cannot open manifest: " + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    return parse_text(buffer.str(), path);
}

KvDoc KvDoc::parse_text(const std::string& text, const std::string& origin) {
    KvDoc doc;
    doc.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(ss, line)) {
        ++row;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(origin + ": row " + std::to_string(row) + " is not 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ParseError(origin + ": row " + std::to_string(row) + " has an empty key");
        }
        doc.entries_.emplace_back(std::move(key), std::move(value));
    }
    return doc;
}

bool KvDoc::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == key; });
}

std::string KvDoc::get(const std::string& key, const std::string& fallback) const {
    std::string out = fallback;
    for (const auto& [k, v] : entries_) {
        if (k == key) out = v;
    }
    return out;
}

std::vector<std::string> KvDoc::all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
        if (k == key) out.push_back(v);
    }
    return out;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& value, const std::string& what) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + ": not a number: '" + value + "'");
    }
}

long parse_long(const std::string& value, const std::string& what) {
    try {
        std::size_t consumed = 0;
        const long v = std::stol(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + ": not an integer: '" + value + "'");
    }
}

bool parse_bool(const std::string& value, const std::string& what) {
    std::string lower = value;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "true" || lower == "yes" || lower == "1") return true;
    if (lower == "false" || lower == "no" || lower == "0") return false;
    throw ConfigError(what + ": not a boolean: '" + value + "'");
}

double KvDoc::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_double(get(key, ""), origin_ + ": " + key);
}

long KvDoc::get_long(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    return parse_long(get(key, ""), origin_ + ": " + key);
}

bool KvDoc::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    return parse_bool(get(key, ""), origin_ + ": " + key);
}

std::vector<double> KvDoc::get_double_list(const std::string& key,
                                           const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_list(get(key, ""))) {
        out.push_back(parse_double(item, origin_ + ": " + key));
    }
    return out;
}

std::vector<long> KvDoc::get_long_list(const std::string& key,
                                       const std::vector<long>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<long> out;
    for (const std::string& item : split_list(get(key, ""))) {
        out.push_back(parse_long(item, origin_ + ": " + key));
    }
    return out;
}

void KvDoc::require_known_keys(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : entries_) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw ConfigError(origin_ + ": unknown key '" + k + "'");
        }
    }
}

} // namespace taycast
