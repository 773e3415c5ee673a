#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace taycast {

// `key = value` document with '#' comments; keys may repeat.
class KvDoc {
public:
    static KvDoc parse_file(const std::string& path);
    static KvDoc parse_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    // Last occurrence wins for scalar lookups.
    std::string get(const std::string& key, const std::string& fallback) const;
    std::vector<std::string> all(const std::string& key) const;

    // Typed lookups; throw ConfigError naming the key on bad values.
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<long> get_long_list(const std::string& key,
                                    const std::vector<long>& fallback) const;

    // Every key must belong to `known`; throws ConfigError otherwise.
    void require_known_keys(const std::vector<std::string>& known) const;

    const std::string& origin() const { return origin_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::string origin_;
};

std::vector<std::string> split_list(const std::string& value);
double parse_double(const std::string& value, const std::string& what);
long parse_long(const std::string& value, const std::string& what);
bool parse_bool(const std::string& value, const std::string& what);

} // namespace taycast
