#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace patrol {

// Flat key-value configuration with INI-style sections. Keys are addressed as
// "section.key". Reads are tracked so callers can reject unknown keys.
class ConfigMap {
public:
    ConfigMap() = default;
    static ConfigMap from_file(const std::string& path);
    static ConfigMap from_string(const std::string& text, const std::string& origin = "<string>");

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Keys present in the file but never read by any getter.
    std::vector<std::string> unread_keys() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> read_;
};

std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

}  // namespace patrol
