#include "patrol/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace patrol {

std::string trim(const std::string& text) {
    const size_t begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const size_t end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

ConfigMap ConfigMap::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return from_string(text.str(), path);
}

ConfigMap ConfigMap::from_string(const std::string& text, const std::string& origin) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t comment = line.find_first_of(";#");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
        cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

void ConfigMap::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string ConfigMap::get_str(const std::string& key, const std::string& fallback) const {
    read_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    const std::string s = get_str(key, "");
    if (s.empty()) return fallback;
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("config key " + key + " is not a number: " + s);
    return v;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
    const std::string s = get_str(key, "");
    if (s.empty()) return fallback;
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size())
        throw std::runtime_error("config key " + key + " is not an integer: " + s);
    return v;
}

uint64_t ConfigMap::get_u64(const std::string& key, uint64_t fallback) const {
    const std::string s = get_str(key, "");
    if (s.empty()) return fallback;
    size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size())
        throw std::runtime_error("config key " + key + " is not an integer: " + s);
    return static_cast<uint64_t>(v);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    const std::string s = get_str(key, "");
    if (s.empty()) return fallback;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::runtime_error("config key " + key + " is not a boolean: " + s);
}

std::vector<std::string> ConfigMap::unread_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_)
        if (read_.count(key) == 0) out.push_back(key);
    return out;
}

}  // namespace patrol
