#pragma once

// Minimal TOML subset reader for experiment configs: comments, [sections],
// and key = value lines with string, integer, float, boolean, or flat array
// values. Keys are exposed as "section.key".

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coco/core.hpp"

namespace coco::detail {

class TomlLite {
  public:
    static TomlLite parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        std::stringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    static TomlLite parse(const std::string& text) {
        TomlLite t;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
                section = strip(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
            std::string key = strip(s.substr(0, eq));
            std::string value = strip(s.substr(eq + 1));
            if (key.empty() || value.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty key or value");
            t.values_[section.empty() ? key : section + "." + key] = value;
        }
        return t;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return unquote(it->second, key);
    }

    double get_number(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return to_number(it->second, key);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true") return true;
        if (it->second == "false") return false;
        throw ConfigError("config key " + key + ": expected true or false");
    }

    std::vector<std::string> get_string_array(const std::string& key,
                                              std::vector<std::string> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        for (const auto& item : split_array(it->second, key)) out.push_back(unquote(item, key));
        return out;
    }

    std::vector<double> get_number_array(const std::string& key,
                                         std::vector<double> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        for (const auto& item : split_array(it->second, key)) out.push_back(to_number(item, key));
        return out;
    }

  private:
    static std::string strip(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && (std::isspace(static_cast<unsigned char>(s[b - 1])) || s[b - 1] == '\r'))
            --b;
        return s.substr(a, b - a);
    }

    static std::string unquote(const std::string& s, const std::string& key) {
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
            return s.substr(1, s.size() - 2);
        if (!s.empty() && s.front() != '"') return s;  // bare value
        throw ConfigError("config key " + key + ": malformed string");
    }

    static double to_number(const std::string& s, const std::string& key) {
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": expected a number, got '" + s + "'");
        }
    }

    static std::vector<std::string> split_array(const std::string& s, const std::string& key) {
        if (s.size() < 2 || s.front() != '[' || s.back() != ']')
            throw ConfigError("config key " + key + ": expected an array [...]");
        std::vector<std::string> items;
        std::string cur;
        bool in_string = false;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            char ch = s[i];
            if (ch == '"') in_string = !in_string;
            if (ch == ',' && !in_string) {
                items.push_back(strip(cur));
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        std::string last = strip(cur);
        if (!last.empty()) items.push_back(last);
        return items;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace coco::detail
