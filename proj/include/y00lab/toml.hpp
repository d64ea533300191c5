#pragma once

// Minimal TOML subset reader: [table.subtable] headers, bare keys, and
// string / integer / float / boolean / flat-array values. Covers the config
// files this project emits and consumes; it is not a general TOML parser.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "y00lab/errors.hpp"

namespace y00lab::toml {

using Value = std::variant<std::string, std::int64_t, double, bool,
                           std::vector<std::int64_t>, std::vector<double>>;

class Table {
public:
    bool contains(const std::string& key) const { return values_.count(key) != 0; }

    const Value& at(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw config_error("config: missing key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key) const {
        return expect<std::string>(key, "string");
    }

    std::int64_t get_int(const std::string& key) const {
        return expect<std::int64_t>(key, "integer");
    }

    double get_double(const std::string& key) const {
        const Value& v = at(key);
        if (std::holds_alternative<double>(v)) return std::get<double>(v);
        if (std::holds_alternative<std::int64_t>(v))
            return static_cast<double>(std::get<std::int64_t>(v));
        throw config_error("config: key '" + key + "' is not a number");
    }

    bool get_bool(const std::string& key) const { return expect<bool>(key, "boolean"); }

    std::vector<std::int64_t> get_int_array(const std::string& key) const {
        const Value& v = at(key);
        if (std::holds_alternative<std::vector<std::int64_t>>(v))
            return std::get<std::vector<std::int64_t>>(v);
        throw config_error("config: key '" + key + "' is not an integer array");
    }

    std::string get_string_or(const std::string& key, const std::string& fallback) const {
        return contains(key) ? get_string(key) : fallback;
    }
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const {
        return contains(key) ? get_int(key) : fallback;
    }
    double get_double_or(const std::string& key, double fallback) const {
        return contains(key) ? get_double(key) : fallback;
    }
    bool get_bool_or(const std::string& key, bool fallback) const {
        return contains(key) ? get_bool(key) : fallback;
    }

    void set(const std::string& key, Value v) { values_[key] = std::move(v); }

    const std::map<std::string, Value>& entries() const { return values_; }

private:
    template <class T>
    T expect(const std::string& key, const char* what) const {
        const Value& v = at(key);
        if (!std::holds_alternative<T>(v))
            throw config_error("config: key '" + key + "' is not a " + std::string(what));
        return std::get<T>(v);
    }

    std::map<std::string, Value> values_;
};

namespace detail {

inline std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline bool bare_key_ok(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
            return false;
    return true;
}

inline Value parse_scalar(const std::string& raw, int lineno) {
    std::string s = strip(raw);
    if (s.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw config_error("config line " + std::to_string(lineno) + ": unterminated string");
        return s.substr(1, s.size() - 2);
    }
    if (s == "true") return true;
    if (s == "false") return false;
    bool looks_float = s.find_first_of(".eE") != std::string::npos &&
                       s.find("0x") == std::string::npos;
    try {
        if (!looks_float) {
            std::size_t used = 0;
            std::int64_t v = std::stoll(s, &used, 0);
            if (used == s.size()) return v;
        }
        std::size_t used = 0;
        double d = std::stod(s, &used);
        if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
    throw config_error("config line " + std::to_string(lineno) + ": cannot parse value '" + s + "'");
}

inline Value parse_array(const std::string& body, int lineno) {
    std::vector<std::int64_t> ints;
    std::vector<double> doubles;
    bool any_double = false;
    std::string item;
    std::stringstream ss(body);
    while (std::getline(ss, item, ',')) {
        std::string t = strip(item);
        if (t.empty()) continue;
        Value v = parse_scalar(t, lineno);
        if (std::holds_alternative<std::int64_t>(v)) {
            ints.push_back(std::get<std::int64_t>(v));
            doubles.push_back(static_cast<double>(std::get<std::int64_t>(v)));
        } else if (std::holds_alternative<double>(v)) {
            any_double = true;
            doubles.push_back(std::get<double>(v));
        } else {
            throw config_error("config line " + std::to_string(lineno) +
                               ": arrays may hold numbers only");
        }
    }
    if (any_double) return doubles;
    return ints;
}

} // namespace detail

inline Table parse(std::istream& in) {
    Table out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = detail::strip(detail::strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw config_error("config line " + std::to_string(lineno) + ": bad table header");
            section = detail::strip(s.substr(1, s.size() - 2));
            if (!detail::bare_key_ok(section))
                throw config_error("config line " + std::to_string(lineno) + ": bad table name");
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::strip(s.substr(0, eq));
        std::string val = detail::strip(s.substr(eq + 1));
        if (!detail::bare_key_ok(key))
            throw config_error("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
        std::string full = section.empty() ? key : section + "." + key;
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']')
                throw config_error("config line " + std::to_string(lineno) + ": unterminated array");
            out.set(full, detail::parse_array(val.substr(1, val.size() - 2), lineno));
        } else {
            out.set(full, detail::parse_scalar(val, lineno));
        }
    }
    return out;
}

inline Table parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("config: cannot open '" + path + "'");
    return parse(f);
}

inline Table parse_string(const std::string& text) {
    std::istringstream ss(text);
    return parse(ss);
}

} // namespace y00lab::toml
