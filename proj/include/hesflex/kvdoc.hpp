#pragma once

// Flat "key = value" documents with dotted keys. Used for run configs and run
// reports. Lines starting with '#' and blank lines are ignored.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace hes {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    s = trim(s);
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
    s = trim(s);
    if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "off" || s == "no" || s == "0") return false;
    return std::nullopt;
}

class KeyValueDocument {
public:
    void set(const std::string& key, std::string value) {
        if (!values_.contains(key)) order_.push_back(key);
        values_[key] = std::move(value);
    }
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set(const std::string& key, std::string_view value) { set(key, std::string(value)); }
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
    void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }

    bool contains(const std::string& key) const { return values_.contains(key); }
    std::optional<std::string> get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }
    const std::vector<std::string>& keys() const { return order_; }

    std::string to_string() const {
        std::ostringstream out;
        for (const auto& k : order_) out << k << " = " << values_.at(k) << '\n';
        return out.str();
    }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError(path, "cannot open for writing");
        out << to_string();
        if (!out) throw IoError(path, "write failed");
    }

    static KeyValueDocument parse(std::string_view text, const std::string& origin = "<string>") {
        KeyValueDocument doc;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            const auto line = trim(raw);
            if (line.empty() || line.front() == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError(origin, line_no, "expected 'key = value'");
            const auto key = std::string(trim(line.substr(0, eq)));
            if (key.empty()) throw ParseError(origin, line_no, "empty key");
            if (doc.contains(key)) throw ParseError(origin, line_no, "duplicate key '" + key + "'");
            doc.set(key, std::string(trim(line.substr(eq + 1))));
        }
        return doc;
    }

    static KeyValueDocument read(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError(path, "cannot open for reading");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

}  // namespace hes
