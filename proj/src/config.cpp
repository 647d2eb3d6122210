#include "gbopt/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gbopt/errors.hpp"

namespace gbopt {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

void ConfigSection::set(const std::string& key, const std::string& value, int line) {
    auto it = index_.find(key);
    if (it != index_.end()) {
        std::ostringstream os;
        os << origin_ << ":" << line << ": duplicate key '" << key << "' in section [" << name_
           << "] (first defined at line " << lines_.at(key) << ")";
        throw ConfigParseError(os.str());
    }
    index_[key] = entries_.size();
    lines_[key] = line;
    entries_.emplace_back(key, value);
}

bool ConfigSection::has(const std::string& key) const { return index_.count(key) != 0; }

int ConfigSection::line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? line_ : it->second;
}

void ConfigSection::fail(const std::string& key, const std::string& what) const {
    std::ostringstream os;
    os << origin_ << ":" << line_of(key) << ": [" << name_ << "] key '" << key << "': " << what;
    throw ConfigParseError(os.str());
}

const std::string& ConfigSection::get(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) fail(key, "missing required key");
    return entries_[it->second].second;
}

std::string ConfigSection::get_or(const std::string& key, const std::string& fallback) const {
    auto it = index_.find(key);
    return it == index_.end() ? fallback : entries_[it->second].second;
}

double ConfigSection::get_double(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE) fail(key, "expected a number, got '" + v + "'");
    return x;
}

double ConfigSection::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int ConfigSection::get_int(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE) fail(key, "expected an integer, got '" + v + "'");
    return static_cast<int>(x);
}

int ConfigSection::get_int_or(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t ConfigSection::get_uint64(const std::string& key) const {
    const std::string& v = get(key);
    errno = 0;
    char* end = nullptr;
    unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0' || errno == ERANGE) fail(key, "expected an unsigned integer, got '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

std::uint64_t ConfigSection::get_uint64_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_uint64(key) : fallback;
}

bool ConfigSection::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(key, "expected a boolean, got '" + v + "'");
    return false;
}

std::vector<double> ConfigSection::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& tok : split_tokens(get(key))) {
        errno = 0;
        char* end = nullptr;
        double x = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
            fail(key, "expected numbers, got '" + tok + "'");
        out.push_back(x);
    }
    return out;
}

std::vector<std::string> ConfigSection::get_strings(const std::string& key) const {
    return split_tokens(get(key));
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    ConfigSection* current = nullptr;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                std::ostringstream os;
                os << origin << ":" << lineno << ": unterminated section header '" << raw << "'";
                throw ConfigParseError(os.str());
            }
            std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) {
                std::ostringstream os;
                os << origin << ":" << lineno << ": empty section name";
                throw ConfigParseError(os.str());
            }
            cfg.sections_.emplace_back(name, origin, lineno);
            current = &cfg.sections_.back();
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << origin << ":" << lineno << ": expected 'key = value', got '" << raw << "'";
            throw ConfigParseError(os.str());
        }
        if (current == nullptr) {
            std::ostringstream os;
            os << origin << ":" << lineno << ": key-value pair outside any [section]";
            throw ConfigParseError(os.str());
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream os;
            os << origin << ":" << lineno << ": empty key";
            throw ConfigParseError(os.str());
        }
        current->set(key, value, lineno);
    }
    return cfg;
}

const ConfigSection* Config::find(const std::string& name) const {
    for (const auto& s : sections_)
        if (s.name() == name) return &s;
    return nullptr;
}

const ConfigSection& Config::require(const std::string& name) const {
    const ConfigSection* s = find(name);
    if (s == nullptr) throw ConfigParseError(origin_ + ": missing required section [" + name + "]");
    return *s;
}

std::vector<const ConfigSection*> Config::all_with_prefix(const std::string& prefix) const {
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections_)
        if (s.name().rfind(prefix, 0) == 0) out.push_back(&s);
    return out;
}

std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<std::string> split_tokens(const std::string& text, char delim) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        const auto first = cur.find_first_not_of(" \t");
        if (first == std::string::npos) {
            cur.clear();
            return;
        }
        const auto last = cur.find_last_not_of(" \t");
        out.push_back(cur.substr(first, last - first + 1));
        cur.clear();
    };
    for (char c : text) {
        if (c == delim) {
            flush();
        } else {
            cur.push_back(c);
        }
    }
    flush();
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace gbopt
