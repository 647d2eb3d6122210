#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gbopt {

// Flat key-value configuration with named, repeatable sections:
//
//   # comment
//   [section name]
//   key = value
//
// Values are whitespace-trimmed strings; typed accessors parse on demand and
// report the offending file/line on failure.
class ConfigSection {
public:
    ConfigSection() = default;
    ConfigSection(std::string name, std::string origin, int line)
        : name_(std::move(name)), origin_(std::move(origin)), line_(line) {}

    const std::string& name() const { return name_; }
    int line() const { return line_; }

    void set(const std::string& key, const std::string& value, int line = 0);
    bool has(const std::string& key) const;

    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int_or(const std::string& key, int fallback) const;
    std::uint64_t get_uint64(const std::string& key) const;
    std::uint64_t get_uint64_or(const std::string& key, std::uint64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
    int line_of(const std::string& key) const;

    std::string name_;
    std::string origin_;
    int line_ = 0;
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, int> lines_;
};

class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    const std::vector<ConfigSection>& sections() const { return sections_; }
    const ConfigSection* find(const std::string& name) const;
    const ConfigSection& require(const std::string& name) const;
    std::vector<const ConfigSection*> all_with_prefix(const std::string& prefix) const;

private:
    std::string origin_;
    std::vector<ConfigSection> sections_;
};

// Parses "a b c" or "a, b, c" into tokens.
std::vector<std::string> split_tokens(const std::string& text);

// Splits on one delimiter character, trimming whitespace and dropping empties.
std::vector<std::string> split_tokens(const std::string& text, char delim);

// Canonical shortest round-trip formatting for doubles ("%.17g").
std::string format_double(double v);

}  // namespace gbopt
