#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crimesim {

/// Flat key/value run configuration.
///
/// Text format: one `key = value` pair per line; `#` starts a comment that
/// runs to the end of the line; blank lines are ignored; later keys override
/// earlier ones. Keys are dotted lowercase names (e.g. `solver.tol1`).
class Config {
public:
    Config() = default;

    static Config parse(std::istream& in);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
    /// Copies every entry of `other` over this one.
    void merge(const Config& other);

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key) const;

    /// True when the value parses as a number.
    bool is_number(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    /// Canonical text form (sorted keys), parseable by `parse`.
    std::string to_string() const;

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace crimesim
