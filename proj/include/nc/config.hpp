#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nc/core.hpp"

namespace nc {

class config_error : public std::invalid_argument {
public:
    config_error(const std::string& key, const std::string& what)
        : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(key)
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class ValueType { real, positive_real, integer, u64, boolean, text, choice, real_list };

struct KeySpec {
    std::string key;
    ValueType type = ValueType::text;
    std::string fallback;  // empty: no default
    std::vector<std::string> choices;
    std::string help;
};

const std::vector<KeySpec>& config_schema();
const std::vector<std::string>& experiment_names();

// Flat `key = value` configuration. Values are kept as written; every key is checked
// against the schema when set.
class Config {
public:
    static Config parse(std::string_view text);
    static Config load(const std::string& path);

    std::string serialize() const;
    void set(const std::string& key, const std::string& value);
    // Accepts "key=value".
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get(const std::string& key) const;
    double real(const std::string& key) const;
    long long integer(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    bool boolean(const std::string& key) const;
    Vec real_list(const std::string& key) const;

    // Required keys present and cross-key constraints hold.
    void validate() const;
    // FNV-1a of the serialized form, as 16 hex digits.
    std::string hash() const;

    const std::map<std::string, std::string>& values() const { return values_; }
    bool operator==(const Config& o) const { return values_ == o.values_; }

private:
    std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a(std::string_view s);

}  // namespace nc
