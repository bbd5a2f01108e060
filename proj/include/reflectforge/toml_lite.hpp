#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace reflectforge::toml_lite {

/// Scalar-or-array value. Covers the subset of TOML the pipeline config
/// needs: [section] tables, basic strings, integers, floats, booleans, and
/// single-line arrays of scalars. No dates, no inline tables, no multiline
/// strings.
struct Value {
    enum class Kind { string_, integer, real, boolean, array };
    Kind kind = Kind::string_;
    std::string str;
    long long int_v = 0;
    double real_v = 0.0;
    bool bool_v = false;
    std::vector<Value> items;

    // typed accessors; throw ConfigError naming the key on mismatch
    std::string as_string(const std::string& key) const;
    long long as_int(const std::string& key) const;
    double as_double(const std::string& key) const;  // accepts integers too
    bool as_bool(const std::string& key) const;
    std::vector<std::string> as_string_array(const std::string& key) const;
};

/// Flattened table: "section.key" -> value.
using Table = std::map<std::string, Value>;

Table parse(std::string_view text, const std::string& origin = "config");

std::string escape_string(const std::string& s);

}  // namespace reflectforge::toml_lite
