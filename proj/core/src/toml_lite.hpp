#pragma once

// Minimal TOML reader covering the experiment config surface: bare keys,
// strings, integers, floats, booleans, flat arrays, [table] and
// [table.subtable] headers, and [[array-of-tables]] headers. Internal.

#include "twistlab/spaces.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace twistlab::toml {

struct Value;
using Table = std::map<std::string, Value>;

struct Value {
    enum class Type { Int, Float, Bool, String, Array, Table };
    Type type = Type::Int;
    int64_t i = 0;
    double f = 0.0;
    bool b = false;
    std::string s;
    std::vector<Value> array;
    std::shared_ptr<Table> table; // shared_ptr keeps Value copyable with incomplete Table

    bool is_table() const { return type == Type::Table; }
    double as_number() const;
    int64_t as_int() const;
    bool as_bool() const;
    const std::string& as_string() const;
};

class TomlError : public Error {
  public:
    using Error::Error;
};

/// Parses a document into its root table. Throws TomlError with a line number.
Table parse(const std::string& text);

} // namespace twistlab::toml
