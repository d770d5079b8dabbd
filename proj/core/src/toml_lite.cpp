#include "toml_lite.hpp"

#include <cctype>
#include <charconv>

namespace twistlab::toml {

double Value::as_number() const {
    if (type == Type::Int) return static_cast<double>(i);
    if (type == Type::Float) return f;
    throw TomlError("expected a number");
}

int64_t Value::as_int() const {
    if (type == Type::Int) return i;
    throw TomlError("expected an integer");
}

bool Value::as_bool() const {
    if (type == Type::Bool) return b;
    throw TomlError("expected a boolean");
}

const std::string& Value::as_string() const {
    if (type == Type::String) return s;
    throw TomlError("expected a string");
}

namespace {

struct Parser {
    const std::string& text;
    size_t pos = 0;
    int line = 1;

    explicit Parser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw TomlError("TOML line " + std::to_string(line) + ": " + msg);
    }

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
    }

    void skip_ws_and_comments() {
        for (;;) {
            skip_inline_ws();
            if (!eof() && peek() == '#') {
                while (!eof() && peek() != '\n') ++pos;
            }
            if (!eof() && (peek() == '\n' || peek() == '\r')) {
                if (peek() == '\n') ++line;
                ++pos;
                continue;
            }
            break;
        }
    }

    std::string bare_key() {
        size_t start = pos;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                          peek() == '-'))
            ++pos;
        if (start == pos) fail("expected a key");
        return text.substr(start, pos - start);
    }

    std::vector<std::string> dotted_key() {
        std::vector<std::string> parts{bare_key()};
        skip_inline_ws();
        while (!eof() && peek() == '.') {
            ++pos;
            skip_inline_ws();
            parts.push_back(bare_key());
            skip_inline_ws();
        }
        return parts;
    }

    Value parse_value() {
        skip_inline_ws();
        if (eof()) fail("expected a value");
        char c = peek();
        Value v;
        if (c == '"') {
            ++pos;
            std::string out;
            while (!eof() && peek() != '"') {
                if (peek() == '\\') {
                    ++pos;
                    if (eof()) fail("bad escape");
                    char e = peek();
                    if (e == 'n') out += '\n';
                    else if (e == 't') out += '\t';
                    else if (e == '"') out += '"';
                    else if (e == '\\') out += '\\';
                    else fail("unsupported escape");
                    ++pos;
                } else {
                    if (peek() == '\n') fail("newline in string");
                    out += peek();
                    ++pos;
                }
            }
            if (eof()) fail("unterminated string");
            ++pos;
            v.type = Value::Type::String;
            v.s = std::move(out);
            return v;
        }
        if (c == '[') {
            ++pos;
            v.type = Value::Type::Array;
            skip_ws_and_comments();
            if (!eof() && peek() == ']') {
                ++pos;
                return v;
            }
            for (;;) {
                v.array.push_back(parse_value());
                skip_ws_and_comments();
                if (!eof() && peek() == ',') {
                    ++pos;
                    skip_ws_and_comments();
                    if (!eof() && peek() == ']') break; // trailing comma
                    continue;
                }
                break;
            }
            skip_ws_and_comments();
            if (eof() || peek() != ']') fail("expected ']'");
            ++pos;
            return v;
        }
        if (text.compare(pos, 4, "true") == 0) {
            pos += 4;
            v.type = Value::Type::Bool;
            v.b = true;
            return v;
        }
        if (text.compare(pos, 5, "false") == 0) {
            pos += 5;
            v.type = Value::Type::Bool;
            v.b = false;
            return v;
        }
        size_t start = pos;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                          peek() == '-' || peek() == '.'))
            ++pos;
        std::string tok = text.substr(start, pos - start);
        if (tok.empty()) fail("expected a value");
        bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" ||
                        tok == "+inf" || tok == "-inf" || tok == "nan";
        if (!is_float) {
            int64_t out = 0;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                fail("bad integer '" + tok + "'");
            v.type = Value::Type::Int;
            v.i = out;
            return v;
        }
        double out = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            fail("bad number '" + tok + "'");
        v.type = Value::Type::Float;
        v.f = out;
        return v;
    }

    void end_of_line() {
        skip_inline_ws();
        if (!eof() && peek() == '#')
            while (!eof() && peek() != '\n') ++pos;
        if (eof()) return;
        if (peek() == '\r') ++pos;
        if (eof()) return;
        if (peek() != '\n') fail("unexpected trailing characters");
        ++line;
        ++pos;
    }

    Table* descend(Table& root, const std::vector<std::string>& path, bool array_of_tables) {
        Table* cur = &root;
        for (size_t k = 0; k < path.size(); ++k) {
            const std::string& name = path[k];
            bool last = k + 1 == path.size();
            auto it = cur->find(name);
            if (last && array_of_tables) {
                if (it == cur->end()) {
                    Value v;
                    v.type = Value::Type::Array;
                    it = cur->emplace(name, std::move(v)).first;
                }
                if (it->second.type != Value::Type::Array) fail("'" + name + "' is not an array");
                Value entry;
                entry.type = Value::Type::Table;
                entry.table = std::make_shared<Table>();
                it->second.array.push_back(std::move(entry));
                return it->second.array.back().table.get();
            }
            if (it == cur->end()) {
                Value v;
                v.type = Value::Type::Table;
                v.table = std::make_shared<Table>();
                it = cur->emplace(name, std::move(v)).first;
            }
            if (it->second.type == Value::Type::Table) {
                cur = it->second.table.get();
            } else if (it->second.type == Value::Type::Array && !it->second.array.empty() &&
                       it->second.array.back().is_table()) {
                cur = it->second.array.back().table.get();
            } else {
                fail("'" + name + "' is not a table");
            }
        }
        return cur;
    }

    Table parse_document() {
        Table root;
        Table* current = &root;
        for (;;) {
            skip_ws_and_comments();
            if (eof()) break;
            if (peek() == '[') {
                ++pos;
                bool aot = false;
                if (!eof() && peek() == '[') {
                    aot = true;
                    ++pos;
                }
                skip_inline_ws();
                auto path = dotted_key();
                skip_inline_ws();
                if (eof() || peek() != ']') fail("expected ']'");
                ++pos;
                if (aot) {
                    if (eof() || peek() != ']') fail("expected ']]'");
                    ++pos;
                }
                current = descend(root, path, aot);
                end_of_line();
                continue;
            }
            std::string key = bare_key();
            skip_inline_ws();
            if (eof() || peek() != '=') fail("expected '=' after key '" + key + "'");
            ++pos;
            Value v = parse_value();
            if (current->count(key)) fail("duplicate key '" + key + "'");
            current->emplace(std::move(key), std::move(v));
            end_of_line();
        }
        return root;
    }
};

} // namespace

Table parse(const std::string& text) {
    Parser p(text);
    return p.parse_document();
}

} // namespace twistlab::toml
