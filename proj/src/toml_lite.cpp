#include "reflectforge/toml_lite.hpp"

#include "reflectforge/errors.hpp"

#include <cctype>
#include <cstdlib>

namespace reflectforge::toml_lite {

std::string Value::as_string(const std::string& key) const {
    if (kind != Kind::string_) throw ConfigError(key + ": expected a string");
    return str;
}

long long Value::as_int(const std::string& key) const {
    if (kind != Kind::integer) throw ConfigError(key + ": expected an integer");
    return int_v;
}

double Value::as_double(const std::string& key) const {
    if (kind == Kind::real) return real_v;
    if (kind == Kind::integer) return static_cast<double>(int_v);
    throw ConfigError(key + ": expected a number");
}

bool Value::as_bool(const std::string& key) const {
    if (kind != Kind::boolean) throw ConfigError(key + ": expected true or false");
    return bool_v;
}

std::vector<std::string> Value::as_string_array(const std::string& key) const {
    if (kind != Kind::array) throw ConfigError(key + ": expected an array");
    std::vector<std::string> out;
    for (const auto& item : items) {
        out.push_back(item.as_string(key));
    }
    return out;
}

namespace {

struct Line {
    std::string text;
    std::size_t number;
};

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) {
            in_string = !in_string;
        } else if (c == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string parse_basic_string(const std::string& s, const Line& ln, const std::string& origin,
                               std::size_t& pos) {
    std::string out;
    ++pos;  // opening quote
    while (pos < s.size()) {
        const char c = s[pos];
        if (c == '"') {
            ++pos;
            return out;
        }
        if (c == '\\') {
            if (pos + 1 >= s.size()) fail(origin, ln.number, "dangling escape");
            const char esc = s[++pos];
            switch (esc) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(origin, ln.number, std::string("unsupported escape \\") + esc);
            }
            ++pos;
            continue;
        }
        out += c;
        ++pos;
    }
    fail(origin, ln.number, "unterminated string");
}

Value parse_scalar(const std::string& token, const Line& ln, const std::string& origin) {
    Value v;
    if (token == "true" || token == "false") {
        v.kind = Value::Kind::boolean;
        v.bool_v = token == "true";
        return v;
    }
    bool integer = !token.empty();
    for (std::size_t i = 0; i < token.size(); ++i) {
        const char c = token[i];
        if (i == 0 && (c == '+' || c == '-')) continue;
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            integer = false;
            break;
        }
    }
    if (integer && (token != "+" && token != "-")) {
        v.kind = Value::Kind::integer;
        v.int_v = std::strtoll(token.c_str(), nullptr, 10);
        return v;
    }
    char* end = nullptr;
    const double d = std::strtod(token.c_str(), &end);
    if (end && *end == '\0' && end != token.c_str()) {
        v.kind = Value::Kind::real;
        v.real_v = d;
        return v;
    }
    fail(origin, ln.number, "cannot parse value: " + token);
}

Value parse_value(const std::string& s, const Line& ln, const std::string& origin);

Value parse_array(const std::string& s, const Line& ln, const std::string& origin) {
    Value v;
    v.kind = Value::Kind::array;
    std::size_t pos = 1;  // past '['
    for (;;) {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos >= s.size()) fail(origin, ln.number, "unterminated array");
        if (s[pos] == ']') {
            ++pos;
            break;
        }
        std::string element;
        if (s[pos] == '"') {
            Value item;
            item.kind = Value::Kind::string_;
            item.str = parse_basic_string(s, ln, origin, pos);
            v.items.push_back(std::move(item));
        } else {
            const auto stop = s.find_first_of(",]", pos);
            if (stop == std::string::npos) fail(origin, ln.number, "unterminated array");
            v.items.push_back(parse_scalar(trim(s.substr(pos, stop - pos)), ln, origin));
            pos = stop;
        }
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos < s.size() && s[pos] == ',') {
            ++pos;
            continue;
        }
        if (pos < s.size() && s[pos] == ']') {
            ++pos;
            break;
        }
        fail(origin, ln.number, "expected ',' or ']' in array");
    }
    if (!trim(s.substr(pos)).empty()) {
        fail(origin, ln.number, "trailing characters after array");
    }
    return v;
}

Value parse_value(const std::string& s, const Line& ln, const std::string& origin) {
    if (s.empty()) fail(origin, ln.number, "missing value");
    if (s.front() == '"') {
        std::size_t pos = 0;
        Value v;
        v.kind = Value::Kind::string_;
        v.str = parse_basic_string(s, ln, origin, pos);
        if (!trim(s.substr(pos)).empty()) {
            fail(origin, ln.number, "trailing characters after string");
        }
        return v;
    }
    if (s.front() == '[') {
        return parse_array(s, ln, origin);
    }
    return parse_scalar(s, ln, origin);
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') {
            return false;
        }
    }
    return true;
}

}  // namespace

Table parse(std::string_view text, const std::string& origin) {
    Table table;
    std::string section;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string raw(nl == std::string_view::npos ? text.substr(start)
                                                     : text.substr(start, nl - start));
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const Line ln{raw, lineno};
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_key(section)) fail(origin, lineno, "invalid section name: " + section);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) fail(origin, lineno, "invalid key: " + key);
        const std::string full = section.empty() ? key : section + "." + key;
        if (table.count(full)) fail(origin, lineno, "duplicate key: " + full);
        table[full] = parse_value(trim(line.substr(eq + 1)), ln, origin);
    }
    return table;
}

std::string escape_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += "\"";
    return out;
}

}  // namespace reflectforge::toml_lite
