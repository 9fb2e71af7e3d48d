#include "liemidpoint/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "liemidpoint/errors.hpp"
#include "liemidpoint/format.hpp"

namespace lmp::toml {

namespace {

using nlohmann::json;

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    json run() {
        root_ = json::object();
        current_ = &root_;
        while (!at_end()) {
            skip_ws_and_comments();
            if (at_end()) break;
            if (peek() == '[') {
                parse_header();
            } else {
                parse_key_value(*current_);
            }
            expect_line_end();
        }
        return root_;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "TOML parse error at line " << line_ << ": " << msg;
        throw ConfigError(os.str());
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    char take() {
        const char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    void skip_spaces() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        while (!at_end() && peek() != '\n') ++pos_;
    }

    void skip_ws_and_comments() {
        for (;;) {
            skip_spaces();
            if (at_end()) return;
            if (peek() == '#') {
                skip_comment();
                continue;
            }
            if (peek() == '\n' || peek() == '\r') {
                take();
                continue;
            }
            return;
        }
    }

    void expect_line_end() {
        skip_spaces();
        if (at_end()) return;
        if (peek() == '#') skip_comment();
        if (at_end()) return;
        if (peek() == '\r') take();
        if (at_end()) return;
        if (peek() != '\n') fail("expected end of line");
        take();
    }

    static bool is_bare_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::string parse_key() {
        skip_spaces();
        if (at_end()) fail("expected a key");
        if (peek() == '"') return parse_basic_string();
        std::string key;
        while (!at_end() && is_bare_char(peek())) key += take();
        if (key.empty()) fail("expected a key");
        return key;
    }

    std::vector<std::string> parse_dotted_name() {
        std::vector<std::string> parts;
        parts.push_back(parse_key());
        skip_spaces();
        while (!at_end() && peek() == '.') {
            take();
            parts.push_back(parse_key());
            skip_spaces();
        }
        return parts;
    }

    void parse_header() {
        take(); // '['
        const bool array_of_tables = !at_end() && peek() == '[';
        if (array_of_tables) take();
        const std::vector<std::string> parts = parse_dotted_name();
        if (at_end() || take() != ']') fail("unterminated table header");
        if (array_of_tables && (at_end() || take() != ']')) fail("expected ']]'");

        json* node = &root_;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const bool last = i + 1 == parts.size();
            json& slot = (*node)[parts[i]];
            if (last && array_of_tables) {
                if (slot.is_null()) slot = json::array();
                if (!slot.is_array()) fail("'" + parts[i] + "' is not an array of tables");
                slot.push_back(json::object());
                node = &slot.back();
            } else {
                if (slot.is_null()) slot = json::object();
                if (slot.is_array()) {
                    if (slot.empty() || !slot.back().is_object()) {
                        fail("'" + parts[i] + "' is not a table");
                    }
                    node = &slot.back();
                } else if (slot.is_object()) {
                    node = &slot;
                } else {
                    fail("'" + parts[i] + "' is already a value");
                }
            }
        }
        current_ = node;
    }

    void parse_key_value(json& table) {
        const std::string key = parse_key();
        skip_spaces();
        if (!at_end() && peek() == '.') fail("dotted keys are not supported");
        if (at_end() || take() != '=') fail("expected '=' after key '" + key + "'");
        skip_spaces();
        if (table.contains(key)) fail("duplicate key '" + key + "'");
        table[key] = parse_value();
    }

    json parse_value() {
        skip_spaces();
        if (at_end()) fail("expected a value");
        const char c = peek();
        if (c == '"') return parse_basic_string();
        if (c == '[') return parse_array();
        if (c == '{') fail("inline tables are not supported");
        if (c == '\'') fail("literal strings are not supported");
        return parse_scalar();
    }

    std::string parse_basic_string() {
        take(); // opening quote
        std::string out;
        while (!at_end()) {
            char c = take();
            if (c == '"') return out;
            if (c == '\n') fail("unterminated string");
            if (c == '\\') {
                if (at_end()) fail("dangling escape");
                const char esc = take();
                switch (esc) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    default: fail(std::string("unsupported escape '\\") + esc + "'");
                }
            } else {
                out += c;
            }
        }
        fail("unterminated string");
    }

    json parse_array() {
        take(); // '['
        json arr = json::array();
        for (;;) {
            skip_ws_and_comments();
            if (at_end()) fail("unterminated array");
            if (peek() == ']') {
                take();
                return arr;
            }
            arr.push_back(parse_value());
            skip_ws_and_comments();
            if (at_end()) fail("unterminated array");
            if (peek() == ',') {
                take();
                continue;
            }
            if (peek() == ']') {
                take();
                return arr;
            }
            fail("expected ',' or ']' in array");
        }
    }

    json parse_scalar() {
        std::string tok;
        while (!at_end() && peek() != '\n' && peek() != '\r' && peek() != ',' && peek() != ']' &&
               peek() != '#' && peek() != ' ' && peek() != '\t') {
            tok += take();
        }
        if (tok == "true") return true;
        if (tok == "false") return false;
        if (tok.empty()) fail("expected a value");

        std::string digits;
        digits.reserve(tok.size());
        for (char c : tok) {
            if (c == '_') continue; // TOML digit separators
            digits += c;
        }
        const bool looks_float = digits.find_first_of(".eE") != std::string::npos;
        if (!looks_float) {
            long long iv = 0;
            const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), iv);
            if (res.ec == std::errc() && res.ptr == digits.data() + digits.size()) return iv;
        }
        double dv = 0.0;
        const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), dv);
        if (res.ec == std::errc() && res.ptr == digits.data() + digits.size() &&
            std::isfinite(dv)) {
            return dv;
        }
        fail("cannot parse value '" + tok + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    json root_;
    json* current_ = nullptr;
};

bool is_table_array(const json& v) {
    return v.is_array() && !v.empty() && v.front().is_object();
}

std::string escape(const std::string& s) {
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
    out += '"';
    return out;
}

std::string value_text(const json& v) {
    if (v.is_string()) return escape(v.get<std::string>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number_float()) {
        std::string s = format_double(v.get<double>());
        if (s.find_first_of(".eE") == std::string::npos) s += ".0";
        return s;
    }
    if (v.is_array()) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ", ";
            out += value_text(v[i]);
        }
        out += ']';
        return out;
    }
    throw ConfigError("TOML serialize: unsupported value type " + std::string(v.type_name()));
}

void emit_table(const json& obj, const std::string& prefix, std::ostream& os) {
    for (const auto& [key, value] : obj.items()) {
        if (value.is_object() || is_table_array(value)) continue;
        os << key << " = " << value_text(value) << '\n';
    }
    for (const auto& [key, value] : obj.items()) {
        const std::string name = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) {
            os << "\n[" << name << "]\n";
            emit_table(value, name, os);
        } else if (is_table_array(value)) {
            for (const auto& element : value) {
                if (!element.is_object()) {
                    throw ConfigError("TOML serialize: mixed array of tables under " + name);
                }
                os << "\n[[" << name << "]]\n";
                emit_table(element, name, os);
            }
        }
    }
}

} // namespace

nlohmann::json parse(const std::string& text) { return Parser(text).run(); }

std::string serialize(const nlohmann::json& value) {
    if (!value.is_object()) throw ConfigError("TOML serialize: document root must be a table");
    std::ostringstream os;
    emit_table(value, "", os);
    return os.str();
}

} // namespace lmp::toml
