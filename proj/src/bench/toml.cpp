#include "gridcast/bench/toml.hpp"

#include <cctype>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast::bench {

namespace {

using nlohmann::json;

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char next() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("toml line " + std::to_string(line) + ": " + why);
    }

    // Spaces and tabs only.
    void skip_blanks() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
    }

    void skip_comment() {
        if (!eof() && peek() == '#')
            while (!eof() && peek() != '\n') ++pos;
    }

    // Whitespace, comments, and newlines — between top-level statements and
    // inside arrays.
    void skip_filler() {
        for (;;) {
            skip_blanks();
            skip_comment();
            if (!eof() && peek() == '\n') {
                next();
                continue;
            }
            if (!eof() && peek() == '\r') {
                ++pos;
                continue;
            }
            break;
        }
    }

    // After a header or key/value pair only blanks, a comment, and the line
    // end may follow.
    void expect_line_end() {
        skip_blanks();
        skip_comment();
        if (eof()) return;
        if (peek() == '\r') ++pos;
        if (eof()) return;
        if (peek() != '\n') fail("unexpected text after value");
        next();
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_basic_string(Cursor& cur) {
    cur.next();  // opening quote
    std::string out;
    for (;;) {
        if (cur.eof()) cur.fail("unterminated string");
        char c = cur.next();
        if (c == '"') return out;
        if (c == '\n') cur.fail("newline inside string");
        if (c != '\\') {
            out += c;
            continue;
        }
        if (cur.eof()) cur.fail("dangling escape");
        char esc = cur.next();
        switch (esc) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case 'b': out += '\b'; break;
            case 'f': out += '\f'; break;
            default: cur.fail(std::string("unsupported escape '\\") + esc + "'");
        }
    }
}

std::string parse_literal_string(Cursor& cur) {
    cur.next();  // opening quote
    std::string out;
    for (;;) {
        if (cur.eof()) cur.fail("unterminated string");
        char c = cur.next();
        if (c == '\'') return out;
        if (c == '\n') cur.fail("newline inside string");
        out += c;
    }
}

// One segment of a (possibly dotted) key.
std::string parse_key_segment(Cursor& cur) {
    cur.skip_blanks();
    if (cur.eof()) cur.fail("expected a key");
    if (cur.peek() == '"') return parse_basic_string(cur);
    if (cur.peek() == '\'') return parse_literal_string(cur);
    std::string out;
    while (!cur.eof() && is_bare_key_char(cur.peek())) out += cur.next();
    if (out.empty()) cur.fail("expected a key");
    return out;
}

std::vector<std::string> parse_key_path(Cursor& cur, char terminator) {
    std::vector<std::string> path;
    for (;;) {
        path.push_back(parse_key_segment(cur));
        cur.skip_blanks();
        if (cur.eof()) cur.fail("unterminated key");
        if (cur.peek() == '.') {
            cur.next();
            continue;
        }
        if (cur.peek() == terminator) return path;
        cur.fail(std::string("expected '") + terminator + "' after key");
    }
}

json parse_number(Cursor& cur) {
    std::string raw;
    while (!cur.eof()) {
        char c = cur.peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' ||
            c == 'e' || c == 'E' || c == '_') {
            raw += cur.next();
        } else {
            break;
        }
    }
    if (raw.empty()) cur.fail("expected a value");
    std::string cleaned;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '_') {
            const bool digit_before = i > 0 && std::isdigit(static_cast<unsigned char>(raw[i - 1]));
            const bool digit_after =
                i + 1 < raw.size() && std::isdigit(static_cast<unsigned char>(raw[i + 1]));
            if (!digit_before || !digit_after) cur.fail("misplaced underscore in number");
            continue;
        }
        cleaned += raw[i];
    }
    const bool is_float = cleaned.find_first_of(".eE") != std::string::npos;
    try {
        if (is_float) return json(parse_double(cleaned));
        return json(parse_int(cleaned));
    } catch (const Error&) {
        cur.fail("malformed number '" + raw + "'");
    }
}

json parse_value(Cursor& cur);

json parse_array(Cursor& cur) {
    cur.next();  // '['
    json arr = json::array();
    for (;;) {
        cur.skip_filler();
        if (cur.eof()) cur.fail("unterminated array");
        if (cur.peek() == ']') {
            cur.next();
            return arr;
        }
        arr.push_back(parse_value(cur));
        cur.skip_filler();
        if (cur.eof()) cur.fail("unterminated array");
        if (cur.peek() == ',') {
            cur.next();
            continue;
        }
        if (cur.peek() == ']') {
            cur.next();
            return arr;
        }
        cur.fail("expected ',' or ']' in array");
    }
}

bool starts_with_word(const Cursor& cur, std::string_view word) {
    if (cur.text.size() - cur.pos < word.size()) return false;
    if (cur.text.substr(cur.pos, word.size()) != word) return false;
    const std::size_t after = cur.pos + word.size();
    return after >= cur.text.size() || !is_bare_key_char(cur.text[after]);
}

json parse_value(Cursor& cur) {
    cur.skip_blanks();
    if (cur.eof()) cur.fail("expected a value");
    char c = cur.peek();
    if (c == '"') {
        if (cur.text.substr(cur.pos, 3) == "\"\"\"") cur.fail("multi-line strings not supported");
        return json(parse_basic_string(cur));
    }
    if (c == '\'') {
        if (cur.text.substr(cur.pos, 3) == "'''") cur.fail("multi-line strings not supported");
        return json(parse_literal_string(cur));
    }
    if (c == '[') return parse_array(cur);
    if (c == '{') cur.fail("inline tables not supported");
    if (starts_with_word(cur, "true")) {
        cur.pos += 4;
        return json(true);
    }
    if (starts_with_word(cur, "false")) {
        cur.pos += 5;
        return json(false);
    }
    if (starts_with_word(cur, "inf") || starts_with_word(cur, "nan") ||
        starts_with_word(cur, "+inf") || starts_with_word(cur, "-inf")) {
        cur.fail("non-finite numbers not supported");
    }
    return parse_number(cur);
}

// Walk a dotted path from `node`, creating objects as needed. Descending into
// an array of tables means descending into its last element.
json* descend(json* node, const std::string& key, const Cursor& cur) {
    json& child = (*node)[key];
    if (child.is_null()) child = json::object();
    if (child.is_array()) {
        if (child.empty() || !child.back().is_object())
            cur.fail("key '" + key + "' is not a table");
        return &child.back();
    }
    if (!child.is_object()) cur.fail("key '" + key + "' already holds a value");
    return &child;
}

}  // namespace

json parse_toml(std::string_view text) {
    Cursor cur{text};
    json root = json::object();
    json* current = &root;

    for (;;) {
        cur.skip_filler();
        if (cur.eof()) break;

        if (cur.peek() == '[') {
            cur.next();
            const bool array_header = !cur.eof() && cur.peek() == '[';
            if (array_header) cur.next();

            auto path = parse_key_path(cur, ']');
            cur.next();  // ']'
            if (array_header) {
                if (cur.eof() || cur.peek() != ']') cur.fail("expected ']]'");
                cur.next();
            }

            json* node = &root;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) node = descend(node, path[i], cur);
            json& slot = (*node)[path.back()];
            if (array_header) {
                if (slot.is_null()) slot = json::array();
                if (!slot.is_array()) cur.fail("key '" + path.back() + "' already holds a value");
                slot.push_back(json::object());
                current = &slot.back();
            } else {
                if (slot.is_null()) slot = json::object();
                if (!slot.is_object())
                    cur.fail("table '" + path.back() + "' conflicts with an existing value");
                current = &slot;
            }
            cur.expect_line_end();
            continue;
        }

        auto path = parse_key_path(cur, '=');
        cur.next();  // '='
        json value = parse_value(cur);
        cur.expect_line_end();

        json* node = current;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) node = descend(node, path[i], cur);
        json& slot = (*node)[path.back()];
        if (!slot.is_null()) cur.fail("duplicate key '" + path.back() + "'");
        slot = std::move(value);
    }
    return root;
}

}  // namespace gridcast::bench
