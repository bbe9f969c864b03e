#include "ebike/rules.hpp"

#include "default_config.hpp"
#include "ebike/errors.hpp"
#include "ebike/text.hpp"
#include "ebike/types.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace ebike::rules {

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    void parse(std::vector<Table>& tables) {
        tables.push_back(Table{});
        while (true) {
            skip_blank();
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                skip_inline_space();
                std::string name = peek() == '"' ? read_string() : read_bare();
                skip_inline_space();
                expect(']');
                for (const auto& t : tables) {
                    if (t.name == name) fail("duplicate table [" + name + "]");
                }
                tables.push_back(Table{name, {}});
            } else {
                std::string key = peek() == '"' ? read_string() : read_bare();
                if (key.empty()) fail("expected key");
                skip_inline_space();
                expect('=');
                skip_inline_space();
                Value v = read_value();
                auto& entries = tables.back().entries;
                for (const auto& [k, _] : entries) {
                    if (k == key) fail("duplicate key '" + key + "'");
                }
                entries.emplace_back(std::move(key), std::move(v));
            }
            skip_inline_space();
            if (!eof() && peek() == '#') skip_comment();
            if (!eof() && peek() != '\n' && peek() != '\r') fail("unexpected trailing characters");
        }
    }

private:
    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }

    [[noreturn]] void fail(const std::string& msg) const {
        std::size_t line = 1;
        for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
            if (src_[i] == '\n') ++line;
        }
        throw ConfigError("rules: line " + std::to_string(line) + ": " + msg);
    }

    void expect(char c) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_comment() {
        while (!eof() && peek() != '\n') ++pos_;
    }

    void skip_inline_space() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    // Whitespace, newlines and comments.
    void skip_blank() {
        while (!eof()) {
            const char c = peek();
            if (c == '#') {
                skip_comment();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string read_bare() {
        const std::size_t start = pos_;
        while (!eof()) {
            const char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
                ++pos_;
            } else {
                break;
            }
        }
        return std::string(src_.substr(start, pos_ - start));
    }

    std::string read_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = src_[pos_++];
            if (c == '"') break;
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                const char e = src_[pos_++];
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out.push_back(c);
            }
        }
        return out;
    }

    Value read_value() {
        if (eof()) fail("expected value");
        const char c = peek();
        if (c == '"') return read_string();
        if (c == '[') {
            ++pos_;
            std::vector<std::string> items;
            while (true) {
                skip_blank();
                if (eof()) fail("unterminated array");
                if (peek() == ']') {
                    ++pos_;
                    break;
                }
                if (peek() != '"') fail("arrays may only hold strings");
                items.push_back(read_string());
                skip_blank();
                if (!eof() && peek() == ',') {
                    ++pos_;
                } else if (!eof() && peek() != ']') {
                    fail("expected ',' or ']'");
                }
            }
            return items;
        }
        std::string word = read_bare();
        if (word == "true") return true;
        if (word == "false") return false;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(word, &used);
            if (used == word.size()) return static_cast<std::int64_t>(v);
        } catch (const std::exception&) {
        }
        fail("unsupported value '" + word + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

const Table& require_table(const Document& doc, std::string_view name) {
    const Table* t = doc.table(name);
    if (!t) throw ConfigError("rules: missing table [" + std::string(name) + "]");
    return *t;
}

std::vector<std::string> as_list(const Value& v, std::string_view where) {
    if (const auto* list = std::get_if<std::vector<std::string>>(&v)) return *list;
    throw ConfigError("rules: " + std::string(where) + " must be a string array");
}

std::vector<std::string> require_list(const Document& doc, std::string_view table, std::string_view key) {
    const Value* v = require_table(doc, table).find(key);
    const std::string where = "[" + std::string(table) + "]." + std::string(key);
    if (!v) throw ConfigError("rules: missing " + where);
    return as_list(*v, where);
}

Vocabulary vocabulary(const Document& doc, std::string_view table) {
    Vocabulary out;
    for (const auto& [key, value] : require_table(doc, table).entries) {
        out.emplace_back(key, as_list(value, "[" + std::string(table) + "]." + key));
    }
    if (out.empty()) throw ConfigError("rules: table [" + std::string(table) + "] is empty");
    return out;
}

bool known_cause_key(std::string_view key) {
    auto c = parse_cause_exact(key);
    return c && *c != CauseLabel::Unclear && cause_key(*c) == key;
}

bool known_component_key(std::string_view key) {
    auto c = parse_component(key);
    return c && component_key(*c) == key;
}

std::map<std::string, std::vector<std::string>> keyed_lists(const Document& doc, std::string_view table,
                                                            bool (*known)(std::string_view), bool required) {
    std::map<std::string, std::vector<std::string>> out;
    const Table* t = doc.table(table);
    if (!t) {
        if (required) throw ConfigError("rules: missing table [" + std::string(table) + "]");
        return out;
    }
    for (const auto& [key, value] : t->entries) {
        if (!known(key)) throw ConfigError("rules: unknown key '" + key + "' in [" + std::string(table) + "]");
        out[key] = as_list(value, "[" + std::string(table) + "]." + key);
    }
    return out;
}

}  // namespace

const Value* Table::find(std::string_view key) const {
    for (const auto& [k, v] : entries) {
        if (k == key) return &v;
    }
    return nullptr;
}

Document Document::parse(std::string_view source) {
    Document doc;
    Parser(source).parse(doc.tables_);
    return doc;
}

const Table* Document::table(std::string_view name) const {
    for (const auto& t : tables_) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

RuleSet RuleSet::from_document(const Document& doc) {
    RuleSet rs;
    if (const Value* v = require_table(doc, "").find("version")) {
        if (const auto* s = std::get_if<std::string>(v)) rs.version = *s;
    }
    rs.ebike_keywords = require_list(doc, "ebike", "keywords");
    rs.modes = vocabulary(doc, "modes");
    if (const Table* t = doc.table("mode_rules")) {
        if (const Value* v = t->find("ebike_generic")) rs.ebike_generic_modes = as_list(*v, "[mode_rules].ebike_generic");
    }
    rs.time = vocabulary(doc, "time");
    rs.weather = vocabulary(doc, "weather");
    rs.road = vocabulary(doc, "road");
    rs.adverse_weather = require_list(doc, "adverse", "weather");
    rs.adverse_road = require_list(doc, "adverse", "road");
    rs.adverse_time = require_list(doc, "adverse", "time");
    rs.cause_synonyms = keyed_lists(doc, "causes", known_cause_key, true);
    rs.component_keywords = keyed_lists(doc, "components", known_component_key, true);
    rs.component_excludes = keyed_lists(doc, "component_excludes", known_component_key, false);
    rs.failure_verbs = require_list(doc, "failure", "verbs");
    if (const Table* t = doc.table("component_causes")) {
        for (const auto& [key, value] : t->entries) {
            const auto* cause = std::get_if<std::string>(&value);
            if (!known_component_key(key) || !cause || !known_cause_key(*cause)) {
                throw ConfigError("rules: bad [component_causes] entry '" + key + "'");
            }
            rs.component_causes[key] = *cause;
        }
    }
    return rs;
}

RuleSet RuleSet::parse(std::string_view source) {
    return from_document(Document::parse(source));
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read rules file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const RuleSet& RuleSet::defaults() {
    static const RuleSet rs = parse(defaults::kRulesToml);
    return rs;
}

}  // namespace ebike::rules
