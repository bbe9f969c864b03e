#pragma once

// Rule vocabularies (rules.toml) and the small TOML subset they are written
// in: [tables], bare or quoted keys, and string / integer / boolean /
// string-array values. Arrays may span lines.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ebike::rules {

using Value = std::variant<std::string, std::int64_t, bool, std::vector<std::string>>;

struct Table {
    std::string name;  // "" for the root table
    std::vector<std::pair<std::string, Value>> entries;

    const Value* find(std::string_view key) const;
};

class Document {
public:
    // Throws ConfigError carrying the offending line number.
    static Document parse(std::string_view source);

    const Table* table(std::string_view name) const;
    const std::vector<Table>& tables() const { return tables_; }

private:
    std::vector<Table> tables_;
};

// Ordered canonical label -> patterns.
using Vocabulary = std::vector<std::pair<std::string, std::vector<std::string>>>;

struct RuleSet {
    std::string version;
    std::vector<std::string> ebike_keywords;
    Vocabulary modes;
    std::vector<std::string> ebike_generic_modes;
    Vocabulary time;
    Vocabulary weather;
    Vocabulary road;
    std::vector<std::string> adverse_weather;
    std::vector<std::string> adverse_road;
    std::vector<std::string> adverse_time;
    std::map<std::string, std::vector<std::string>> cause_synonyms;      // by cause key
    std::map<std::string, std::vector<std::string>> component_keywords;  // by component key
    std::map<std::string, std::vector<std::string>> component_excludes;
    std::vector<std::string> failure_verbs;
    std::map<std::string, std::string> component_causes;  // component key -> cause key

    // Validates table presence and that every cause/component key is known.
    static RuleSet from_document(const Document& doc);
    static RuleSet parse(std::string_view source);
    static RuleSet load(const std::filesystem::path& path);
    // The bundled config/rules.toml.
    static const RuleSet& defaults();
};

}  // namespace ebike::rules
