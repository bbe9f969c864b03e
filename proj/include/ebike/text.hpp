#pragma once

// Case-insensitive phrase matching over free-text narratives.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ebike::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercase and collapse every whitespace run into one space.
std::string normalize(std::string_view s);

bool icontains(std::string_view haystack, std::string_view needle);
bool iequals(std::string_view a, std::string_view b);

std::vector<std::string> split(std::string_view s, char sep);

// A compiled vocabulary pattern. "word" matches a whole word or phrase;
// a trailing '*' ("brak*") allows any letters/digits to follow.
class Pattern {
public:
    explicit Pattern(std::string_view source);

    const std::string& source() const { return source_; }
    const std::string& stem() const { return stem_; }
    bool prefix() const { return prefix_; }

private:
    std::string source_;
    std::string stem_;
    bool prefix_ = false;
};

struct Match {
    std::size_t begin = 0;  // offsets into the normalized text
    std::size_t end = 0;
    std::size_t tag = 0;    // caller-defined label index
    std::string surface;    // matched text (normalized)
};

struct TaggedPattern {
    Pattern pattern;
    std::size_t tag;
};

// All occurrences of all patterns in already-normalized text, without
// overlap resolution, ordered by position.
std::vector<Match> find_all(std::string_view normalized, const std::vector<TaggedPattern>& patterns);

// Greedy longest-first selection of non-overlapping matches, returned in
// text order.
std::vector<Match> resolve_overlaps(std::vector<Match> matches);

// Replace the spans of every pattern occurrence with spaces (offsets stay put).
std::string mask(std::string_view normalized, const std::vector<Pattern>& patterns);

struct Span {
    std::size_t begin;
    std::size_t end;
};

// Sentence spans split on . ! ? ; and newlines.
std::vector<Span> sentences(std::string_view normalized);

}  // namespace ebike::text
