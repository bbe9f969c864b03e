#include "ebike/text.hpp"

#include <algorithm>
#include <cctype>

namespace ebike::text {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

bool icontains(std::string_view haystack, std::string_view needle) {
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && to_lower(a) == to_lower(b);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

Pattern::Pattern(std::string_view source) : source_(source) {
    std::string stem = normalize(source);
    if (!stem.empty() && stem.back() == '*') {
        prefix_ = true;
        stem.pop_back();
    }
    stem_ = std::move(stem);
}

std::vector<Match> find_all(std::string_view normalized, const std::vector<TaggedPattern>& patterns) {
    std::vector<Match> out;
    for (const auto& tp : patterns) {
        const std::string& stem = tp.pattern.stem();
        if (stem.empty()) continue;
        std::size_t pos = normalized.find(stem);
        while (pos != std::string_view::npos) {
            const bool left_ok = pos == 0 || !is_word_char(normalized[pos - 1]) || !is_word_char(stem.front());
            std::size_t end = pos + stem.size();
            bool right_ok = true;
            if (tp.pattern.prefix()) {
                while (end < normalized.size() && is_word_char(normalized[end])) ++end;
            } else {
                right_ok = end == normalized.size() || !is_word_char(normalized[end]) || !is_word_char(stem.back());
            }
            if (left_ok && right_ok) {
                out.push_back(Match{pos, end, tp.tag, std::string(normalized.substr(pos, end - pos))});
            }
            pos = normalized.find(stem, pos + 1);
        }
    }
    std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
        if (a.begin != b.begin) return a.begin < b.begin;
        if (a.end != b.end) return a.end > b.end;
        return a.tag < b.tag;
    });
    return out;
}

std::vector<Match> resolve_overlaps(std::vector<Match> matches) {
    std::stable_sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
        const auto la = a.end - a.begin;
        const auto lb = b.end - b.begin;
        if (la != lb) return la > lb;
        return a.begin < b.begin;
    });
    std::vector<Match> kept;
    for (auto& m : matches) {
        const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Match& k) {
            return m.begin < k.end && k.begin < m.end;
        });
        if (!overlaps) kept.push_back(std::move(m));
    }
    std::sort(kept.begin(), kept.end(), [](const Match& a, const Match& b) { return a.begin < b.begin; });
    return kept;
}

std::string mask(std::string_view normalized, const std::vector<Pattern>& patterns) {
    std::vector<TaggedPattern> tagged;
    tagged.reserve(patterns.size());
    for (const auto& p : patterns) tagged.push_back({p, 0});
    std::string out(normalized);
    for (const auto& m : find_all(normalized, tagged)) {
        std::fill(out.begin() + static_cast<std::ptrdiff_t>(m.begin),
                  out.begin() + static_cast<std::ptrdiff_t>(m.end), ' ');
    }
    return out;
}

std::vector<Span> sentences(std::string_view normalized) {
    std::vector<Span> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        const char c = normalized[i];
        const bool terminal = c == '!' || c == '?' || c == ';' || c == '\n' ||
                              (c == '.' && (i + 1 == normalized.size() || is_space(normalized[i + 1])));
        if (terminal) {
            if (i > start) out.push_back({start, i});
            start = i + 1;
        }
    }
    if (start < normalized.size()) out.push_back({start, normalized.size()});
    return out;
}

}  // namespace ebike::text
