#include "ebike/agents.hpp"

#include "ebike/errors.hpp"

#include "default_config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace ebike::agents {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string strip_decoration(std::string_view s) {
    constexpr std::string_view kJunk = " \t\r\n\"'`.,;:*-";
    const auto b = s.find_first_not_of(kJunk);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(kJunk);
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_word_char(c)) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

const std::string& no_info() {
    static const std::string s(kNoInformation);
    return s;
}

}  // namespace

std::optional<EbikeLabel> parse_yes_no(std::string_view reply) {
    const auto w = words(reply);
    if (w.empty()) return std::nullopt;
    if (w.front() == "yes") return EbikeLabel::Yes;
    if (w.front() == "no") return EbikeLabel::No;
    const bool yes = std::find(w.begin(), w.end(), "yes") != w.end();
    const bool no = std::find(w.begin(), w.end(), "no") != w.end();
    if (yes != no) return yes ? EbikeLabel::Yes : EbikeLabel::No;
    return std::nullopt;
}

std::optional<std::string> parse_free_text(std::string_view reply) {
    if (text::icontains(reply, "no certain information")) return no_info();
    std::string s = strip_decoration(reply);
    if (s.empty()) return std::nullopt;
    return s;
}

std::vector<std::string> parse_list(std::string_view reply) {
    std::string flat(reply);
    std::replace_if(flat.begin(), flat.end(), [](char c) { return c == ';' || c == '\n'; }, ',');
    std::vector<std::string> out;
    for (const auto& part : text::split(flat, ',')) {
        std::string item = strip_decoration(part);
        if (!item.empty()) out.push_back(std::move(item));
    }
    return out;
}

// ---------------------------------------------------------------------------

PromptSet PromptSet::defaults() {
    PromptSet p;
    for (const auto& [name, body] : ebike::defaults::kPrompts) {
        std::string b(body);
        while (!b.empty() && std::isspace(static_cast<unsigned char>(b.back()))) b.pop_back();
        p.templates_.emplace(std::string(name), std::move(b));
    }
    return p;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir.string());
    PromptSet p = defaults();
    for (auto& [name, body] : p.templates_) {
        const auto file = dir / (name + ".txt");
        if (!std::filesystem::exists(file)) continue;
        std::ifstream in(file, std::ios::binary);
        if (!in) throw ConfigError("cannot read prompt " + file.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        body = ss.str();
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.pop_back();
    }
    return p;
}

std::string PromptSet::render(const std::string& name, const std::map<std::string, std::string>& vars) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("unknown prompt template: " + name);
    const std::string& t = it->second;
    std::string out;
    out.reserve(t.size() + 256);
    // Single pass over the template so substituted text is never rescanned.
    for (std::size_t i = 0; i < t.size();) {
        if (t[i] == '{') {
            const auto close = t.find('}', i + 1);
            if (close != std::string::npos) {
                const std::string key = t.substr(i + 1, close - i - 1);
                const bool ident = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
                    return std::islower(static_cast<unsigned char>(c)) || c == '_';
                });
                if (ident) {
                    auto v = vars.find(key);
                    if (v == vars.end()) throw ConfigError("prompt " + name + " has unfilled placeholder {" + key + "}");
                    out += v->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += t[i++];
    }
    return out;
}

// ---------------------------------------------------------------------------

LlmBackend::LlmBackend(llm::Gateway& gateway, PromptSet prompts, LlmSettings settings, const rules::RuleSet& rules)
    : gateway_(gateway), prompts_(std::move(prompts)), settings_(std::move(settings)), keywords_(rules) {}

std::string LlmBackend::ask(const std::string& prompt) {
    llm::CompletionRequest req{prompt, settings_.model_name, settings_.temperature, settings_.max_tokens};
    return gateway_.complete(req).text;
}

EbikeLabel LlmBackend::ask_yes_no(const std::string& prompt, std::string_view what) {
    if (auto v = parse_yes_no(ask(prompt))) return *v;
    const std::string strict = prompt + "\nReply with exactly one word: yes or no.";
    const std::string reply = ask(strict);
    if (auto v = parse_yes_no(reply)) return *v;
    throw ExtractionError("unparseable " + std::string(what) + " reply: " + reply.substr(0, 80));
}

std::string LlmBackend::ask_free_text(const std::string& prompt, std::string_view what) {
    if (auto v = parse_free_text(ask(prompt))) return *v;
    const std::string strict = prompt + "\nReply with a short phrase only, or exactly: " + no_info() + ".";
    const std::string reply = ask(strict);
    if (auto v = parse_free_text(reply)) return *v;
    throw ExtractionError("unparseable " + std::string(what) + " reply: " + reply.substr(0, 80));
}

EbikeLabel LlmBackend::classify(std::string_view narrative) {
    return ask_yes_no(prompts_.render("classify", {{"narrative", std::string(narrative)}}), "classification");
}

ExtractedFactors LlmBackend::extract(std::string_view narrative) {
    const std::map<std::string, std::string> vars{{"narrative", std::string(narrative)}};
    ExtractedFactors f;
    const std::string modes = ask_free_text(prompts_.render("modes", vars), "modes");
    if (modes != no_info()) f.modes = parse_list(modes);
    f.modes_count = static_cast<int>(f.modes.size());
    f.time_raw = ask_free_text(prompts_.render("time", vars), "time");
    f.weather_raw = ask_free_text(prompts_.render("weather", vars), "weather");
    f.road_raw = ask_free_text(prompts_.render("road", vars), "road");
    f.cause_raw = ask_free_text(prompts_.render("cause", vars), "cause");
    return f;
}

CauseDetermination LlmBackend::cause(std::string_view narrative, const ExtractedFactors& factors) {
    std::string labels;
    for (std::size_t i = 0; i < kCauseCount; ++i) {
        if (i) labels += ", ";
        labels += cause_name(static_cast<CauseLabel>(i));
    }
    const std::string prompt = prompts_.render(
        "cause_type", {{"narrative", std::string(narrative)}, {"cause", factors.cause_raw}, {"cause_labels", labels}});
    const std::string reply = ask_free_text(prompt, "cause");

    const auto& cb = keywords_.codebook();
    CauseDetermination d;
    bool said_unclear = false;
    for (const auto& item : parse_list(reply)) {
        if (text::iequals(item, "unclear") || item == no_info()) {
            said_unclear = true;
            continue;
        }
        const auto m = cb.map_cause(item);
        if (m.label != CauseLabel::Unclear) d.matched.push_back(m.label);
    }
    // A reply outside the vocabulary falls back to the extracted cause phrase.
    if (d.matched.empty() && !said_unclear && factors.cause_raw != no_info()) {
        const auto m = cb.map_cause(factors.cause_raw);
        if (m.label != CauseLabel::Unclear) d.matched.push_back(m.label);
    }
    std::sort(d.matched.begin(), d.matched.end());
    d.matched.erase(std::unique(d.matched.begin(), d.matched.end()), d.matched.end());
    d.cause_label = d.matched.empty() ? CauseLabel::Unclear : d.matched.front();
    d.cause_type = codebook::combine_cause_types(d.matched);
    return d;
}

ComponentLinkage LlmBackend::components(std::string_view narrative) {
    ComponentLinkage links;
    links.related = keywords_.components(narrative).related;
    for (auto c : links.related) {
        std::string name = text::to_lower(component_name(c));
        const std::string prompt =
            prompts_.render("component_caused", {{"component", name}, {"narrative", std::string(narrative)}});
        if (ask_yes_no(prompt, "component") == EbikeLabel::Yes) links.caused_by.push_back(c);
    }
    return links;
}

}  // namespace ebike::agents
