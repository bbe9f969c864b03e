#include "ebike/agents.hpp"

#include "ebike/errors.hpp"

#include <algorithm>

namespace ebike::agents {

RuleBackend::Vocab RuleBackend::compile(const rules::Vocabulary& v) {
    Vocab out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.labels.push_back(v[i].first);
        for (const auto& p : v[i].second) out.patterns.push_back({text::Pattern(p), i});
    }
    return out;
}

RuleBackend::RuleBackend(const rules::RuleSet& rules)
    : codebook_(rules),
      modes_(compile(rules.modes)),
      time_(compile(rules.time)),
      weather_(compile(rules.weather)),
      road_(compile(rules.road)),
      component_patterns_(kAllComponents.size()),
      component_excludes_(kAllComponents.size()),
      component_cause_(kAllComponents.size()) {
    for (const auto& k : rules.ebike_keywords) ebike_.push_back({text::Pattern(k), 0});

    // The e-bike mode is the one sharing a pattern with the e-bike keywords.
    for (std::size_t i = 0; i < rules.modes.size() && ebike_mode_ == static_cast<std::size_t>(-1); ++i) {
        for (const auto& p : rules.modes[i].second) {
            if (std::find(rules.ebike_keywords.begin(), rules.ebike_keywords.end(), p) != rules.ebike_keywords.end()) {
                ebike_mode_ = i;
                break;
            }
        }
    }
    for (const auto& g : rules.ebike_generic_modes) generic_modes_.emplace_back(g);

    for (auto c : kAllComponents) {
        const auto idx = static_cast<std::size_t>(c);
        const std::string key(component_key(c));
        if (auto it = rules.component_keywords.find(key); it != rules.component_keywords.end()) {
            for (const auto& p : it->second) component_patterns_[idx].push_back({text::Pattern(p), idx});
        }
        if (auto it = rules.component_excludes.find(key); it != rules.component_excludes.end()) {
            for (const auto& p : it->second) component_excludes_[idx].emplace_back(p);
        }
        if (auto it = rules.component_causes.find(key); it != rules.component_causes.end()) {
            component_cause_[idx] = parse_cause_exact(it->second);
        }
    }
    for (const auto& v : rules.failure_verbs) failure_verbs_.push_back({text::Pattern(v), 0});
}

EbikeLabel RuleBackend::classify(std::string_view narrative) {
    const std::string norm = text::normalize(narrative);
    return text::find_all(norm, ebike_).empty() ? EbikeLabel::No : EbikeLabel::Yes;
}

std::string RuleBackend::first_label(const Vocab& vocab, const std::string& normalized) {
    const auto matches = text::resolve_overlaps(text::find_all(normalized, vocab.patterns));
    if (matches.empty()) return std::string(kNoInformation);
    return vocab.labels[matches.front().tag];
}

std::vector<std::string> RuleBackend::find_modes(const std::string& normalized) const {
    const auto matches = text::resolve_overlaps(text::find_all(normalized, modes_.patterns));
    const bool has_ebike = std::any_of(matches.begin(), matches.end(),
                                       [&](const text::Match& m) { return m.tag == ebike_mode_; });
    auto is_generic = [&](const text::Match& m) {
        std::vector<text::TaggedPattern> gp;
        for (const auto& g : generic_modes_) gp.push_back({g, 0});
        for (const auto& hit : text::find_all(m.surface, gp)) {
            if (hit.begin == 0 && hit.end == m.surface.size()) return true;
        }
        return false;
    };
    std::vector<std::string> modes;
    for (const auto& m : matches) {
        if (has_ebike && m.tag != ebike_mode_ && is_generic(m)) continue;
        const std::string& label = modes_.labels[m.tag];
        if (std::find(modes.begin(), modes.end(), label) == modes.end()) modes.push_back(label);
    }
    return modes;
}

ExtractedFactors RuleBackend::extract(std::string_view narrative) {
    const std::string norm = text::normalize(narrative);
    ExtractedFactors f;
    f.modes = find_modes(norm);
    f.modes_count = static_cast<int>(f.modes.size());
    f.time_raw = first_label(time_, norm);
    f.weather_raw = first_label(weather_, norm);
    f.road_raw = first_label(road_, norm);

    const auto hits = codebook_.find_causes(norm);
    if (!hits.empty()) {
        f.cause_raw = hits.front().surface;
    } else if (auto derived = component_causes(components(narrative)); !derived.empty()) {
        f.cause_raw = std::string(cause_name(derived.front()));
    } else {
        f.cause_raw = std::string(kNoInformation);
    }
    return f;
}

std::vector<CauseLabel> RuleBackend::component_causes(const ComponentLinkage& links) const {
    std::vector<CauseLabel> out;
    for (auto c : links.caused_by) {
        if (auto cause = component_cause_[static_cast<std::size_t>(c)]) out.push_back(*cause);
    }
    return out;
}

CauseDetermination RuleBackend::cause(std::string_view narrative, const ExtractedFactors& factors) {
    std::vector<CauseLabel> matched;
    for (const auto& h : codebook_.find_causes(narrative)) matched.push_back(h.label);
    for (auto c : component_causes(components(narrative))) matched.push_back(c);
    if (factors.cause_raw != kNoInformation) {
        const auto mapped = codebook_.map_cause(factors.cause_raw);
        if (mapped.label != CauseLabel::Unclear) matched.push_back(mapped.label);
    }
    std::sort(matched.begin(), matched.end());
    matched.erase(std::unique(matched.begin(), matched.end()), matched.end());

    CauseDetermination d;
    d.matched = matched;
    d.cause_label = matched.empty() ? CauseLabel::Unclear : matched.front();
    d.cause_type = codebook::combine_cause_types(matched);
    return d;
}

ComponentLinkage RuleBackend::components(std::string_view narrative) {
    const std::string norm = text::normalize(narrative);
    const auto failures = text::find_all(norm, failure_verbs_);
    const auto spans = text::sentences(norm);
    auto sentence_of = [&](std::size_t pos) -> std::size_t {
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (pos >= spans[i].begin && pos < spans[i].end) return i;
        }
        return spans.size();
    };

    ComponentLinkage links;
    for (auto c : kAllComponents) {
        const auto idx = static_cast<std::size_t>(c);
        const std::string masked = text::mask(norm, component_excludes_[idx]);
        const auto hits = text::find_all(masked, component_patterns_[idx]);
        if (hits.empty()) continue;
        links.related.push_back(c);
        const bool causal = std::any_of(hits.begin(), hits.end(), [&](const text::Match& h) {
            const auto s = sentence_of(h.begin);
            return std::any_of(failures.begin(), failures.end(),
                               [&](const text::Match& f) { return sentence_of(f.begin) == s; });
        });
        if (causal) links.caused_by.push_back(c);
    }
    return links;
}

}  // namespace ebike::agents
