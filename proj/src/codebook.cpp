#include "ebike/codebook.hpp"

#include "ebike/errors.hpp"
#include "ebike/ingest.hpp"

#include <algorithm>

namespace ebike::codebook {

int bin_age(int age_years) {
    if (age_years < 0) throw DomainError("age must be non-negative, got " + std::to_string(age_years));
    if (age_years <= 14) return 1;
    if (age_years <= 24) return 2;
    if (age_years <= 64) return 3;
    return 4;
}

std::string_view age_group_name(int age_cat) {
    switch (age_cat) {
        case 1: return "Children";
        case 2: return "Youth";
        case 3: return "Adults";
        case 4: return "Seniors";
        default: throw DomainError("age category must be 1..4, got " + std::to_string(age_cat));
    }
}

ConditionKind parse_condition_kind(std::string_view kind) {
    const std::string k = text::to_lower(text::trim(kind));
    if (k == "weather") return ConditionKind::Weather;
    if (k == "road") return ConditionKind::Road;
    if (k == "time") return ConditionKind::Time;
    throw DomainError("unknown condition kind '" + std::string(kind) + "'");
}

std::optional<int> cause_type_code(CauseType t) {
    switch (t) {
        case CauseType::HumanRelated: return 1;
        case CauseType::EquipmentRelated: return 2;
        case CauseType::Both: return 3;
        case CauseType::Unclear: return std::nullopt;
    }
    return std::nullopt;
}

CauseType combine_cause_types(const std::vector<CauseLabel>& causes) {
    const bool human = std::any_of(causes.begin(), causes.end(), is_human_cause);
    const bool equipment = std::any_of(causes.begin(), causes.end(), is_equipment_cause);
    if (human && equipment) return CauseType::Both;
    if (human) return CauseType::HumanRelated;
    if (equipment) return CauseType::EquipmentRelated;
    return CauseType::Unclear;
}

Codebook::Codebook(const rules::RuleSet& rules)
    : adverse_weather_(rules.adverse_weather), adverse_road_(rules.adverse_road), adverse_time_(rules.adverse_time) {
    for (std::size_t i = 0; i < kCauseCount; ++i) {
        const auto label = static_cast<CauseLabel>(i);
        auto it = rules.cause_synonyms.find(std::string(cause_key(label)));
        if (it == rules.cause_synonyms.end()) continue;
        for (const auto& p : it->second) cause_patterns_.push_back({text::Pattern(p), i});
    }
}

const Codebook& Codebook::defaults() {
    static const Codebook cb(rules::RuleSet::defaults());
    return cb;
}

const std::vector<std::string>& Codebook::adverse(ConditionKind kind) const {
    switch (kind) {
        case ConditionKind::Weather: return adverse_weather_;
        case ConditionKind::Road: return adverse_road_;
        case ConditionKind::Time: return adverse_time_;
    }
    throw DomainError("unknown condition kind");
}

BinaryCondition Codebook::code_condition(ConditionKind kind, std::string_view raw) const {
    if (text::icontains(raw, kNoInformation)) return BinaryCondition::Favorable;
    for (const auto& word : adverse(kind)) {
        if (text::icontains(raw, word)) return BinaryCondition::Adverse;
    }
    return BinaryCondition::Favorable;
}

BinaryCondition Codebook::code_condition(std::string_view kind, std::string_view raw) const {
    return code_condition(parse_condition_kind(kind), raw);
}

std::vector<CauseHit> Codebook::find_causes(std::string_view raw) const {
    const std::string norm = text::normalize(raw);
    const auto matches = text::resolve_overlaps(text::find_all(norm, cause_patterns_));
    std::vector<CauseHit> hits;
    for (const auto& m : matches) {
        const auto label = static_cast<CauseLabel>(m.tag);
        auto it = std::find_if(hits.begin(), hits.end(), [&](const CauseHit& h) { return h.label == label; });
        if (it == hits.end()) hits.push_back({label, m.begin, m.surface});
    }
    std::sort(hits.begin(), hits.end(), [](const CauseHit& a, const CauseHit& b) { return a.label < b.label; });
    return hits;
}

CauseMapping Codebook::map_cause(std::string_view raw_cause) const {
    CauseLabel label = CauseLabel::Unclear;
    if (auto exact = parse_cause_exact(raw_cause)) {
        label = *exact;
    } else if (auto hits = find_causes(raw_cause); !hits.empty()) {
        label = hits.front().label;
    }
    if (label == CauseLabel::Unclear) return {};
    return {label, is_human_cause(label) ? 1 : 2};
}

PredictorOutcome Codebook::build_predictor_vector(const StructuredIncident& incident,
                                                  const IncidentReport& report) const {
    auto excluded = [](std::string reason) { return PredictorOutcome{std::nullopt, std::move(reason)}; };
    if (!incident.is_ebike) return excluded("not an e-bike incident");
    if (incident.status != RecordStatus::Ok || !incident.factors || !incident.cause) {
        return excluded("extraction incomplete");
    }
    if (report.severity_code == -1) return excluded("undefined severity");
    if (!report.age_years) return excluded("missing age");
    if (*report.age_years < 0) return excluded("negative age");
    if (!ingest::has_defined_gender(report)) return excluded("unspecified gender");

    std::optional<int> type_code = cause_type_code(incident.cause->cause_type);
    if (!type_code) type_code = map_cause(incident.factors->cause_raw).type_code;
    if (!type_code) return excluded("unclear cause");

    const auto& f = *incident.factors;
    PredictorVector v;
    v.age_cat = bin_age(*report.age_years);
    v.gender = text::iequals(report.gender_raw, "female") ? 1 : 2;
    v.cause_type_code = *type_code;
    v.weather = static_cast<int>(code_condition(ConditionKind::Weather, f.weather_raw));
    v.road = static_cast<int>(code_condition(ConditionKind::Road, f.road_raw));
    v.time = static_cast<int>(code_condition(ConditionKind::Time, f.time_raw));
    // An e-bike record always involves at least the e-bike itself.
    v.modes_count = std::max(1, f.modes_count);
    return {v, {}};
}

}  // namespace ebike::codebook
