#pragma once

// Normalization of extracted strings into the categorical predictor coding
// used by the severity model.
//
//   Age           1 Children (<=14), 2 Youth (15-24), 3 Adults (25-64), 4 Seniors (65+)
//   Gender        1 Female, 2 Male
//   Cause type    1 Human-related, 2 Equipment-related, 3 Both
//   Weather/Road/Time  1 Favorable (including unspecified), 2 Adverse
//   Modes         count of distinct transportation modes, >= 1

#include "ebike/rules.hpp"
#include "ebike/text.hpp"
#include "ebike/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ebike::codebook {

enum class ConditionKind { Weather, Road, Time };
enum class BinaryCondition { Favorable = 1, Adverse = 2 };

// Throws DomainError for negative ages.
int bin_age(int age_years);
std::string_view age_group_name(int age_cat);

// Throws DomainError for anything but weather/road/time.
ConditionKind parse_condition_kind(std::string_view kind);

// 1/2/3 for human/equipment/both; nullopt for Unclear.
std::optional<int> cause_type_code(CauseType t);
CauseType combine_cause_types(const std::vector<CauseLabel>& causes);

struct CauseMapping {
    CauseLabel label = CauseLabel::Unclear;
    std::optional<int> type_code;
    bool operator==(const CauseMapping&) const = default;
};

// One hit per cause with evidence, in canonical cause order. position and
// surface describe the earliest occurrence in the normalized text.
struct CauseHit {
    CauseLabel label;
    std::size_t position;
    std::string surface;
};

struct PredictorOutcome {
    std::optional<PredictorVector> vector;
    std::string exclusion_reason;  // set when vector is empty
};

class Codebook {
public:
    explicit Codebook(const rules::RuleSet& rules);
    static const Codebook& defaults();

    BinaryCondition code_condition(ConditionKind kind, std::string_view raw) const;
    BinaryCondition code_condition(std::string_view kind, std::string_view raw) const;

    // Canonicalizes a free-text cause. When several causes match, the first in
    // canonical order wins. Unmatched text maps to Unclear with no type code.
    CauseMapping map_cause(std::string_view raw_cause) const;

    std::vector<CauseHit> find_causes(std::string_view text) const;

    // Composes the coding steps for a record admitted to modeling; records
    // missing demographics, severity, or a clear cause are excluded with a
    // reason rather than raising.
    PredictorOutcome build_predictor_vector(const StructuredIncident& incident, const IncidentReport& report) const;

private:
    const std::vector<std::string>& adverse(ConditionKind kind) const;

    std::vector<std::string> adverse_weather_;
    std::vector<std::string> adverse_road_;
    std::vector<std::string> adverse_time_;
    std::vector<text::TaggedPattern> cause_patterns_;  // tag = CauseLabel index
};

}  // namespace ebike::codebook
