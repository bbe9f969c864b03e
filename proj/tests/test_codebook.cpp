#include "ebike/codebook.hpp"
#include "ebike/errors.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

using namespace ebike;
using namespace ebike::codebook;

namespace {

int age_oracle(int a) { return a < 15 ? 1 : a < 25 ? 2 : a < 65 ? 3 : 4; }

StructuredIncident ebike_record(const std::string& cause_raw, CauseType type) {
    StructuredIncident s;
    s.record_id = "r";
    s.is_ebike = true;
    s.factors = ExtractedFactors{{"electric bicycle"}, 1, "night", "clear", "dry", cause_raw};
    s.cause = CauseDetermination{CauseLabel::Unclear, type, {}};
    s.links = ComponentLinkage{};
    return s;
}

IncidentReport report(std::optional<int> age, const std::string& gender, int severity) {
    IncidentReport r;
    r.record_id = "r";
    r.age_years = age;
    r.gender_raw = gender;
    r.severity_code = severity;
    return r;
}

}  // namespace

TEST_CASE("age bins at every boundary") {
    CHECK(bin_age(14) == 1);
    CHECK(bin_age(15) == 2);
    CHECK(bin_age(24) == 2);
    CHECK(bin_age(25) == 3);
    CHECK(bin_age(64) == 3);
    CHECK(bin_age(65) == 4);
    CHECK(bin_age(0) == 1);
    for (int a = 0; a <= 130; ++a) CHECK(bin_age(a) == age_oracle(a));
    CHECK_THROWS_AS(bin_age(-1), DomainError);
    CHECK(age_group_name(1) == "Children");
    CHECK(age_group_name(4) == "Seniors");
    CHECK_THROWS_AS(age_group_name(5), DomainError);
}

TEST_CASE("condition coding table") {
    const auto& cb = Codebook::defaults();
    struct Row {
        const char* kind;
        const char* raw;
        int code;
    };
    const Row rows[] = {
        {"weather", "rain", 2},       {"weather", "Rainy", 2},   {"weather", "heavy snow", 2},
        {"weather", "foggy", 2},      {"weather", "FOG", 2},     {"weather", "thunderstorm", 2},
        {"weather", "clear", 1},      {"weather", "sunny", 1},   {"weather", "", 1},
        {"road", "wet", 2},           {"road", "icy", 2},        {"road", "WET pavement", 2},
        {"road", "pothole", 2},       {"road", "gravel", 2},     {"road", "dry", 1},
        {"road", "paved", 1},         {"road", "rain", 1},       {"time", "evening", 2},
        {"time", "night", 2},         {"time", "midnight", 2},   {"time", "at dusk", 2},
        {"time", "Late at Night", 2}, {"time", "afternoon", 1},  {"time", "morning", 1},
        {"time", "noon", 1},          {"time", "unknown", 1},    {"weather", "unspecified", 1},
        {"road", "unspecified", 1},   {"time", "unspecified", 1},
    };
    for (const auto& r : rows) {
        CAPTURE(r.kind);
        CAPTURE(r.raw);
        CHECK(static_cast<int>(cb.code_condition(r.kind, r.raw)) == r.code);
    }
}

TEST_CASE("absent information codes favorable for every kind") {
    const auto& cb = Codebook::defaults();
    for (auto kind : {ConditionKind::Weather, ConditionKind::Road, ConditionKind::Time}) {
        CHECK(cb.code_condition(kind, kNoInformation) == BinaryCondition::Favorable);
        CHECK(cb.code_condition(kind, "") == BinaryCondition::Favorable);
    }
    CHECK(parse_condition_kind(" Weather ") == ConditionKind::Weather);
    CHECK_THROWS_AS(parse_condition_kind("humidity"), DomainError);
    CHECK_THROWS_AS(cb.code_condition("humidity", "rain"), DomainError);
}

TEST_CASE("adverse vocabulary words code adverse wherever they appear (property)") {
    const auto& cb = Codebook::defaults();
    const auto& r = rules::RuleSet::defaults();
    oracle::Gen g(17);
    const std::pair<ConditionKind, const std::vector<std::string>*> kinds[] = {
        {ConditionKind::Weather, &r.adverse_weather},
        {ConditionKind::Road, &r.adverse_road},
        {ConditionKind::Time, &r.adverse_time},
    };
    for (const auto& [kind, words] : kinds) {
        for (const auto& w : *words) {
            for (int i = 0; i < 20; ++i) {
                std::string upper = w;
                for (auto& c : upper)
                    if (g.coin()) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                const std::string raw = g.word(0, 5) + " " + upper + " " + g.word(0, 5);
                CHECK(cb.code_condition(kind, raw) == BinaryCondition::Adverse);
            }
        }
    }
}

TEST_CASE("cause type codes and combination") {
    CHECK(cause_type_code(CauseType::HumanRelated) == 1);
    CHECK(cause_type_code(CauseType::EquipmentRelated) == 2);
    CHECK(cause_type_code(CauseType::Both) == 3);
    CHECK_FALSE(cause_type_code(CauseType::Unclear));
    CHECK(combine_cause_types({}) == CauseType::Unclear);
    CHECK(combine_cause_types({CauseLabel::Speeding}) == CauseType::HumanRelated);
    CHECK(combine_cause_types({CauseLabel::Fire, CauseLabel::BatteryIssue}) == CauseType::EquipmentRelated);
    CHECK(combine_cause_types({CauseLabel::FallOff, CauseLabel::BrakeIssue}) == CauseType::Both);
    CHECK(combine_cause_types({CauseLabel::Unclear}) == CauseType::Unclear);
}

TEST_CASE("map_cause canonicalizes free text") {
    const auto& cb = Codebook::defaults();
    CHECK(cb.map_cause("crash") == CauseMapping{CauseLabel::CollisionOrCrash, 1});
    CHECK(cb.map_cause("Collision or Crash") == CauseMapping{CauseLabel::CollisionOrCrash, 1});
    CHECK(cb.map_cause("battery_issue") == CauseMapping{CauseLabel::BatteryIssue, 2});
    CHECK(cb.map_cause("the battery overheated") == CauseMapping{CauseLabel::BatteryIssue, 2});
    CHECK(cb.map_cause("ran a red light and crashed") == CauseMapping{CauseLabel::BreakTrafficRules, 1});
    CHECK(cb.map_cause("flat tire") == CauseMapping{CauseLabel::WheelTireIssue, 2});
    CHECK(cb.map_cause("brake failure") == CauseMapping{CauseLabel::BrakeIssue, 2});
    CHECK(cb.map_cause("sudden acceleration") == CauseMapping{CauseLabel::EquipmentMalfunction, 2});
    CHECK(cb.map_cause("design flaw") == CauseMapping{CauseLabel::DesignDefect, 2});
    CHECK(cb.map_cause("faulty") == CauseMapping{CauseLabel::DefectiveParts, 2});
    CHECK(cb.map_cause("without a helmet") == CauseMapping{CauseLabel::NoHelmet, 1});
    CHECK(cb.map_cause("excessive speed") == CauseMapping{CauseLabel::Speeding, 1});
    CHECK(cb.map_cause("lost control") == CauseMapping{CauseLabel::LostControl, 1});
    CHECK(cb.map_cause("thrown from") == CauseMapping{CauseLabel::FallOff, 1});
    CHECK(cb.map_cause("handlebar problem") == CauseMapping{CauseLabel::HandlebarIssue, 2});
    CHECK(cb.map_cause("pedal issue") == CauseMapping{CauseLabel::PedalIssue, 2});
    CHECK(cb.map_cause("caught fire") == CauseMapping{CauseLabel::Fire, 2});
    CHECK(cb.map_cause("unknown") == CauseMapping{});
    CHECK(cb.map_cause(kNoInformation) == CauseMapping{});
    CHECK(cb.map_cause("") == CauseMapping{});
}

TEST_CASE("find_causes reports the earliest surface per cause in table order") {
    const auto& cb = Codebook::defaults();
    const auto hits = cb.find_causes("He lost control, crashed, then crashed again and the battery burned");
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].label == CauseLabel::CollisionOrCrash);
    CHECK(hits[0].surface == "crashed");
    CHECK(hits[1].label == CauseLabel::LostControl);
    CHECK(hits[1].surface == "lost control");
    CHECK(hits[1].position == 3);
    CHECK(hits[2].label == CauseLabel::BatteryIssue);
}

TEST_CASE("predictor vector composition") {
    const auto& cb = Codebook::defaults();
    auto s = ebike_record("crash", CauseType::HumanRelated);
    const auto out = cb.build_predictor_vector(s, report(70, "male", 4));
    REQUIRE(out.vector);
    CHECK(*out.vector == PredictorVector{4, 2, 1, 1, 1, 2, 1});

    s.factors->modes_count = 0;  // the e-bike itself always counts
    s.factors->weather_raw = "snowy";
    s.factors->road_raw = kNoInformation;
    s.cause->cause_type = CauseType::Both;
    const auto out2 = cb.build_predictor_vector(s, report(15, "Female", 1));
    REQUIRE(out2.vector);
    CHECK(*out2.vector == PredictorVector{2, 1, 3, 2, 1, 2, 1});
}

TEST_CASE("unclear cause type falls back to the raw cause phrase") {
    const auto& cb = Codebook::defaults();
    auto s = ebike_record("battery caught fire", CauseType::Unclear);
    const auto out = cb.build_predictor_vector(s, report(30, "Male", 2));
    REQUIRE(out.vector);
    CHECK(out.vector->cause_type_code == 2);
}

TEST_CASE("predictor exclusions carry reasons") {
    const auto& cb = Codebook::defaults();
    const auto ok = ebike_record("crash", CauseType::HumanRelated);
    auto reason = [&](const StructuredIncident& s, const IncidentReport& r) {
        const auto o = cb.build_predictor_vector(s, r);
        CHECK_FALSE(o.vector);
        return o.exclusion_reason;
    };
    StructuredIncident not_ebike;
    CHECK(reason(not_ebike, report(30, "Male", 2)) == "not an e-bike incident");
    auto errored = ok;
    errored.status = RecordStatus::Error;
    CHECK(reason(errored, report(30, "Male", 2)) == "extraction incomplete");
    CHECK(reason(ok, report(30, "Male", -1)) == "undefined severity");
    CHECK(reason(ok, report(std::nullopt, "Male", 2)) == "missing age");
    CHECK(reason(ok, report(30, "Unspecified", 2)) == "unspecified gender");
    CHECK(reason(ebike_record("no idea", CauseType::Unclear), report(30, "Male", 2)) == "unclear cause");
}
