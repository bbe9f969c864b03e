#pragma once

// Domain records shared across the pipeline stages.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ebike {

// ---------------------------------------------------------------------------
// Raw input
// ---------------------------------------------------------------------------

struct IncidentReport {
    std::string record_id;
    int year = 0;
    std::string state;
    std::string narrative;
    std::optional<int> age_years;
    std::string gender_raw;
    int severity_code = -1;  // -1 undefined, else 1..8

    bool operator==(const IncidentReport&) const = default;
};

// ---------------------------------------------------------------------------
// Mechanical / visibility components
// ---------------------------------------------------------------------------

enum class Component : std::uint8_t {
    BrakeSystem,
    SteeringSystem,
    Pedals,
    DriveSystem,
    WheelTire,
    FrontFork,
    Frame,
    SaddleSeat,
    Visibility,
};

inline constexpr std::array<Component, 9> kAllComponents = {
    Component::BrakeSystem, Component::SteeringSystem, Component::Pedals,
    Component::DriveSystem, Component::WheelTire,      Component::FrontFork,
    Component::Frame,       Component::SaddleSeat,     Component::Visibility,
};

// Display name, e.g. "Brake System".
std::string_view component_name(Component c);
// Config key, e.g. "brake_system".
std::string_view component_key(Component c);
// Accepts display names, config keys, enum identifiers and the row labels
// used in evaluation tables ("Pedal", "Seat", "Drive Belt/Chain", ...).
std::optional<Component> parse_component(std::string_view s);

// ---------------------------------------------------------------------------
// Injury causes, in canonical table order
// ---------------------------------------------------------------------------

enum class CauseLabel : std::uint8_t {
    BreakTrafficRules,
    CollisionOrCrash,
    FallOff,
    LostControl,
    NoHelmet,
    Speeding,
    BatteryIssue,
    BrakeIssue,
    HandlebarIssue,
    PedalIssue,
    WheelTireIssue,
    EquipmentMalfunction,
    DesignDefect,
    DefectiveParts,
    Fire,
    Unclear,
};

inline constexpr std::size_t kCauseCount = 15;  // excludes Unclear

std::string_view cause_name(CauseLabel c);  // "Collision or Crash"
std::string_view cause_key(CauseLabel c);   // "collision_or_crash"
std::optional<CauseLabel> parse_cause_exact(std::string_view s);
bool is_human_cause(CauseLabel c);
bool is_equipment_cause(CauseLabel c);

enum class CauseType : std::uint8_t {
    HumanRelated = 1,
    EquipmentRelated = 2,
    Both = 3,
    Unclear = 0,
};

std::string_view cause_type_name(CauseType t);
std::optional<CauseType> parse_cause_type(std::string_view s);

// ---------------------------------------------------------------------------
// Agent outputs
// ---------------------------------------------------------------------------

inline constexpr std::string_view kNoInformation =
    "There are no certain information mentioned in the incident";

enum class EbikeLabel : std::uint8_t { No, Yes };

struct ExtractedFactors {
    std::vector<std::string> modes;  // deduplicated
    int modes_count = 0;
    std::string time_raw{kNoInformation};
    std::string weather_raw{kNoInformation};
    std::string road_raw{kNoInformation};
    std::string cause_raw{kNoInformation};

    bool operator==(const ExtractedFactors&) const = default;
};

struct CauseDetermination {
    CauseLabel cause_label = CauseLabel::Unclear;
    CauseType cause_type = CauseType::Unclear;
    std::vector<CauseLabel> matched;  // every cause with evidence, table order

    bool operator==(const CauseDetermination&) const = default;
};

struct ComponentLinkage {
    std::vector<Component> related;    // sorted, unique
    std::vector<Component> caused_by;  // subset of related

    bool operator==(const ComponentLinkage&) const = default;
};

// ---------------------------------------------------------------------------
// Model coding
// ---------------------------------------------------------------------------

struct PredictorVector {
    int age_cat = 0;          // 1..4
    int gender = 0;           // 1 Female, 2 Male
    int cause_type_code = 0;  // 1 human, 2 equipment, 3 both
    int weather = 1;          // 1 favorable, 2 adverse
    int road = 1;
    int time = 1;
    int modes_count = 1;

    bool operator==(const PredictorVector&) const = default;
};

enum class RecordStatus : std::uint8_t { Ok, Error };

struct StructuredIncident {
    std::string record_id;
    bool is_ebike = false;
    RecordStatus status = RecordStatus::Ok;
    std::string error;
    // Present only for e-bike records whose extraction succeeded.
    std::optional<ExtractedFactors> factors;
    std::optional<CauseDetermination> cause;
    std::optional<ComponentLinkage> links;
    std::optional<PredictorVector> predictors;

    bool operator==(const StructuredIncident&) const = default;
};

}  // namespace ebike
