#include "ebike/types.hpp"

#include "ebike/text.hpp"

namespace ebike {

namespace {

struct ComponentInfo {
    Component value;
    std::string_view name;
    std::string_view key;
    std::string_view ident;
    std::array<std::string_view, 3> aliases;
};

constexpr ComponentInfo kComponentInfo[] = {
    {Component::BrakeSystem, "Brake System", "brake_system", "BrakeSystem", {"brake", "brakes", ""}},
    {Component::SteeringSystem, "Steering System", "steering_system", "SteeringSystem", {"steering", "handlebar", ""}},
    {Component::Pedals, "Pedals", "pedals", "Pedals", {"pedal", "", ""}},
    {Component::DriveSystem, "Drive System", "drive_system", "DriveSystem", {"drive belt/chain", "drive belt or chain", "chain"}},
    {Component::WheelTire, "Wheel/Tire", "wheel_tire", "WheelTire", {"wheel or tire", "wheel", "tire"}},
    {Component::FrontFork, "Front Fork", "front_fork", "FrontFork", {"fork", "", ""}},
    {Component::Frame, "Frame", "frame", "Frame", {"bicycle frame", "bike frame", ""}},
    {Component::SaddleSeat, "Saddle/Seat", "saddle_seat", "SaddleSeat", {"seat", "saddle", "saddles/seats"}},
    {Component::Visibility, "Visibility", "visibility", "Visibility", {"visibility issues", "lights", "lamp"}},
};

struct CauseInfo {
    CauseLabel value;
    std::string_view name;
    std::string_view key;
    std::string_view ident;
};

constexpr CauseInfo kCauseInfo[] = {
    {CauseLabel::BreakTrafficRules, "Break Traffic Rules", "break_traffic_rules", "BreakTrafficRules"},
    {CauseLabel::CollisionOrCrash, "Collision or Crash", "collision_or_crash", "CollisionOrCrash"},
    {CauseLabel::FallOff, "Fall Off", "fall_off", "FallOff"},
    {CauseLabel::LostControl, "Lost Control", "lost_control", "LostControl"},
    {CauseLabel::NoHelmet, "No Helmet", "no_helmet", "NoHelmet"},
    {CauseLabel::Speeding, "Speeding", "speeding", "Speeding"},
    {CauseLabel::BatteryIssue, "Battery Issue", "battery_issue", "BatteryIssue"},
    {CauseLabel::BrakeIssue, "Brake Issue", "brake_issue", "BrakeIssue"},
    {CauseLabel::HandlebarIssue, "Handlebar Issue", "handlebar_issue", "HandlebarIssue"},
    {CauseLabel::PedalIssue, "Pedal Issue", "pedal_issue", "PedalIssue"},
    {CauseLabel::WheelTireIssue, "Wheel/Tire Issue", "wheel_tire_issue", "WheelTireIssue"},
    {CauseLabel::EquipmentMalfunction, "Equipment Malfunction", "equipment_malfunction", "EquipmentMalfunction"},
    {CauseLabel::DesignDefect, "Design Defect", "design_defect", "DesignDefect"},
    {CauseLabel::DefectiveParts, "Defective Parts", "defective_parts", "DefectiveParts"},
    {CauseLabel::Fire, "Fire", "fire", "Fire"},
    {CauseLabel::Unclear, "Unclear", "unclear", "Unclear"},
};

}  // namespace

std::string_view component_name(Component c) {
    return kComponentInfo[static_cast<std::size_t>(c)].name;
}

std::string_view component_key(Component c) {
    return kComponentInfo[static_cast<std::size_t>(c)].key;
}

std::optional<Component> parse_component(std::string_view s) {
    const std::string t = text::trim(s);
    for (const auto& info : kComponentInfo) {
        if (text::iequals(t, info.name) || text::iequals(t, info.key) || text::iequals(t, info.ident)) {
            return info.value;
        }
        for (auto alias : info.aliases) {
            if (!alias.empty() && text::iequals(t, alias)) return info.value;
        }
    }
    return std::nullopt;
}

std::string_view cause_name(CauseLabel c) {
    return kCauseInfo[static_cast<std::size_t>(c)].name;
}

std::string_view cause_key(CauseLabel c) {
    return kCauseInfo[static_cast<std::size_t>(c)].key;
}

std::optional<CauseLabel> parse_cause_exact(std::string_view s) {
    const std::string t = text::trim(s);
    for (const auto& info : kCauseInfo) {
        if (text::iequals(t, info.name) || text::iequals(t, info.key) || text::iequals(t, info.ident)) {
            return info.value;
        }
    }
    return std::nullopt;
}

bool is_human_cause(CauseLabel c) {
    return c <= CauseLabel::Speeding;
}

bool is_equipment_cause(CauseLabel c) {
    return c >= CauseLabel::BatteryIssue && c <= CauseLabel::Fire;
}

std::string_view cause_type_name(CauseType t) {
    switch (t) {
        case CauseType::HumanRelated: return "HumanRelated";
        case CauseType::EquipmentRelated: return "EquipmentRelated";
        case CauseType::Both: return "Both";
        case CauseType::Unclear: return "Unclear";
    }
    return "Unclear";
}

std::optional<CauseType> parse_cause_type(std::string_view s) {
    for (auto t : {CauseType::HumanRelated, CauseType::EquipmentRelated, CauseType::Both, CauseType::Unclear}) {
        if (text::iequals(text::trim(s), cause_type_name(t))) return t;
    }
    return std::nullopt;
}

}  // namespace ebike
