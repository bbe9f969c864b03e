#pragma once

// Descriptive aggregates over structured e-bike records and the report
// directory writer (CSV tables, SVG charts, fit report, manifest).

#include "ebike/analysis.hpp"
#include "ebike/types.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ebike::report {

// One e-bike record joined with its report's demographics.
struct ReportRecord {
    std::string record_id;
    int year = 0;
    std::string state;
    std::optional<int> age_cat;
    std::string gender;  // raw, trimmed
    int severity_code = -1;
    std::optional<CauseLabel> cause;  // nullopt or Unclear: no clear cause
    CauseType cause_type = CauseType::Unclear;
    std::vector<Component> related;
    std::vector<Component> caused;
    std::optional<PredictorVector> predictors;
};

// Keeps e-bike records only. Reports are matched by record_id; a missing
// report leaves demographics empty.
std::vector<ReportRecord> join_records(const std::vector<StructuredIncident>& records,
                                       const std::vector<IncidentReport>& reports);

// Field names usable for grouping or as the item: year, state, age_group,
// gender, severity, cause, cause_type. Missing values (unknown age,
// undefined severity, unclear cause) leave the record out of that grouping.
std::optional<std::string> field_value(const ReportRecord& r, const std::string& field);

struct GroupedCount {
    std::vector<std::string> group_key;
    std::string item;
    long count = 0;
    bool operator==(const GroupedCount&) const = default;
};

// Per group: descending count, ties by item label, truncated to k. Groups
// in lexicographic key order. Throws DomainError on an unknown field or k < 1.
std::vector<GroupedCount> top_k_by_group(const std::vector<ReportRecord>& records,
                                         const std::vector<std::string>& group_fields,
                                         const std::string& item_field, int k);

struct CauseTypeDistribution {
    long human = 0;
    long equipment = 0;
    long both = 0;
    long unclear = 0;
    long total() const { return human + equipment + both + unclear; }
    bool operator==(const CauseTypeDistribution&) const = default;
};
CauseTypeDistribution cause_type_distribution(const std::vector<ReportRecord>& records);

struct ComponentCount {
    Component component;
    long related = 0;
    long caused = 0;
};
std::vector<ComponentCount> component_link_counts(const std::vector<ReportRecord>& records);

struct CauseCount {
    CauseLabel cause;
    long count = 0;
};
// Primary cause per record, Unclear last.
std::vector<CauseCount> cause_counts(const std::vector<ReportRecord>& records);

// Percent with one decimal, computed from integer counts ("0.0" for total 0).
std::string percent(long count, long total);

struct SeverityGrouping {
    std::string grouping;  // age_group, gender, cause_type
    std::vector<GroupedCount> rows;
};

struct Tables {
    std::vector<GroupedCount> causes_by_age_gender;  // top 3 causes per age group x gender
    std::vector<SeverityGrouping> severity_by_group;
    CauseTypeDistribution cause_types;
    std::vector<ComponentCount> components;
    std::vector<CauseCount> causes;
};
Tables build_tables(const std::vector<ReportRecord>& records);

struct ManifestEntry {
    std::string file;
    std::string sha256;
    std::size_t bytes = 0;
};

// The fit either succeeded or failed with a reason that is written in place
// of the fit report.
struct FitOutcome {
    std::optional<analysis::FitReport> report;
    std::string failure;
};

// Writes every table as CSV and SVG, the fit report (text and JSON) and
// manifest.json into out_dir. Throws IoError.
std::vector<ManifestEntry> emit_report(const Tables& tables, const FitOutcome& fit,
                                       const std::filesystem::path& out_dir);

}  // namespace ebike::report
