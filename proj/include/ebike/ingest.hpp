#pragma once

// Loading, validating and filtering raw incident exports; persisting
// structured records as JSONL.

#include "ebike/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ebike::ingest {

enum class Format { Csv, Jsonl };

// Picks the format from the file extension (.csv / .jsonl / .json).
Format format_from_path(const std::filesystem::path& path);

inline constexpr std::string_view kInputColumns[] = {
    "record_id", "year", "state", "narrative", "age", "gender", "severity",
};

struct Reject {
    std::string record_id;  // may be empty when the id itself was unreadable
    std::string reason;
    bool operator==(const Reject&) const = default;
};

struct LoadResult {
    std::vector<IncidentReport> reports;
    // Rows that were dropped, plus rows kept but flagged (out-of-range age).
    std::vector<Reject> rejects;
    std::size_t rejected_rows = 0;
    std::size_t flagged_rows = 0;
};

// Throws IoError when the file cannot be read and SchemaError when a
// required column is missing or every data row was rejected.
LoadResult load_reports(const std::filesystem::path& path, Format format);
LoadResult load_reports(const std::filesystem::path& path);

void write_rejects(const std::vector<Reject>& rejects, const std::filesystem::path& path);

struct FilterSummary {
    std::size_t input = 0;
    std::size_t kept = 0;
    std::size_t dropped_undefined_severity = 0;
    std::size_t dropped_unspecified_gender = 0;
};

struct FilterResult {
    std::vector<IncidentReport> reports;
    FilterSummary summary;
};

// Female/Male, case-insensitive.
bool has_defined_gender(const IncidentReport& r);

// Drops severity -1 always and, when asked, genders outside {Female, Male}.
// A record failing both rules is counted once, under severity.
FilterResult filter_for_model(const std::vector<IncidentReport>& reports, bool drop_unspecified_gender);

// ---------------------------------------------------------------------------
// Structured JSONL
// ---------------------------------------------------------------------------

std::string to_json_line(const StructuredIncident& record);
StructuredIncident from_json_line(std::string_view line);

// Returns the number of records written. Throws IoError.
std::size_t write_structured(const std::vector<StructuredIncident>& records, const std::filesystem::path& path);
std::vector<StructuredIncident> read_structured(const std::filesystem::path& path);

}  // namespace ebike::ingest
