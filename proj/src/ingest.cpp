#include "ebike/ingest.hpp"

#include "ebike/csv.hpp"
#include "ebike/errors.hpp"
#include "ebike/text.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace ebike::ingest {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kMaxPlausibleAge = 120;

std::optional<int> parse_int(std::string_view s) {
    const std::string t = text::trim(s);
    int v = 0;
    const auto* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc{} || ptr != end || t.empty()) return std::nullopt;
    return v;
}

struct RawRow {
    std::string record_id;
    std::string year;
    std::string state;
    std::string narrative;
    std::string age;
    std::string gender;
    std::string severity;
};

// Validates one row. On success returns the report and may append a flag.
std::optional<IncidentReport> validate(const RawRow& raw, std::vector<Reject>& rejects, bool& flagged,
                                       std::string& reason) {
    IncidentReport r;
    r.record_id = text::trim(raw.record_id);
    if (r.record_id.empty()) {
        reason = "missing record_id";
        return std::nullopt;
    }
    auto year = parse_int(raw.year);
    if (!year) {
        reason = "invalid year '" + raw.year + "'";
        return std::nullopt;
    }
    r.year = *year;
    r.state = text::trim(raw.state);
    r.narrative = raw.narrative;
    const std::string age = text::trim(raw.age);
    if (!age.empty()) {
        auto a = parse_int(age);
        if (!a) {
            reason = "invalid age '" + raw.age + "'";
            return std::nullopt;
        }
        if (*a < 0) {
            reason = "negative age " + std::to_string(*a);
            return std::nullopt;
        }
        r.age_years = *a;
        if (*a > kMaxPlausibleAge) {
            rejects.push_back({r.record_id, "age " + std::to_string(*a) + " outside [0, 120] (kept)"});
            flagged = true;
        }
    }
    r.gender_raw = text::trim(raw.gender);
    auto sev = parse_int(raw.severity);
    if (!sev || (*sev != -1 && (*sev < 1 || *sev > 8))) {
        reason = "invalid severity '" + raw.severity + "'";
        return std::nullopt;
    }
    r.severity_code = *sev;
    return r;
}

class Collector {
public:
    void add(const RawRow& raw, const std::string& location) {
        ++rows_;
        bool flagged = false;
        std::string reason;
        const std::size_t reject_mark = result_.rejects.size();
        auto report = validate(raw, result_.rejects, flagged, reason);
        if (report && !ids_.insert(report->record_id).second) {
            reason = "duplicate record_id";
            report.reset();
            result_.rejects.resize(reject_mark);
            flagged = false;
        }
        if (!report) {
            result_.rejects.push_back({text::trim(raw.record_id), reason + " (" + location + ")"});
            ++result_.rejected_rows;
            return;
        }
        if (flagged) ++result_.flagged_rows;
        result_.reports.push_back(std::move(*report));
    }

    void reject(const std::string& id, const std::string& reason) {
        ++rows_;
        result_.rejects.push_back({id, reason});
        ++result_.rejected_rows;
    }

    LoadResult finish(const std::filesystem::path& path) {
        if (rows_ > 0 && result_.reports.empty()) {
            throw SchemaError("all " + std::to_string(rows_) + " rows of " + path.string() + " were rejected; first: " +
                              result_.rejects.front().reason);
        }
        return std::move(result_);
    }

private:
    LoadResult result_;
    std::set<std::string> ids_;
    std::size_t rows_ = 0;
};

LoadResult load_csv(std::istream& in, const std::filesystem::path& path) {
    csv::Reader reader(in);
    auto header = reader.next();
    if (!header) throw SchemaError(path.string() + ": missing header row");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header->size(); ++i) {
        std::string name = text::trim((*header)[i]);
        if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name = name.substr(3);
        index[name] = i;
    }
    for (auto col : kInputColumns) {
        if (!index.count(std::string(col))) {
            throw SchemaError(path.string() + ": missing required column '" + std::string(col) + "'");
        }
    }
    auto field = [&](const std::vector<std::string>& row, const char* col) -> const std::string& {
        return row[index.at(col)];
    };

    Collector collector;
    while (auto row = reader.next()) {
        if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;
        const std::string location = "line " + std::to_string(reader.line());
        if (row->size() != header->size()) {
            const std::size_t id_col = index.at("record_id");
            const std::string id = id_col < row->size() ? text::trim((*row)[id_col]) : "";
            collector.reject(id,
                             "expected " + std::to_string(header->size()) + " fields, got " +
                                 std::to_string(row->size()) + " (" + location + ")");
            continue;
        }
        RawRow raw{field(*row, "record_id"), field(*row, "year"),   field(*row, "state"),   field(*row, "narrative"),
                   field(*row, "age"),       field(*row, "gender"), field(*row, "severity")};
        collector.add(raw, location);
    }
    return collector.finish(path);
}

std::string json_scalar(const nlohmann::json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return v.dump();
}

LoadResult load_jsonl(std::istream& in, const std::filesystem::path& path) {
    Collector collector;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        const std::string location = "line " + std::to_string(lineno);
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            collector.reject("", std::string("malformed JSON (") + location + ")");
            continue;
        }
        if (!obj.is_object()) {
            collector.reject("", "not a JSON object (" + location + ")");
            continue;
        }
        for (auto col : kInputColumns) {
            if (!obj.contains(std::string(col))) {
                throw SchemaError(path.string() + ": " + location + ": missing required key '" + std::string(col) +
                                  "'");
            }
        }
        RawRow raw{json_scalar(obj["record_id"]), json_scalar(obj["year"]),   json_scalar(obj["state"]),
                   json_scalar(obj["narrative"]), json_scalar(obj["age"]),    json_scalar(obj["gender"]),
                   json_scalar(obj["severity"])};
        collector.add(raw, location);
    }
    return collector.finish(path);
}

ordered_json predictors_json(const PredictorVector& p) {
    ordered_json j;
    j["age_cat"] = p.age_cat;
    j["gender"] = p.gender;
    j["cause_type"] = p.cause_type_code;
    j["weather"] = p.weather;
    j["road"] = p.road;
    j["time"] = p.time;
    j["modes_count"] = p.modes_count;
    return j;
}

ordered_json component_list(const std::vector<Component>& cs) {
    ordered_json arr = ordered_json::array();
    for (auto c : cs) arr.push_back(std::string(component_name(c)));
    return arr;
}

std::vector<Component> parse_components(const nlohmann::json& arr) {
    std::vector<Component> out;
    for (const auto& v : arr) {
        auto c = parse_component(v.get<std::string>());
        if (!c) throw SchemaError("unknown component '" + v.get<std::string>() + "'");
        out.push_back(*c);
    }
    return out;
}

}  // namespace

Format format_from_path(const std::filesystem::path& path) {
    const std::string ext = text::to_lower(path.extension().string());
    if (ext == ".csv") return Format::Csv;
    if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return Format::Jsonl;
    throw ConfigError("cannot infer input format from extension of " + path.string() + " (use .csv or .jsonl)");
}

LoadResult load_reports(const std::filesystem::path& path, Format format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return format == Format::Csv ? load_csv(in, path) : load_jsonl(in, path);
}

LoadResult load_reports(const std::filesystem::path& path) {
    return load_reports(path, format_from_path(path));
}

void write_rejects(const std::vector<Reject>& rejects, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    csv::write_row(out, {"record_id", "reason"});
    for (const auto& r : rejects) csv::write_row(out, {r.record_id, r.reason});
    if (!out) throw IoError("write failed for " + path.string());
}

bool has_defined_gender(const IncidentReport& r) {
    return text::iequals(r.gender_raw, "female") || text::iequals(r.gender_raw, "male");
}

FilterResult filter_for_model(const std::vector<IncidentReport>& reports, bool drop_unspecified_gender) {
    FilterResult out;
    out.summary.input = reports.size();
    for (const auto& r : reports) {
        if (r.severity_code == -1) {
            ++out.summary.dropped_undefined_severity;
        } else if (drop_unspecified_gender && !has_defined_gender(r)) {
            ++out.summary.dropped_unspecified_gender;
        } else {
            out.reports.push_back(r);
        }
    }
    out.summary.kept = out.reports.size();
    return out;
}

std::string to_json_line(const StructuredIncident& s) {
    ordered_json j;
    j["record_id"] = s.record_id;
    j["is_ebike"] = s.is_ebike;
    j["status"] = s.status == RecordStatus::Ok ? "ok" : "error";
    j["error"] = s.error;
    const ExtractedFactors empty_factors{{}, 0, "", "", "", ""};
    const ExtractedFactors& f = s.factors ? *s.factors : empty_factors;
    j["modes"] = f.modes;
    j["modes_count"] = f.modes_count;
    j["time_raw"] = f.time_raw;
    j["weather_raw"] = f.weather_raw;
    j["road_raw"] = f.road_raw;
    j["cause_raw"] = f.cause_raw;
    if (s.cause) {
        j["cause_label"] = std::string(cause_name(s.cause->cause_label));
        j["cause_type"] = std::string(cause_type_name(s.cause->cause_type));
        ordered_json matched = ordered_json::array();
        for (auto c : s.cause->matched) matched.push_back(std::string(cause_name(c)));
        j["cause_matches"] = matched;
    } else {
        j["cause_label"] = nullptr;
        j["cause_type"] = nullptr;
        j["cause_matches"] = ordered_json::array();
    }
    j["components_related"] = s.links ? component_list(s.links->related) : ordered_json::array();
    j["components_caused"] = s.links ? component_list(s.links->caused_by) : ordered_json::array();
    j["predictors"] = s.predictors ? predictors_json(*s.predictors) : ordered_json(nullptr);
    return j.dump();
}

StructuredIncident from_json_line(std::string_view line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("malformed structured record: ") + e.what());
    }
    try {
        StructuredIncident s;
        s.record_id = j.at("record_id").get<std::string>();
        s.is_ebike = j.at("is_ebike").get<bool>();
        s.status = j.value("status", "ok") == "error" ? RecordStatus::Error : RecordStatus::Ok;
        s.error = j.value("error", "");
        const bool extracted = s.is_ebike && s.status == RecordStatus::Ok;
        if (extracted) {
            ExtractedFactors f;
            f.modes = j.at("modes").get<std::vector<std::string>>();
            f.modes_count = j.at("modes_count").get<int>();
            f.time_raw = j.at("time_raw").get<std::string>();
            f.weather_raw = j.at("weather_raw").get<std::string>();
            f.road_raw = j.at("road_raw").get<std::string>();
            f.cause_raw = j.at("cause_raw").get<std::string>();
            s.factors = std::move(f);

            CauseDetermination c;
            const auto label = parse_cause_exact(j.at("cause_label").get<std::string>());
            const auto type = parse_cause_type(j.at("cause_type").get<std::string>());
            if (!label || !type) throw SchemaError("unknown cause label or type");
            c.cause_label = *label;
            c.cause_type = *type;
            for (const auto& m : j.value("cause_matches", nlohmann::json::array())) {
                auto ml = parse_cause_exact(m.get<std::string>());
                if (!ml) throw SchemaError("unknown cause '" + m.get<std::string>() + "'");
                c.matched.push_back(*ml);
            }
            s.cause = std::move(c);

            ComponentLinkage links;
            links.related = parse_components(j.at("components_related"));
            links.caused_by = parse_components(j.at("components_caused"));
            s.links = std::move(links);
        }
        const auto& p = j.at("predictors");
        if (!p.is_null()) {
            PredictorVector v;
            v.age_cat = p.at("age_cat").get<int>();
            v.gender = p.at("gender").get<int>();
            v.cause_type_code = p.at("cause_type").get<int>();
            v.weather = p.at("weather").get<int>();
            v.road = p.at("road").get<int>();
            v.time = p.at("time").get<int>();
            v.modes_count = p.at("modes_count").get<int>();
            s.predictors = v;
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("structured record does not match schema: ") + e.what());
    }
}

std::size_t write_structured(const std::vector<StructuredIncident>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& r : records) out << to_json_line(r) << '\n';
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
    return records.size();
}

std::vector<StructuredIncident> read_structured(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<StructuredIncident> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            out.push_back(from_json_line(line));
        } catch (const SchemaError& e) {
            throw SchemaError(path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace ebike::ingest
