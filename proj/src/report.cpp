#include "ebike/report.hpp"

#include "ebike/codebook.hpp"
#include "ebike/csv.hpp"
#include "ebike/errors.hpp"
#include "ebike/hash.hpp"
#include "ebike/svg.hpp"
#include "ebike/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace ebike::report {

namespace {

const std::vector<std::string> kFields = {"year", "state", "age_group", "gender", "severity", "cause", "cause_type"};

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& body,
                std::vector<ManifestEntry>& manifest) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << body;
    out.close();
    if (!out) throw IoError("write failed for " + (dir / name).string());
    manifest.push_back({name, sha256_hex(body), body.size()});
}

std::string csv_doc(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    csv::write_row(out, header);
    for (const auto& r : rows) csv::write_row(out, r);
    return out.str();
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
    return s;
}

// Categories in first-seen order, one series per item.
std::string grouped_svg(const std::string& title, const std::vector<GroupedCount>& rows) {
    std::vector<std::string> cats, items;
    for (const auto& r : rows) {
        const std::string c = join(r.group_key, " / ");
        if (std::find(cats.begin(), cats.end(), c) == cats.end()) cats.push_back(c);
        if (std::find(items.begin(), items.end(), r.item) == items.end()) items.push_back(r.item);
    }
    std::sort(items.begin(), items.end());
    std::vector<svg::Series> series;
    for (const auto& it : items) series.push_back({it, std::vector<double>(cats.size(), 0.0)});
    for (const auto& r : rows) {
        const auto c = std::find(cats.begin(), cats.end(), join(r.group_key, " / ")) - cats.begin();
        const auto s = std::find(items.begin(), items.end(), r.item) - items.begin();
        series[static_cast<std::size_t>(s)].values[static_cast<std::size_t>(c)] = static_cast<double>(r.count);
    }
    return svg::bar_chart(title, cats, series);
}

}  // namespace

std::vector<ReportRecord> join_records(const std::vector<StructuredIncident>& records,
                                       const std::vector<IncidentReport>& reports) {
    std::map<std::string, const IncidentReport*> by_id;
    for (const auto& r : reports) by_id.emplace(r.record_id, &r);
    std::vector<ReportRecord> out;
    for (const auto& rec : records) {
        if (!rec.is_ebike) continue;
        ReportRecord r;
        r.record_id = rec.record_id;
        if (auto it = by_id.find(rec.record_id); it != by_id.end()) {
            const auto& rep = *it->second;
            r.year = rep.year;
            r.state = rep.state;
            if (rep.age_years && *rep.age_years >= 0) r.age_cat = codebook::bin_age(*rep.age_years);
            r.gender = text::trim(rep.gender_raw);
            r.severity_code = rep.severity_code;
        }
        if (rec.cause) {
            if (rec.cause->cause_label != CauseLabel::Unclear) r.cause = rec.cause->cause_label;
            r.cause_type = rec.cause->cause_type;
        }
        if (rec.links) {
            r.related = rec.links->related;
            r.caused = rec.links->caused_by;
        }
        r.predictors = rec.predictors;
        out.push_back(std::move(r));
    }
    return out;
}

std::optional<std::string> field_value(const ReportRecord& r, const std::string& field) {
    if (field == "year") return r.year ? std::optional(std::to_string(r.year)) : std::nullopt;
    if (field == "state") return r.state.empty() ? std::nullopt : std::optional(r.state);
    if (field == "age_group") {
        if (!r.age_cat) return std::nullopt;
        return std::string(codebook::age_group_name(*r.age_cat));
    }
    if (field == "gender") return r.gender.empty() ? std::optional<std::string>("Unspecified") : r.gender;
    if (field == "severity") {
        if (r.severity_code < 0) return std::nullopt;
        return std::to_string(r.severity_code);
    }
    if (field == "cause") {
        if (!r.cause) return std::nullopt;
        return std::string(cause_name(*r.cause));
    }
    if (field == "cause_type") return std::string(cause_type_name(r.cause_type));
    throw DomainError("unknown report field '" + field + "'; expected one of " + join(kFields, ", "));
}

std::vector<GroupedCount> top_k_by_group(const std::vector<ReportRecord>& records,
                                         const std::vector<std::string>& group_fields,
                                         const std::string& item_field, int k) {
    if (k < 1) throw DomainError("k must be positive");
    for (const auto& f : group_fields) {
        if (std::find(kFields.begin(), kFields.end(), f) == kFields.end()) field_value({}, f);
    }
    if (std::find(kFields.begin(), kFields.end(), item_field) == kFields.end()) field_value({}, item_field);

    std::map<std::vector<std::string>, std::map<std::string, long>> counts;
    for (const auto& r : records) {
        std::vector<std::string> key;
        bool complete = true;
        for (const auto& f : group_fields) {
            auto v = field_value(r, f);
            if (!v) {
                complete = false;
                break;
            }
            key.push_back(*v);
        }
        auto item = field_value(r, item_field);
        if (!complete || !item) continue;
        ++counts[key][*item];
    }

    std::vector<GroupedCount> out;
    for (const auto& [key, items] : counts) {
        std::vector<std::pair<std::string, long>> sorted(items.begin(), items.end());
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        const std::size_t n = std::min(sorted.size(), static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) out.push_back({key, sorted[i].first, sorted[i].second});
    }
    return out;
}

CauseTypeDistribution cause_type_distribution(const std::vector<ReportRecord>& records) {
    CauseTypeDistribution d;
    for (const auto& r : records) {
        switch (r.cause_type) {
            case CauseType::HumanRelated: ++d.human; break;
            case CauseType::EquipmentRelated: ++d.equipment; break;
            case CauseType::Both: ++d.both; break;
            case CauseType::Unclear: ++d.unclear; break;
        }
    }
    return d;
}

std::vector<ComponentCount> component_link_counts(const std::vector<ReportRecord>& records) {
    std::vector<ComponentCount> out;
    for (auto c : kAllComponents) out.push_back({c, 0, 0});
    for (const auto& r : records) {
        for (auto c : r.related) ++out[static_cast<std::size_t>(c)].related;
        for (auto c : r.caused) ++out[static_cast<std::size_t>(c)].caused;
    }
    return out;
}

std::vector<CauseCount> cause_counts(const std::vector<ReportRecord>& records) {
    std::vector<CauseCount> out;
    for (std::size_t i = 0; i <= kCauseCount; ++i) out.push_back({static_cast<CauseLabel>(i), 0});
    for (const auto& r : records) ++out[static_cast<std::size_t>(r.cause.value_or(CauseLabel::Unclear))].count;
    return out;
}

std::string percent(long count, long total) {
    if (total <= 0) return "0.0";
    // round half up on integers so the value is reproducible from the CSV
    const long tenths = (count * 2000 + total) / (2 * total);
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

Tables build_tables(const std::vector<ReportRecord>& records) {
    Tables t;
    t.causes_by_age_gender = top_k_by_group(records, {"age_group", "gender"}, "cause", 3);
    for (const std::string g : {"age_group", "gender", "cause_type"}) {
        t.severity_by_group.push_back({g, top_k_by_group(records, {g}, "severity", 100)});
    }
    t.cause_types = cause_type_distribution(records);
    t.components = component_link_counts(records);
    t.causes = cause_counts(records);
    return t;
}

std::vector<ManifestEntry> emit_report(const Tables& tables, const FitOutcome& fit,
                                       const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::vector<ManifestEntry> manifest;

    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& g : tables.causes_by_age_gender) {
            rows.push_back({g.group_key.at(0), g.group_key.at(1), g.item, std::to_string(g.count)});
        }
        write_file(out_dir, "causes_by_age_gender.csv", csv_doc({"age_group", "gender", "cause", "count"}, rows),
                   manifest);
        write_file(out_dir, "causes_by_age_gender.svg",
                   grouped_svg("Top 3 injury causes by age group and gender", tables.causes_by_age_gender), manifest);
    }
    {
        std::vector<std::vector<std::string>> rows;
        std::vector<GroupedCount> flat;
        for (const auto& sg : tables.severity_by_group) {
            for (const auto& g : sg.rows) {
                rows.push_back({sg.grouping, g.group_key.at(0), g.item, std::to_string(g.count)});
                flat.push_back({{sg.grouping + "=" + g.group_key.at(0)}, "severity " + g.item, g.count});
            }
        }
        write_file(out_dir, "severity_by_group.csv", csv_doc({"grouping", "group", "severity", "count"}, rows),
                   manifest);
        write_file(out_dir, "severity_by_group.svg", grouped_svg("Severity level by group", flat), manifest);
    }
    {
        const auto& d = tables.cause_types;
        const long n = d.total();
        const std::vector<std::pair<std::string, long>> buckets = {
            {"Human-Related", d.human}, {"Equipment-Related", d.equipment}, {"Both", d.both}, {"Unclear", d.unclear}};
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> cats;
        svg::Series s{"records", {}};
        for (const auto& [name, count] : buckets) {
            rows.push_back({name, std::to_string(count), percent(count, n)});
            cats.push_back(name);
            s.values.push_back(static_cast<double>(count));
        }
        write_file(out_dir, "cause_type_distribution.csv", csv_doc({"cause_type", "count", "percent"}, rows),
                   manifest);
        write_file(out_dir, "cause_type_distribution.svg",
                   svg::bar_chart("Incident cause type", n ? cats : std::vector<std::string>{},
                                  n ? std::vector<svg::Series>{s} : std::vector<svg::Series>{}),
                   manifest);
    }
    {
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> cats;
        svg::Series rel{"related", {}}, cau{"caused by", {}};
        long any = 0;
        for (const auto& c : tables.components) {
            rows.push_back({std::string(component_name(c.component)), std::to_string(c.related),
                            std::to_string(c.caused)});
            cats.emplace_back(component_name(c.component));
            rel.values.push_back(static_cast<double>(c.related));
            cau.values.push_back(static_cast<double>(c.caused));
            any += c.related;
        }
        write_file(out_dir, "component_links.csv", csv_doc({"component", "related", "caused"}, rows), manifest);
        write_file(out_dir, "component_links.svg",
                   svg::bar_chart("Incidents related to and caused by each component",
                                  any ? cats : std::vector<std::string>{},
                                  any ? std::vector<svg::Series>{rel, cau} : std::vector<svg::Series>{}),
                   manifest);
    }
    {
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> cats;
        svg::Series s{"records", {}};
        for (const auto& c : tables.causes) {
            const std::string type = c.cause == CauseLabel::Unclear ? "Unclear"
                                     : is_human_cause(c.cause)      ? "Human-Related"
                                                                    : "Equipment-Related";
            rows.push_back({std::string(cause_name(c.cause)), type, std::to_string(c.count)});
            if (c.count > 0) {
                cats.emplace_back(cause_name(c.cause));
                s.values.push_back(static_cast<double>(c.count));
            }
        }
        write_file(out_dir, "cause_counts.csv", csv_doc({"cause", "cause_type", "count"}, rows), manifest);
        write_file(out_dir, "cause_counts.svg",
                   svg::bar_chart("Incident causes", cats,
                                  cats.empty() ? std::vector<svg::Series>{} : std::vector<svg::Series>{s}),
                   manifest);
    }

    if (fit.report) {
        write_file(out_dir, "fit_report.txt", analysis::render_fit_text(*fit.report), manifest);
        write_file(out_dir, "fit_report.json", analysis::render_fit_json(*fit.report), manifest);
    } else {
        write_file(out_dir, "fit_report.txt", "Ordered Logit Model\nnot fitted: " + fit.failure + "\n", manifest);
        nlohmann::ordered_json j;
        j["fitted"] = false;
        j["reason"] = fit.failure;
        write_file(out_dir, "fit_report.json", j.dump(2) + "\n", manifest);
    }

    std::sort(manifest.begin(), manifest.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.file < b.file; });
    nlohmann::ordered_json m;
    m["files"] = nlohmann::ordered_json::array();
    for (const auto& e : manifest) m["files"].push_back({{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    const std::string body = m.dump(2) + "\n";
    std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (out_dir / "manifest.json").string());
    out << body;
    if (!out) throw IoError("write failed for manifest.json");
    return manifest;
}

}  // namespace ebike::report
