#include "ebike/analysis.hpp"

#include "ebike/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ebike::analysis {

namespace {

struct Column {
    std::string name;
    double (*value)(const PredictorVector&);
};

// Variable order matches the report layout; restricted variables first.
std::vector<Column> numeric_columns(Spec spec) {
    std::vector<Column> cols = {
        {"Age", [](const PredictorVector& v) { return double(v.age_cat); }},
        {"Gender", [](const PredictorVector& v) { return double(v.gender); }},
        {"Incident Cause Type", [](const PredictorVector& v) { return double(v.cause_type_code); }},
    };
    if (spec == Spec::Full) {
        cols.push_back({"Weather", [](const PredictorVector& v) { return double(v.weather); }});
        cols.push_back({"Road Condition", [](const PredictorVector& v) { return double(v.road); }});
        cols.push_back({"Time", [](const PredictorVector& v) { return double(v.time); }});
    }
    cols.push_back({"Number of Transportation Modes", [](const PredictorVector& v) { return double(v.modes_count); }});
    return cols;
}

std::vector<Column> dummy_columns(Spec spec) {
    std::vector<Column> cols = {
        {"Age: Youth", [](const PredictorVector& v) { return v.age_cat == 2 ? 1.0 : 0.0; }},
        {"Age: Adults", [](const PredictorVector& v) { return v.age_cat == 3 ? 1.0 : 0.0; }},
        {"Age: Seniors", [](const PredictorVector& v) { return v.age_cat == 4 ? 1.0 : 0.0; }},
        {"Gender: Male", [](const PredictorVector& v) { return v.gender == 2 ? 1.0 : 0.0; }},
        {"Cause Type: Human-Related", [](const PredictorVector& v) { return v.cause_type_code == 1 ? 1.0 : 0.0; }},
        {"Cause Type: Both", [](const PredictorVector& v) { return v.cause_type_code == 3 ? 1.0 : 0.0; }},
    };
    if (spec == Spec::Full) {
        cols.push_back({"Weather: Adverse", [](const PredictorVector& v) { return v.weather == 2 ? 1.0 : 0.0; }});
        cols.push_back({"Road Condition: Adverse", [](const PredictorVector& v) { return v.road == 2 ? 1.0 : 0.0; }});
        cols.push_back({"Time: Adverse", [](const PredictorVector& v) { return v.time == 2 ? 1.0 : 0.0; }});
    }
    cols.push_back({"Number of Transportation Modes", [](const PredictorVector& v) { return double(v.modes_count); }});
    return cols;
}

ModelResult fit_one(std::string label, const std::vector<ModelRow>& rows, Spec spec, Coding coding,
                    const ordlogit::FitConfig& config) {
    ModelResult m;
    m.label = std::move(label);
    m.fit = ordlogit::fit(design(rows, spec, coding), config);
    m.pseudo_r2 = ordlogit::pseudo_r2(m.fit.ll_null, m.fit.ll_model);
    m.ic = ordlogit::information_criteria(m.fit.parameter_count(), m.fit.n, m.fit.ll_model);
    return m;
}

}  // namespace

ModelSample assemble_sample(const std::vector<StructuredIncident>& records,
                            const std::vector<IncidentReport>& reports, bool drop_unspecified_gender,
                            const codebook::Codebook& codebook) {
    std::map<std::string, const IncidentReport*> all;
    for (const auto& r : reports) all.emplace(r.record_id, &r);
    const auto filtered = ingest::filter_for_model(reports, drop_unspecified_gender);
    std::set<std::string> kept;
    for (const auto& r : filtered.reports) kept.insert(r.record_id);

    ModelSample s;
    s.filter = filtered.summary;
    std::vector<std::string> unknown;
    for (const auto& rec : records) {
        auto it = all.find(rec.record_id);
        if (it == all.end()) {
            unknown.push_back(rec.record_id);
            continue;
        }
        if (!rec.is_ebike) continue;
        ++s.ebike_records;
        if (!kept.count(rec.record_id)) {
            const auto& rep = *it->second;
            s.exclusions.push_back({rec.record_id, rep.severity_code == -1 ? "undefined severity"
                                                                           : "unspecified gender"});
            continue;
        }
        const auto outcome = codebook.build_predictor_vector(rec, *it->second);
        if (!outcome.vector) {
            s.exclusions.push_back({rec.record_id, outcome.exclusion_reason});
            continue;
        }
        s.rows.push_back({rec.record_id, *outcome.vector, it->second->severity_code});
    }
    if (!unknown.empty()) {
        std::string ids;
        for (std::size_t i = 0; i < unknown.size() && i < 10; ++i) ids += (i ? ", " : "") + unknown[i];
        throw DomainError("structured records without a source report: " + ids);
    }
    return s;
}

std::string_view coding_name(Coding c) { return c == Coding::Numeric ? "numeric" : "dummy"; }

Outcome compact_severity(const std::vector<ModelRow>& rows) {
    std::set<int> present;
    for (const auto& r : rows) present.insert(r.severity_code);
    if (present.size() < 2) {
        throw DomainError("severity is not identifiable: " + std::to_string(present.size()) +
                          " distinct level(s) among " + std::to_string(rows.size()) + " admissible records");
    }
    Outcome o;
    o.levels.assign(present.begin(), present.end());
    for (const auto& r : rows) {
        const auto pos = std::lower_bound(o.levels.begin(), o.levels.end(), r.severity_code) - o.levels.begin();
        o.y.push_back(static_cast<int>(pos) + 1);
    }
    return o;
}

ordlogit::ModelData design(const std::vector<ModelRow>& rows, Spec spec, Coding coding) {
    const auto cols = coding == Coding::Numeric ? numeric_columns(spec) : dummy_columns(spec);
    const auto outcome = compact_severity(rows);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        names.push_back(cols[j].name);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j].value(rows[i].predictors);
        }
    }
    return {std::move(x), outcome.y, static_cast<int>(outcome.levels.size()), std::move(names)};
}

FitReport fit_models(const ModelSample& sample, Coding coding, double alpha, const ordlogit::FitConfig& config) {
    FitReport r;
    r.coding = coding;
    r.severity_levels = compact_severity(sample.rows).levels;
    r.full = fit_one("Full", sample.rows, Spec::Full, coding, config);
    r.restricted = fit_one("Restricted", sample.rows, Spec::Restricted, coding, config);
    r.lr = inference::lr_test(r.restricted.fit, r.full.fit, alpha);
    if (coding == Coding::Dummy) {
        r.notes.push_back(
            "dummy coding: bases Children, Female, Equipment-Related, Favorable; number of modes numeric");
    }
    if (!sample.exclusions.empty()) {
        r.notes.push_back(std::to_string(sample.exclusions.size()) + " e-bike record(s) excluded from modeling");
    }
    return r;
}

}  // namespace ebike::analysis
