#include "ebike/agents.hpp"
#include "ebike/analysis.hpp"
#include "ebike/errors.hpp"
#include "ebike/ingest.hpp"
#include "ebike/report.hpp"
#include "ebike/svg.hpp"
#include "support/oracles.hpp"
#include "support/stubs.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace ebike;
using namespace ebike::report;

namespace {

ReportRecord rec(std::optional<CauseLabel> cause, CauseType type = CauseType::Unclear) {
    ReportRecord r;
    r.record_id = "r";
    r.cause = cause;
    r.cause_type = type;
    r.gender = "Male";
    r.age_cat = 3;
    r.severity_code = 2;
    return r;
}

struct Corpus {
    std::vector<IncidentReport> reports;
    std::vector<StructuredIncident> records;
};

const Corpus& fixture_corpus() {
    static const Corpus c = [] {
        Corpus out;
        out.reports = ingest::load_reports(stub::fixture("fixture_reports.csv")).reports;
        agents::RuleBackend rules;
        out.records = agents::run_pipeline(out.reports, rules).records;
        return out;
    }();
    return c;
}

// Synthetic coded rows with a real severity signal; codes 1, 2, 4, 5 so that
// compaction has a gap to close.
analysis::ModelSample synthetic_sample(std::uint64_t seed, int n) {
    oracle::Gen g(seed);
    analysis::ModelSample s;
    const int codes[] = {1, 2, 4, 5};
    for (int i = 0; i < n; ++i) {
        PredictorVector v{g.integer(1, 4), g.integer(1, 2), g.integer(1, 3), g.integer(1, 2),
                          g.integer(1, 2),  g.integer(1, 2), g.integer(1, 3)};
        Eigen::MatrixXd x(1, 7);
        x << v.age_cat, v.gender, v.cause_type_code, v.weather, v.road, v.time, v.modes_count;
        const Eigen::VectorXd beta = (Eigen::VectorXd(7) << 0.3, 0.5, -0.6, 0.8, -0.5, 0.7, 0.4).finished();
        const int y = oracle::draw_ordered(g, x, beta, Eigen::Vector3d(1.4, 2.4, 3.4))[0];
        s.rows.push_back({"S" + std::to_string(i), v, codes[y - 1]});
    }
    s.ebike_records = static_cast<std::size_t>(n);
    return s;
}

}  // namespace

TEST_CASE("top-k with the label tie rule") {
    std::vector<ReportRecord> rs{rec(CauseLabel::Fire), rec(CauseLabel::Fire), rec(CauseLabel::Fire),
                                 rec(CauseLabel::Speeding), rec(CauseLabel::BrakeIssue)};
    const auto top = top_k_by_group(rs, {}, "cause", 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0] == GroupedCount{{}, "Fire", 3});
    CHECK(top[1] == GroupedCount{{}, "Brake Issue", 1});  // before Speeding by label
    CHECK(top_k_by_group(rs, {}, "cause", 10).size() == 3);
    CHECK_THROWS_AS(top_k_by_group(rs, {"planet"}, "cause", 2), DomainError);
    CHECK_THROWS_AS(top_k_by_group(rs, {}, "colour", 2), DomainError);
    CHECK_THROWS_AS(top_k_by_group(rs, {}, "cause", 0), DomainError);
}

TEST_CASE("top-k groups in key order and skips missing values") {
    auto a = rec(CauseLabel::Fire);
    a.gender = "Female";
    auto b = rec(CauseLabel::Speeding);
    auto c = rec(CauseLabel::Speeding);
    c.age_cat.reset();  // unknown age leaves the grouping
    auto d = rec(std::nullopt);  // unclear cause leaves the item
    const auto out = top_k_by_group({a, b, c, d}, {"age_group", "gender"}, "cause", 3);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == GroupedCount{{"Adults", "Female"}, "Fire", 1});
    CHECK(out[1] == GroupedCount{{"Adults", "Male"}, "Speeding", 1});
    CHECK(top_k_by_group({}, {"gender"}, "cause", 3).empty());
}

TEST_CASE("top-k output is sorted and bounded (property)") {
    oracle::Gen g(71);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ReportRecord> rs;
        for (int i = 0; i < g.integer(0, 60); ++i) {
            auto r = rec(static_cast<CauseLabel>(g.integer(0, kCauseCount - 1)));
            r.gender = g.coin() ? "Male" : "Female";
            rs.push_back(r);
        }
        const int k = g.integer(1, 5);
        const auto out = top_k_by_group(rs, {"gender"}, "cause", k);
        std::map<std::vector<std::string>, int> per_group;
        long total = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            ++per_group[out[i].group_key];
            total += out[i].count;
            if (i > 0 && out[i].group_key == out[i - 1].group_key) {
                const bool ordered = out[i - 1].count > out[i].count ||
                                     (out[i - 1].count == out[i].count && out[i - 1].item < out[i].item);
                CHECK(ordered);
            }
            if (i > 0) CHECK(out[i - 1].group_key <= out[i].group_key);
        }
        for (const auto& [key, n] : per_group) CHECK(n <= k);
        CHECK(total <= static_cast<long>(rs.size()));
    }
}

TEST_CASE("cause-type distribution is an exhaustive partition") {
    std::vector<ReportRecord> rs;
    for (int i = 0; i < 5; ++i) rs.push_back(rec(CauseLabel::Fire, CauseType::EquipmentRelated));
    for (int i = 0; i < 4; ++i) rs.push_back(rec(CauseLabel::Speeding, CauseType::HumanRelated));
    rs.push_back(rec(CauseLabel::FallOff, CauseType::Both));
    CHECK(cause_type_distribution(rs) == CauseTypeDistribution{4, 5, 1, 0});
    std::vector<ReportRecord> unclear(3, rec(std::nullopt));
    CHECK(cause_type_distribution(unclear) == CauseTypeDistribution{0, 0, 0, 3});

    oracle::Gen g(72);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ReportRecord> mix;
        const int n = g.integer(0, 50);
        for (int i = 0; i < n; ++i) mix.push_back(rec(std::nullopt, static_cast<CauseType>(g.integer(0, 3))));
        CHECK(cause_type_distribution(mix).total() == n);
    }
}

TEST_CASE("component link counts") {
    auto a = rec(std::nullopt);
    a.related = {Component::BrakeSystem};
    a.caused = {Component::BrakeSystem};
    auto b = rec(std::nullopt);
    b.related = {Component::Pedals};
    const auto counts = component_link_counts({a, b});
    REQUIRE(counts.size() == 9);
    for (const auto& c : counts) {
        if (c.component == Component::BrakeSystem) {
            CHECK(c.related == 1);
            CHECK(c.caused == 1);
        } else if (c.component == Component::Pedals) {
            CHECK(c.related == 1);
            CHECK(c.caused == 0);
        } else {
            CHECK(c.related == 0);
        }
    }
    for (const auto& c : component_link_counts({})) {
        CHECK(c.related == 0);
        CHECK(c.caused == 0);
    }
}

TEST_CASE("caused never exceeds related on the fixture corpus") {
    const auto& c = fixture_corpus();
    const auto joined = join_records(c.records, c.reports);
    CHECK(joined.size() == 33);
    for (const auto& cc : component_link_counts(joined)) CHECK(cc.caused <= cc.related);
    const auto causes = cause_counts(joined);
    long total = 0;
    for (const auto& cc : causes) total += cc.count;
    CHECK(total == 33);
    if (!causes.empty()) {
        for (std::size_t i = 0; i + 1 < causes.size(); ++i) CHECK(causes[i].cause != CauseLabel::Unclear);
    }
}

TEST_CASE("join keeps e-bike records and demographics") {
    IncidentReport rep{"A", 2021, "OR", "x", 70, " Female ", 3};
    StructuredIncident yes;
    yes.record_id = "A";
    yes.is_ebike = true;
    yes.cause = CauseDetermination{CauseLabel::Unclear, CauseType::Unclear, {}};
    StructuredIncident orphan = yes;
    orphan.record_id = "B";
    StructuredIncident no;
    no.record_id = "C";
    const auto out = join_records({yes, orphan, no}, {rep});
    REQUIRE(out.size() == 2);
    CHECK(out[0].age_cat == 4);
    CHECK(out[0].gender == "Female");
    CHECK(out[0].year == 2021);
    CHECK_FALSE(out[0].cause);
    CHECK(field_value(out[0], "age_group") == std::optional<std::string>("Seniors"));
    CHECK(field_value(out[0], "severity") == std::optional<std::string>("3"));
    CHECK(field_value(out[0], "cause_type") == std::optional<std::string>("Unclear"));
    CHECK_FALSE(field_value(out[1], "severity"));
    CHECK(field_value(out[1], "gender") == std::optional<std::string>("Unspecified"));
}

TEST_CASE("percent from integer counts") {
    CHECK(percent(1, 3) == "33.3");
    CHECK(percent(2, 3) == "66.7");
    CHECK(percent(0, 0) == "0.0");
    CHECK(percent(1, 101) == "1.0");
    CHECK(percent(5, 5) == "100.0");
}

TEST_CASE("svg charts are deterministic and escaped") {
    const auto a = svg::bar_chart("A & B", {"x<y", "z"}, {{"s", {1, 2}}});
    CHECK(a == svg::bar_chart("A & B", {"x<y", "z"}, {{"s", {1, 2}}}));
    CHECK(a.rfind("<svg", 0) == 0);
    CHECK(a.find("A &amp; B") != std::string::npos);
    CHECK(a.find("x&lt;y") != std::string::npos);
    CHECK(a != svg::bar_chart("A & B", {"x<y", "z"}, {{"s", {1, 3}}}));
    CHECK(svg::escape("\"<>&") == "&quot;&lt;&gt;&amp;");
    CHECK(svg::bar_chart("empty", {}, {}).find("no data") != std::string::npos);
    const auto zeros = svg::bar_chart("zeros", {"a"}, {{"s", {0}}});
    CHECK(zeros.find("no data") == std::string::npos);  // categories still drawn
    CHECK(zeros.find(">a<") != std::string::npos);
    CHECK_THROWS_AS(svg::bar_chart("bad", {"a", "b"}, {{"s", {1}}}), DomainError);
}

TEST_CASE("severity compaction to ranks") {
    std::vector<analysis::ModelRow> rows;
    for (int code : {5, 1, 4, 1, 5}) rows.push_back({"r", {}, code});
    const auto o = analysis::compact_severity(rows);
    CHECK(o.levels == std::vector<int>{1, 4, 5});
    CHECK(o.y == std::vector<int>{3, 1, 2, 1, 3});
    rows.assign(3, {"r", {}, 2});
    CHECK_THROWS_AS(analysis::compact_severity(rows), DomainError);
    CHECK_THROWS_AS(analysis::compact_severity({}), DomainError);
}

TEST_CASE("design matrices for both codings") {
    std::vector<analysis::ModelRow> rows{{"a", {1, 1, 2, 1, 1, 1, 1}, 1},
                                        {"b", {4, 2, 1, 2, 2, 2, 3}, 2},
                                        {"c", {2, 1, 3, 1, 2, 1, 2}, 3}};
    const auto full = analysis::design(rows, analysis::Spec::Full, analysis::Coding::Numeric);
    CHECK(full.p() == 7);
    CHECK(full.covariate_names.front() == "Age");
    CHECK(full.covariate_names.back() == "Number of Transportation Modes");
    CHECK(full.x.row(1) == (Eigen::RowVectorXd(7) << 4, 2, 1, 2, 2, 2, 3).finished());
    const auto restricted = analysis::design(rows, analysis::Spec::Restricted, analysis::Coding::Numeric);
    CHECK(restricted.covariate_names ==
          std::vector<std::string>{"Age", "Gender", "Incident Cause Type", "Number of Transportation Modes"});
    const auto dummy = analysis::design(rows, analysis::Spec::Full, analysis::Coding::Dummy);
    CHECK(dummy.p() == 10);
    // row b: Seniors, Male, Human-Related, all adverse, three modes
    CHECK(dummy.x.row(1) == (Eigen::RowVectorXd(10) << 0, 0, 1, 1, 1, 0, 1, 1, 1, 3).finished());
    CHECK(analysis::coding_name(analysis::Coding::Dummy) == "dummy");
}

TEST_CASE("assembled sample from the fixture corpus") {
    const auto& c = fixture_corpus();
    const auto s = analysis::assemble_sample(c.records, c.reports, false);
    CHECK(s.ebike_records == 33);
    CHECK(s.rows.size() + s.exclusions.size() == s.ebike_records);
    for (const auto& e : s.exclusions) CHECK_FALSE(e.reason.empty());
    bool saw_severity = false;
    for (const auto& e : s.exclusions) saw_severity |= e.reason == "undefined severity";
    CHECK(saw_severity);
    const auto dropped = analysis::assemble_sample(c.records, c.reports, true);
    CHECK(dropped.rows.size() <= s.rows.size());

    auto orphan = c.records;
    orphan.back().record_id = "NOPE";
    CHECK_THROWS_AS(analysis::assemble_sample(orphan, c.reports, false), DomainError);
}

TEST_CASE("fit_models on a synthetic sample") {
    const auto s = synthetic_sample(11, 1500);
    const auto r = analysis::fit_models(s, analysis::Coding::Numeric);
    CHECK(r.severity_levels == std::vector<int>{1, 2, 4, 5});
    CHECK(r.full.fit.parameter_count() == 10);
    CHECK(r.restricted.fit.parameter_count() == 7);
    CHECK(r.lr.df == 3);
    CHECK(r.lr.reject);
    CHECK(r.full.fit.converged);
    CHECK(r.full.pseudo_r2 > r.restricted.pseudo_r2);
    CHECK(r.full.ic.aic == doctest::Approx(2 * 10 - 2 * r.full.fit.ll_model));
    CHECK(r.notes.empty());
    // truth recovered within a generous band at this n
    const double truth[] = {0.3, 0.5, -0.6, 0.8, -0.5, 0.7, 0.4};
    for (int k = 0; k < 7; ++k) CHECK(std::abs(r.full.fit.beta[k] - truth[k]) <= 4 * r.full.fit.se[k]);

    const auto text = analysis::render_fit_text(r);
    CHECK(text.find("Weather") != std::string::npos);
    const auto j = nlohmann::json::parse(analysis::render_fit_json(r));
    CHECK(j.contains("lr_test"));

    const auto d = analysis::fit_models(s, analysis::Coding::Dummy);
    CHECK(d.full.fit.parameter_count() == 13);
    CHECK(d.lr.df == 3);
    CHECK(d.notes.size() == 1);
}

TEST_CASE("emit_report writes a deterministic manifest") {
    const auto& c = fixture_corpus();
    const auto tables = build_tables(join_records(c.records, c.reports));
    const FitOutcome fit{analysis::fit_models(synthetic_sample(3, 400), analysis::Coding::Numeric), ""};
    stub::TempDir a("report"), b("report");
    const auto ma = emit_report(tables, fit, a.path());
    const auto mb = emit_report(tables, fit, b.path());
    CHECK(stub::read_file(a / "manifest.json") == stub::read_file(b / "manifest.json"));
    const char* expected[] = {"causes_by_age_gender.csv", "causes_by_age_gender.svg", "severity_by_group.csv",
                              "severity_by_group.svg", "cause_type_distribution.csv", "cause_type_distribution.svg",
                              "component_links.csv", "component_links.svg", "fit_report.txt", "fit_report.json"};
    for (auto f : expected) {
        CAPTURE(f);
        CHECK(std::filesystem::exists(a / f));
        CHECK(std::any_of(ma.begin(), ma.end(), [&](const ManifestEntry& e) { return e.file == f; }));
    }
    for (const auto& e : ma) {
        CHECK(e.sha256.size() == 64);
        CHECK(e.bytes == std::filesystem::file_size(a / e.file));
        CHECK(stub::read_file(a / e.file) == stub::read_file(b / e.file));
    }
    CHECK(std::is_sorted(ma.begin(), ma.end(), [](const auto& x, const auto& y) { return x.file < y.file; }));
}

TEST_CASE("emit_report on an empty corpus and a failed fit") {
    const auto tables = build_tables({});
    stub::TempDir dir("report");
    const auto m = emit_report(tables, FitOutcome{std::nullopt, "no admissible records"}, dir.path());
    CHECK_FALSE(m.empty());
    CHECK(stub::read_file(dir / "fit_report.txt").find("no admissible records") != std::string::npos);
    const auto j = nlohmann::json::parse(stub::read_file(dir / "fit_report.json"));
    CHECK(j["fitted"] == false);
    CHECK(stub::read_file(dir / "component_links.svg").find("no data") != std::string::npos);
    const auto types = stub::read_file(dir / "cause_type_distribution.csv");
    CHECK(types.find("0.0") != std::string::npos);
}
