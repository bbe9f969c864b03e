#include "ebike/errors.hpp"
#include "ebike/ingest.hpp"
#include "ebike/metrics.hpp"
#include "support/oracles.hpp"
#include "support/stubs.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

using namespace ebike;
using namespace ebike::metrics;

namespace {

struct Row {
    Component component;
    long tp, fp, fn;
    double precision, recall, f1;
};

// Published per-class counts and their printed two-decimal metrics.
const Row kTable[] = {
    {Component::BrakeSystem, 23, 1, 8, 0.96, 0.74, 0.84},  {Component::Pedals, 91, 0, 23, 1.00, 0.80, 0.89},
    {Component::WheelTire, 37, 3, 3, 0.93, 0.93, 0.93},    {Component::SaddleSeat, 1, 0, 2, 1.00, 0.33, 0.50},
    {Component::FrontFork, 11, 1, 4, 0.92, 0.73, 0.81},    {Component::Visibility, 4, 2, 0, 0.67, 1.00, 0.80},
    {Component::DriveSystem, 4, 1, 0, 0.80, 1.00, 0.89},   {Component::Frame, 5, 0, 2, 1.00, 0.71, 0.83},
    {Component::SteeringSystem, 6, 0, 4, 1.00, 0.60, 0.75},
};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

StructuredIncident linked(const std::string& id, std::vector<Component> caused) {
    StructuredIncident s;
    s.record_id = id;
    s.is_ebike = true;
    s.links = ComponentLinkage{caused, caused};
    return s;
}

}  // namespace

TEST_CASE("published per-class rows reproduce after rounding") {
    for (const auto& r : kTable) {
        CAPTURE(component_name(r.component));
        const auto m = class_metrics(std::string(component_name(r.component)), {r.tp, r.fp, r.fn, 0});
        REQUIRE(m.precision);
        REQUIRE(m.recall);
        REQUIRE(m.f1);
        CHECK(std::abs(round2(*m.precision) - r.precision) <= 0.005);
        CHECK(std::abs(round2(*m.recall) - r.recall) <= 0.005);
        CHECK(std::abs(round2(*m.f1) - r.f1) <= 0.005);
        CHECK(m.support == r.tp + r.fn);
    }
}

TEST_CASE("weighted F1 over the published rows") {
    std::vector<ClassMetrics> ms;
    long support = 0;
    for (const auto& r : kTable) {
        ms.push_back(class_metrics("c", {r.tp, r.fp, r.fn, 0}));
        support += r.tp + r.fn;
    }
    CHECK(support == 228);
    std::vector<std::string> warnings;
    const double w = weighted_f1(ms, &warnings);
    CHECK(std::abs(w - 0.87) <= 0.005);
    CHECK(format_metric(w) == "0.87");
    CHECK(warnings.empty());
}

TEST_CASE("worked precision, recall, F1") {
    const auto a = precision_recall_f1({23, 1, 8, 0});
    CHECK(*a.precision == doctest::Approx(23.0 / 24));
    CHECK(*a.recall == doctest::Approx(23.0 / 31));
    CHECK(*a.f1 == doctest::Approx(46.0 / 55));
    const auto none = precision_recall_f1({0, 0, 0, 17});
    CHECK_FALSE(none.precision);
    CHECK_FALSE(none.recall);
    CHECK_FALSE(none.f1);
    const auto zero = precision_recall_f1({0, 2, 3, 0});
    CHECK(*zero.precision == 0.0);
    CHECK(*zero.recall == 0.0);
    CHECK_FALSE(zero.f1);
    CHECK(format_metric(std::nullopt) == "\u2014");
    CHECK(format_metric(0.8449) == "0.84");
}

TEST_CASE("F1 lies between precision and recall (property)") {
    oracle::Gen g(61);
    for (int trial = 0; trial < 5000; ++trial) {
        const ConfusionCounts c{g.integer(1, 200), g.integer(0, 200), g.integer(0, 200), 0};
        const auto m = precision_recall_f1(c);
        const double p = *m.precision, r = *m.recall, f = *m.f1;
        CHECK(f <= std::min(2 * p, 2 * r) + 1e-12);
        CHECK(f >= std::min(p, r) - 1e-12);
        CHECK(f <= std::max(p, r) + 1e-12);
    }
}

TEST_CASE("weighted F1 invariances (property)") {
    oracle::Gen g(62);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ClassMetrics> ms;
        const int k = g.integer(1, 9);
        for (int i = 0; i < k; ++i)
            ms.push_back(class_metrics("c" + std::to_string(i), {g.integer(1, 50), g.integer(0, 50), g.integer(0, 50), 0}));
        const double w = weighted_f1(ms);
        auto shuffled = ms;
        std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
        CHECK(weighted_f1(shuffled) == doctest::Approx(w).epsilon(1e-12));
        const long s = g.integer(2, 5);
        auto scaled = ms;
        for (auto& m : scaled) m = class_metrics(m.class_name, {m.counts.tp * s, m.counts.fp * s, m.counts.fn * s, 0});
        CHECK(weighted_f1(scaled) == doctest::Approx(w).epsilon(1e-12));
    }
    const auto one = class_metrics("x", {3, 1, 2, 0});
    CHECK(weighted_f1({one}) == doctest::Approx(*one.f1));
    const auto two = class_metrics("y", {5, 5, 0, 0});
    const auto a = class_metrics("a", {4, 0, 1, 0});
    CHECK(weighted_f1({a, two}) == doctest::Approx((*a.f1 + *two.f1) / 2));
}

TEST_CASE("weighted F1 edge cases") {
    std::vector<std::string> warnings;
    // zero-support class skipped; undefined f1 with support counts as 0 and warns
    const auto skipped = class_metrics("s", {0, 4, 0, 0});
    const auto real = class_metrics("r", {2, 0, 0, 0});
    CHECK(weighted_f1({skipped, real}, &warnings) == 1.0);
    const auto missed = class_metrics("m", {0, 0, 2, 0});
    warnings.clear();
    CHECK(weighted_f1({real, missed}, &warnings) == doctest::Approx(0.5));
    CHECK(warnings.size() == 1);
    CHECK_THROWS_AS(weighted_f1({skipped}), DomainError);
    CHECK_THROWS_AS(weighted_f1({}), DomainError);
}

TEST_CASE("tally counts per class") {
    const ClassSets pred{{"1", {"A"}}, {"2", {"A", "B"}}, {"3", {}}};
    const ClassSets gold{{"1", {"A"}}, {"2", {"B"}}, {"3", {"A"}}};
    const auto t = tally(pred, gold, {"A", "B", "C"});
    REQUIRE(t.size() == 3);
    CHECK(t[0].counts == ConfusionCounts{1, 1, 1, 0});
    CHECK(t[1].counts == ConfusionCounts{1, 0, 0, 2});
    CHECK(t[2].counts == ConfusionCounts{0, 0, 0, 3});
    CHECK_THROWS_AS(tally(pred, ClassSets{{"1", {}}}, {"A"}), DomainError);
}

TEST_CASE("perfect predictions give F1 of one for every supported class (property)") {
    oracle::Gen g(63);
    const std::vector<std::string> classes{"a", "b", "c", "d"};
    for (int trial = 0; trial < 100; ++trial) {
        ClassSets truth;
        for (int i = 0; i < g.integer(1, 40); ++i) {
            auto& s = truth[std::to_string(i)];
            for (const auto& c : classes)
                if (g.coin(0.3)) s.insert(c);
        }
        for (const auto& cc : tally(truth, truth, classes)) {
            const auto m = class_metrics(cc.class_name, cc.counts);
            if (m.support > 0) CHECK(*m.f1 == 1.0);
            CHECK(cc.counts.fp == 0);
        }
    }
}

TEST_CASE("truth file loading") {
    const auto t = load_truth(stub::fixture("published_counts_truth.csv"));
    CHECK(t.ids.size() == 236);
    CHECK(t.caused.at("T001") == std::set<Component>{Component::BrakeSystem});

    stub::TempDir dir("truth");
    auto bad = [&](const std::string& body) {
        stub::write_file(dir / "t.csv", body);
        return load_truth(dir / "t.csv");
    };
    CHECK_THROWS_AS(bad(""), SchemaError);
    CHECK_THROWS_AS(bad("record_id,class,caused\n"), SchemaError);
    CHECK_THROWS_AS(bad("id,class,caused\nA,Frame,yes\n"), SchemaError);
    CHECK_THROWS_AS(bad("record_id,class,caused\nA,Handlebar Bell,yes\n"), SchemaError);
    CHECK_THROWS_AS(bad("record_id,class,caused\nA,Frame,maybe\n"), SchemaError);
    CHECK_THROWS_AS(bad("record_id,class,caused\nA,,yes\n"), SchemaError);
    CHECK_THROWS_AS(load_truth(dir / "absent.csv"), IoError);

    const auto ok = bad("record_id,class,caused\nA,Frame,no\nA,Seat,1\nB,,no\n");
    CHECK(ok.ids == std::vector<std::string>{"A", "B"});
    CHECK(ok.related.at("A") == std::set<Component>{Component::Frame, Component::SaddleSeat});
    CHECK(ok.caused.at("A") == std::set<Component>{Component::SaddleSeat});
    CHECK(ok.caused.at("B").empty());
}

TEST_CASE("evaluation of the published-count fixture") {
    const auto records = ingest::read_structured(stub::fixture("published_counts_structured.jsonl"));
    const auto e = evaluate_components(records, load_truth(stub::fixture("published_counts_truth.csv")));
    CHECK(e.records == 236);
    REQUIRE(e.classes.size() == 9);
    for (const auto& r : kTable) {
        const auto it = std::find_if(e.classes.begin(), e.classes.end(),
                                     [&](const ClassMetrics& m) { return m.class_name == component_name(r.component); });
        REQUIRE(it != e.classes.end());
        CHECK(it->counts.tp == r.tp);
        CHECK(it->counts.fp == r.fp);
        CHECK(it->counts.fn == r.fn);
    }
    CHECK(format_metric(e.weighted_f1) == "0.87");
    const auto text = render_text(e);
    CHECK(text.find("Weighted F1 Score: 0.87") != std::string::npos);
    CHECK(text.find("Brake System") < text.find("Steering System"));
    const auto j = nlohmann::json::parse(render_json(e));
    CHECK(j["records"] == 236);
    CHECK(j["classes"].size() == 9);
    CHECK(j["classes"][0]["class"] == "Brake System");
    CHECK(j["classes"][0]["tp"] == 23);
}

TEST_CASE("evaluation requires matching ids and ignores non-e-bike records") {
    stub::TempDir dir("eval");
    stub::write_file(dir / "t.csv", "record_id,class,caused\nA,Frame,yes\nB,,no\n");
    const auto truth = load_truth(dir / "t.csv");

    StructuredIncident other;
    other.record_id = "Z";
    const auto e = evaluate_components({linked("A", {Component::Frame}), linked("B", {}), other}, truth);
    CHECK(e.weighted_f1 == 1.0);
    CHECK(e.records == 2);
    const auto text = render_text(e);
    CHECK(text.find("\u2014") != std::string::npos);  // unsupported classes show a dash
    const auto j = nlohmann::json::parse(render_json(e));
    CHECK(j["classes"][0]["precision"].is_null());

    try {
        evaluate_components({linked("A", {}), linked("C", {})}, truth);
        FAIL("expected DomainError");
    } catch (const DomainError& err) {
        const std::string msg = err.what();
        CHECK(msg.find("B") != std::string::npos);
        CHECK(msg.find("C") != std::string::npos);
    }
}
