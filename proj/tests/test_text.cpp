#include "ebike/csv.hpp"
#include "ebike/errors.hpp"
#include "ebike/hash.hpp"
#include "ebike/rules.hpp"
#include "ebike/text.hpp"
#include "ebike/types.hpp"
#include "support/oracles.hpp"
#include "support/stubs.hpp"

#include <doctest.h>

#include <sstream>

using namespace ebike;

namespace {

std::vector<std::string> surfaces(const std::vector<text::Match>& ms) {
    std::vector<std::string> out;
    for (const auto& m : ms) out.push_back(m.surface);
    return out;
}

std::vector<text::TaggedPattern> tagged(std::initializer_list<const char*> sources) {
    std::vector<text::TaggedPattern> out;
    std::size_t i = 0;
    for (auto s : sources) out.push_back({text::Pattern(s), i++});
    return out;
}

}  // namespace

TEST_CASE("normalize lowercases and collapses whitespace") {
    CHECK(text::normalize("  The  E-Bike\t\nCRASHED ") == "the e-bike crashed");
    CHECK(text::normalize("") == "");
    CHECK(text::trim(" \t x y \n") == "x y");
    CHECK(text::to_lower("AbC") == "abc");
}

TEST_CASE("case-insensitive helpers") {
    CHECK(text::icontains("Heavy RAIN today", "rain"));
    CHECK_FALSE(text::icontains("dry", "rain"));
    CHECK(text::iequals("Female", "FEMALE"));
    CHECK_FALSE(text::iequals("Female", "Fem"));
    CHECK(text::split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
    CHECK(text::split("", ',') == std::vector<std::string>{""});
}

TEST_CASE("whole-word patterns respect word boundaries") {
    const auto pats = tagged({"hit"});
    CHECK(surfaces(text::find_all("he hit a car", pats)) == std::vector<std::string>{"hit"});
    CHECK(text::find_all("a white car", pats).empty());
    CHECK(text::find_all("hitting", pats).empty());
    CHECK(surfaces(text::find_all("hit.", pats)) == std::vector<std::string>{"hit"});
}

TEST_CASE("prefix patterns extend over trailing word characters") {
    const auto pats = tagged({"brak*"});
    CHECK(surfaces(text::find_all("he braked and the brakes failed", pats)) ==
          std::vector<std::string>{"braked", "brakes"});
    CHECK(text::find_all("unbraked", pats).empty());
    const text::Pattern p("Brak*");
    CHECK(p.prefix());
    CHECK(p.stem() == "brak");
    CHECK(p.source() == "Brak*");
}

TEST_CASE("phrases match across single spaces and hyphenated stems") {
    const auto pats = tagged({"ran a red light", "e-bike*"});
    const auto ms = text::find_all(text::normalize("She  RAN a red light on her e-bikes"), pats);
    CHECK(surfaces(ms) == std::vector<std::string>{"ran a red light", "e-bikes"});
}

TEST_CASE("overlap resolution keeps the longest match") {
    const auto pats = tagged({"bike", "electric bike"});
    const auto all = text::find_all("an electric bike and a bike", pats);
    CHECK(all.size() == 3);
    const auto kept = text::resolve_overlaps(all);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].surface == "electric bike");
    CHECK(kept[0].tag == 1);
    CHECK(kept[1].surface == "bike");
    CHECK(kept[1].tag == 0);
}

TEST_CASE("resolve_overlaps output never overlaps and is ordered (property)") {
    oracle::Gen g(11);
    const auto pats = tagged({"ab*", "b", "abc", "c d", "d*"});
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const int len = g.integer(0, 30);
        for (int i = 0; i < len; ++i) s += "abcd "[g.integer(0, 4)];
        const auto kept = text::resolve_overlaps(text::find_all(s, pats));
        for (std::size_t i = 1; i < kept.size(); ++i) {
            CHECK(kept[i - 1].end <= kept[i].begin);
        }
        for (const auto& m : kept) CHECK(s.substr(m.begin, m.end - m.begin) == m.surface);
    }
}

TEST_CASE("mask blanks matched spans and keeps offsets") {
    const std::string s = "a pedal-assist bike with a pedal";
    const auto masked = text::mask(s, {text::Pattern("pedal-assist")});
    CHECK(masked.size() == s.size());
    CHECK(masked == "a              bike with a pedal");
}

TEST_CASE("sentence spans") {
    const std::string s = "the brake failed. he fell; then 3.5 miles later! ok";
    const auto spans = text::sentences(s);
    REQUIRE(spans.size() == 4);
    CHECK(s.substr(spans[0].begin, spans[0].end - spans[0].begin) == "the brake failed");
    CHECK(s.substr(spans[2].begin, spans[2].end - spans[2].begin) == " then 3.5 miles later");
    CHECK(text::sentences("").empty());
}

// ---------------------------------------------------------------------------

TEST_CASE("csv reader handles quotes, doubled quotes, embedded newlines and CRLF") {
    std::istringstream in("a,b,c\r\n\"x, y\",\"say \"\"hi\"\"\",\"two\nlines\"\r\nlast,,\n");
    csv::Reader r(in);
    auto h = r.next();
    REQUIRE(h);
    CHECK(*h == std::vector<std::string>{"a", "b", "c"});
    auto row = r.next();
    REQUIRE(row);
    CHECK(r.line() == 2);
    CHECK(*row == std::vector<std::string>{"x, y", "say \"hi\"", "two\nlines"});
    auto last = r.next();
    REQUIRE(last);
    CHECK(r.line() == 4);
    CHECK(*last == std::vector<std::string>{"last", "", ""});
    CHECK_FALSE(r.next());
}

TEST_CASE("csv reader rejects an unterminated quote") {
    std::istringstream in("a,\"open\n");
    csv::Reader r(in);
    CHECK_THROWS_AS(r.next(), SchemaError);
}

TEST_CASE("csv write/read round trip (property)") {
    oracle::Gen g(5);
    const std::string alphabet = "ab,\"\n \r";
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> fields;
        const int nf = g.integer(1, 5);
        for (int i = 0; i < nf; ++i) {
            std::string f;
            const int len = g.integer(0, 8);
            for (int k = 0; k < len; ++k) f += alphabet[static_cast<std::size_t>(g.integer(0, 6))];
            // a lone CR before LF is not representable after CRLF folding
            for (std::size_t k = 0; k + 1 < f.size(); ++k)
                if (f[k] == '\r' && f[k + 1] == '\n') f[k] = 'a';
            fields.push_back(f);
        }
        if (fields.size() == 1 && fields[0].empty()) fields[0] = "x";
        std::ostringstream out;
        csv::write_row(out, fields);
        std::istringstream in(out.str());
        csv::Reader r(in);
        auto back = r.next();
        REQUIRE(back);
        CHECK(*back == fields);
    }
}

TEST_CASE("csv escape quotes only when needed") {
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");
    CHECK(csv::escape("q\"") == "\"q\"\"\"");
}

// ---------------------------------------------------------------------------

TEST_CASE("sha256 known digests") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// ---------------------------------------------------------------------------

TEST_CASE("toml subset parser") {
    const auto doc = rules::Document::parse(
        "version = \"2\"\n"
        "# comment\n"
        "[t]\n"
        "n = 42\n"
        "flag = true\n"
        "\"quoted key\" = [\"a\", \"b\",\n  \"c\"]  # trailing\n");
    const auto* root = doc.table("");
    REQUIRE(root);
    CHECK(std::get<std::string>(*root->find("version")) == "2");
    const auto* t = doc.table("t");
    REQUIRE(t);
    CHECK(std::get<std::int64_t>(*t->find("n")) == 42);
    CHECK(std::get<bool>(*t->find("flag")));
    CHECK(std::get<std::vector<std::string>>(*t->find("quoted key")) == std::vector<std::string>{"a", "b", "c"});
    CHECK(t->find("missing") == nullptr);
    CHECK(doc.table("nope") == nullptr);
}

TEST_CASE("toml errors carry the line number") {
    try {
        rules::Document::parse("a = 1\nb = \n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(rules::Document::parse("[unclosed\n"), ConfigError);
    CHECK_THROWS_AS(rules::Document::parse("x = [\"a\"\n"), ConfigError);
}

TEST_CASE("bundled rules load and cover every cause and component") {
    const auto& r = rules::RuleSet::defaults();
    CHECK_FALSE(r.version.empty());
    CHECK_FALSE(r.ebike_keywords.empty());
    CHECK(r.cause_synonyms.size() == kCauseCount);
    CHECK(r.component_keywords.size() == kAllComponents.size());
    CHECK(r.component_causes.size() == kAllComponents.size());
    CHECK_FALSE(r.failure_verbs.empty());
    CHECK(r.modes.front().first == "electric bicycle");
    // the file on disk and the compiled-in copy agree
    const auto disk = rules::RuleSet::load(std::filesystem::path(EBIKE_FIXTURE_DIR) / ".." / ".." / "config" /
                                           "rules.toml");
    CHECK(disk.cause_synonyms == r.cause_synonyms);
    CHECK(disk.component_keywords == r.component_keywords);
}

TEST_CASE("rules validation rejects unknown keys and missing tables") {
    const std::string src = stub::read_file(std::filesystem::path(EBIKE_FIXTURE_DIR) / ".." / ".." / "config" /
                                            "rules.toml");
    CHECK_NOTHROW(rules::RuleSet::parse(src));
    std::string bad = src;
    bad.replace(bad.find("speeding = ["), 8, "speedin_");
    CHECK_THROWS_AS(rules::RuleSet::parse(bad), ConfigError);
    std::string no_modes = src;
    no_modes.replace(no_modes.find("[modes]"), 7, "[modez]");
    CHECK_THROWS_AS(rules::RuleSet::parse(no_modes), ConfigError);
    CHECK_THROWS_AS(rules::RuleSet::load("/nonexistent/rules.toml"), IoError);
}

// ---------------------------------------------------------------------------

TEST_CASE("component and cause names round trip") {
    for (auto c : kAllComponents) {
        CHECK(parse_component(component_name(c)) == c);
        CHECK(parse_component(component_key(c)) == c);
    }
    CHECK(parse_component("Pedal") == Component::Pedals);
    CHECK(parse_component("Seat") == Component::SaddleSeat);
    CHECK(parse_component("Drive Belt/Chain") == Component::DriveSystem);
    CHECK(parse_component("Visibility Issues") == Component::Visibility);
    CHECK(parse_component("Bicycle Frame") == Component::Frame);
    CHECK_FALSE(parse_component("Horn"));
    for (std::size_t i = 0; i <= kCauseCount; ++i) {
        const auto c = static_cast<CauseLabel>(i);
        CHECK(parse_cause_exact(cause_name(c)) == c);
        CHECK(parse_cause_exact(cause_key(c)) == c);
    }
    CHECK_FALSE(parse_cause_exact("crashed into a wall"));
}

TEST_CASE("cause families partition the fifteen causes") {
    int human = 0, equipment = 0;
    for (std::size_t i = 0; i < kCauseCount; ++i) {
        const auto c = static_cast<CauseLabel>(i);
        CHECK(is_human_cause(c) != is_equipment_cause(c));
        human += is_human_cause(c);
        equipment += is_equipment_cause(c);
    }
    CHECK(human == 6);
    CHECK(equipment == 9);
    CHECK_FALSE(is_human_cause(CauseLabel::Unclear));
    CHECK_FALSE(is_equipment_cause(CauseLabel::Unclear));
    for (auto t : {CauseType::HumanRelated, CauseType::EquipmentRelated, CauseType::Both, CauseType::Unclear}) {
        CHECK(parse_cause_type(cause_type_name(t)) == t);
    }
}
