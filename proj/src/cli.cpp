#include "ebike/cli.hpp"

#include "ebike/agents.hpp"
#include "ebike/analysis.hpp"
#include "ebike/csv.hpp"
#include "ebike/errors.hpp"
#include "ebike/ingest.hpp"
#include "ebike/llm_gateway.hpp"
#include "ebike/metrics.hpp"
#include "ebike/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <random>

namespace ebike::cli {

namespace fs = std::filesystem;

std::filesystem::path RunConfig::structured_path() const {
    return structured.empty() ? out / "structured.jsonl" : structured;
}

std::filesystem::path RunConfig::cache_path() const { return cache.empty() ? out / "llm_cache.jsonl" : cache; }

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    out.close();
    if (!out) throw IoError("write failed for " + path.string());
}

void require_input(const RunConfig& c) {
    if (c.input.empty()) throw ConfigError("--input is required");
}

// Everything a run needs to extract; owns the LLM plumbing when used.
struct Engine {
    rules::RuleSet rules;
    codebook::Codebook codebook;
    std::unique_ptr<llm::ResponseCache> cache;
    std::unique_ptr<llm::Gateway> gateway;
    std::unique_ptr<agents::AgentBackend> backend;

    explicit Engine(rules::RuleSet r) : rules(std::move(r)), codebook(rules) {}
};

rules::RuleSet load_rules(const RunConfig& c) {
    return c.rules.empty() ? rules::RuleSet::defaults() : rules::RuleSet::load(c.rules);
}

std::unique_ptr<Engine> make_engine(const RunConfig& c) {
    auto e = std::make_unique<Engine>(load_rules(c));
    if (c.backend == Backend::Rules) {
        e->backend = std::make_unique<agents::RuleBackend>(e->rules);
        return e;
    }
    auto gw = llm::GatewayConfig::from_env(c.endpoint);
    if (gw.api_key.empty()) throw ConfigError(std::string("llm backend needs ") + llm::kApiKeyEnv);
    if (gw.endpoint.empty()) {
        throw ConfigError(std::string("llm backend needs an endpoint: set ") + llm::kEndpointEnv + " or --endpoint");
    }
    auto prompts = c.prompts.empty() ? agents::PromptSet::defaults() : agents::PromptSet::load(c.prompts);
    ensure_dir(c.cache_path().parent_path().empty() ? fs::path(".") : c.cache_path().parent_path());
    e->cache = std::make_unique<llm::ResponseCache>(c.cache_path());
    llm::RetryPolicy policy;
    policy.max_in_flight = static_cast<int>(std::max(1u, c.jobs));
    policy.requests_per_minute = c.rpm;
    e->gateway = std::make_unique<llm::Gateway>(gw, std::make_shared<llm::HttpTransport>(), *e->cache, policy);
    agents::LlmSettings settings;
    settings.model_name = c.model_name;
    e->backend = std::make_unique<agents::LlmBackend>(*e->gateway, std::move(prompts), settings, e->rules);
    return e;
}

std::vector<IncidentReport> load_inputs(const RunConfig& c, std::ostream& err) {
    require_input(c);
    auto loaded = ingest::load_reports(c.input);
    if (loaded.rejected_rows || loaded.flagged_rows) {
        err << "ingest: " << loaded.rejected_rows << " row(s) rejected, " << loaded.flagged_rows
            << " flagged\n";
    }
    return std::move(loaded.reports);
}

int cmd_extract(const RunConfig& c, std::ostream& out, std::ostream& err) {
    require_input(c);
    auto engine = make_engine(c);  // configuration problems surface before any work
    auto loaded = ingest::load_reports(c.input);
    ensure_dir(c.out);
    ingest::write_rejects(loaded.rejects, c.out / "rejects.csv");

    agents::PipelineConfig pc;
    pc.jobs = c.jobs;
    pc.codebook = &engine->codebook;
    const auto result = agents::run_pipeline(loaded.reports, *engine->backend, pc);
    const auto n = ingest::write_structured(result.records, c.structured_path());

    const auto& s = result.summary;
    nlohmann::ordered_json j;
    j["total"] = s.total;
    j["ebike_yes"] = s.ebike_yes;
    j["ebike_no"] = s.ebike_no;
    j["unclassified"] = s.unclassified;
    j["extraction_errors"] = s.extraction_errors;
    j["rejected_rows"] = loaded.rejected_rows;
    j["flagged_rows"] = loaded.flagged_rows;
    write_text(c.out / "run_summary.json", j.dump(2) + "\n");

    out << "extract: " << n << " record(s) -> " << c.structured_path().string() << '\n';
    out << "  total " << s.total << ", e-bike yes " << s.ebike_yes << ", no " << s.ebike_no << ", unclassified "
        << s.unclassified << ", extraction errors " << s.extraction_errors << '\n';
    if (!loaded.rejects.empty()) err << "ingest: " << loaded.rejects.size() << " reject(s) listed in rejects.csv\n";
    if (engine->cache) {
        const auto st = engine->cache->stats();
        out << "  llm cache: " << st.entries << " entries, " << st.hits << " hits, " << st.misses << " misses\n";
    }
    return 0;
}

analysis::FitReport run_fit(const RunConfig& c, const std::vector<StructuredIncident>& records,
                            const std::vector<IncidentReport>& reports, std::ostream& err) {
    const codebook::Codebook cb(load_rules(c));
    const auto sample = analysis::assemble_sample(records, reports, c.drop_unspecified_gender, cb);
    err << "fit: " << sample.ebike_records << " e-bike record(s), " << sample.rows.size() << " admissible, "
        << sample.exclusions.size() << " excluded\n";
    return analysis::fit_models(sample, c.dummy_coding ? analysis::Coding::Dummy : analysis::Coding::Numeric,
                                c.alpha);
}

int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto reports = load_inputs(c, err);
    const auto records = ingest::read_structured(c.structured_path());
    const auto r = run_fit(c, records, reports, err);
    ensure_dir(c.out);
    const std::string text = analysis::render_fit_text(r);
    write_text(c.out / "fit_report.txt", text);
    write_text(c.out / "fit_report.json", analysis::render_fit_json(r));
    out << text;
    return 0;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out, std::ostream&) {
    if (c.truth.empty()) throw ConfigError("--truth is required");
    const auto records = ingest::read_structured(c.structured_path());
    const auto truth = metrics::load_truth(c.truth);
    const auto e = metrics::evaluate_components(records, truth);
    ensure_dir(c.out);
    const std::string text = metrics::render_text(e);
    write_text(c.out / "evaluation.txt", text);
    write_text(c.out / "evaluation.json", metrics::render_json(e));
    out << text;
    return 0;
}

int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto reports = load_inputs(c, err);
    const auto records = ingest::read_structured(c.structured_path());
    const auto joined = report::join_records(records, reports);
    report::FitOutcome fit;
    try {
        fit.report = run_fit(c, records, reports, err);
    } catch (const DomainError& e) {
        fit.failure = e.what();
        err << "fit: not fitted: " << e.what() << '\n';
    }
    const auto manifest = report::emit_report(report::build_tables(joined), fit, c.out / "report");
    out << "report: " << manifest.size() << " file(s) -> " << (c.out / "report").string() << '\n';
    return 0;
}

int cmd_all(const RunConfig& c, std::ostream& out, std::ostream& err) {
    int rc = cmd_extract(c, out, err);
    if (rc == 0) rc = cmd_report(c, out, err);
    if (rc == 0 && !c.truth.empty()) rc = cmd_evaluate(c, out, err);
    return rc;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    simulate(c);
    out << "simulate: " << c.simulate_n << " report(s) -> " << (c.out / "simulated_reports.csv").string() << '\n';
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

void simulate(const RunConfig& c) {
    if (c.simulate_n < 1) throw ConfigError("--n must be positive");
    ensure_dir(c.out);
    // numeric full model: age, gender, cause type, weather, road, time, modes
    const std::vector<std::pair<std::string, double>> beta = {
        {"Age", 0.3},     {"Gender", 0.5},        {"Incident Cause Type", -0.6}, {"Weather", 0.8},
        {"Road Condition", -0.5}, {"Time", 0.7}, {"Number of Transportation Modes", 0.4},
    };
    const Eigen::Vector3d theta(1.4, 2.4, 3.4);
    Eigen::VectorXd b(static_cast<Eigen::Index>(beta.size()));
    for (std::size_t i = 0; i < beta.size(); ++i) b[static_cast<Eigen::Index>(i)] = beta[i].second;

    std::mt19937_64 rng(c.seed);
    auto uniform = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int age_lo[] = {6, 15, 25, 65};
    const int age_hi[] = {14, 24, 64, 90};

    std::ofstream f(c.out / "simulated_reports.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write simulated reports");
    csv::write_row(f, {"record_id", "year", "state", "narrative", "age", "gender", "severity"});
    for (int i = 0; i < c.simulate_n; ++i) {
        const std::string id = "S" + std::to_string(100000 + i);
        const int year = pick(2017, 2023);
        if (uniform() < 0.1) {
            // not an e-bike incident; gated out before extraction
            csv::write_row(f, {id, std::to_string(year), "", "Child fell from a kick scooter in the driveway.",
                               std::to_string(pick(5, 12)), "Female", std::to_string(pick(1, 4))});
            continue;
        }
        const int age_cat = pick(1, 4);
        const int age = pick(age_lo[age_cat - 1], age_hi[age_cat - 1]);
        const int gender = pick(1, 2);
        const int cause = uniform() < 0.45 ? 1 : (uniform() < 0.85 ? 2 : 3);
        const int weather = uniform() < 0.3 ? 2 : 1;
        const int road = uniform() < 0.3 ? 2 : 1;
        const int time = uniform() < 0.3 ? 2 : 1;
        const int modes = uniform() < 0.35 ? 2 : 1;

        Eigen::VectorXd x(7);
        x << age_cat, gender, cause, weather, road, time, modes;
        const Eigen::VectorXd probs = ordlogit::cumulative_probs(theta, b, x);
        double u = uniform(), acc = 0;
        int y = static_cast<int>(probs.size());
        for (Eigen::Index k = 0; k < probs.size(); ++k) {
            acc += probs[k];
            if (u < acc) {
                y = static_cast<int>(k) + 1;
                break;
            }
        }

        std::string n = "A " + std::to_string(age) + "-year-old " + (gender == 1 ? "female" : "male") +
                        " was riding an e-bike " + (time == 2 ? "at night" : "in the morning") +
                        (weather == 2 ? " in the rain" : " on a clear day") +
                        (road == 2 ? " on a wet road" : " on a dry road");
        n += modes == 2 ? " when a car pulled out. " : ". ";
        if (cause == 1) n += "The rider lost control and crashed.";
        if (cause == 2) n += "The battery caught fire.";
        if (cause == 3) n += "The brake cable snapped and the rider crashed.";

        std::string gender_raw = gender == 1 ? "Female" : "Male";
        int severity = y;
        // a few records the model filter must drop
        if (uniform() < 0.03) severity = -1;
        else if (uniform() < 0.03) gender_raw = "Unspecified";
        csv::write_row(f, {id, std::to_string(year), "CA", n, std::to_string(age), gender_raw, std::to_string(severity)});
    }
    f.close();
    if (!f) throw IoError("write failed for simulated reports");

    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["n"] = c.simulate_n;
    j["coding"] = "numeric";
    for (const auto& [name, v] : beta) j["beta"][name] = v;
    j["theta"] = {theta[0], theta[1], theta[2]};
    write_text(c.out / "simulation_truth.json", j.dump(2) + "\n");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    std::string backend = "rules";
    CLI::App app{"E-bike incident extraction and severity modeling"};
    app.require_subcommand(1);

    auto add_io = [&](CLI::App* s) {
        s->add_option("--input", c.input, "incident reports (.csv or .jsonl)");
        s->add_option("--out", c.out, "output directory")->capture_default_str();
        s->add_option("--structured", c.structured, "structured JSONL (default <out>/structured.jsonl)");
        s->add_option("--rules", c.rules, "rules.toml overriding the bundled vocabularies");
    };
    auto add_extract = [&](CLI::App* s) {
        s->add_option("--backend", backend, "rules or llm")->check(CLI::IsMember({"rules", "llm"}))->capture_default_str();
        s->add_option("--model", c.model_name, "LLM model name")->capture_default_str();
        s->add_option("--cache", c.cache, "LLM response cache (default <out>/llm_cache.jsonl)");
        s->add_option("--prompts", c.prompts, "directory of prompt templates");
        s->add_option("--endpoint", c.endpoint, "chat completion URL (overrides EBIKE_LLM_ENDPOINT)");
        s->add_option("--jobs", c.jobs, "worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();
        s->add_option("--rpm", c.rpm, "LLM requests per minute (0: unlimited)")->capture_default_str();
    };
    auto add_model = [&](CLI::App* s) {
        s->add_flag("--drop-unspecified-gender", c.drop_unspecified_gender, "drop records without Female/Male");
        s->add_flag("--dummy-coding", c.dummy_coding, "indicator coding instead of numeric codes");
        s->add_option("--alpha", c.alpha, "LR test significance level")->check(CLI::Range(1e-9, 0.5))->capture_default_str();
    };
    auto add_truth = [&](CLI::App* s, bool required) {
        auto* o = s->add_option("--truth", c.truth, "ground truth CSV record_id,class,caused");
        if (required) o->required();
    };

    auto* extract = app.add_subcommand("extract", "classify and extract every report");
    add_io(extract);
    add_extract(extract);
    auto* fit = app.add_subcommand("fit", "fit restricted and full severity models with an LR test");
    add_io(fit);
    add_model(fit);
    auto* evaluate = app.add_subcommand("evaluate", "score component-cause links against ground truth");
    add_io(evaluate);
    add_truth(evaluate, true);
    auto* rep = app.add_subcommand("report", "write aggregate tables, charts, fit report and manifest");
    add_io(rep);
    add_model(rep);
    auto* all = app.add_subcommand("all", "extract, report, and evaluate when --truth is given");
    add_io(all);
    add_extract(all);
    add_model(all);
    add_truth(all, false);
    auto* sim = app.add_subcommand("simulate", "write a synthetic corpus from a known model");
    sim->add_option("--out", c.out, "output directory")->capture_default_str();
    sim->add_option("--seed", c.seed, "random seed")->capture_default_str();
    sim->add_option("--n", c.simulate_n, "number of reports")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    c.backend = backend == "llm" ? Backend::Llm : Backend::Rules;

    try {
        if (extract->parsed()) return cmd_extract(c, out, err);
        if (fit->parsed()) return cmd_fit(c, out, err);
        if (evaluate->parsed()) return cmd_evaluate(c, out, err);
        if (rep->parsed()) return cmd_report(c, out, err);
        if (all->parsed()) return cmd_all(c, out, err);
        if (sim->parsed()) return cmd_simulate(c, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace ebike::cli
