#include "ebike/agents.hpp"

#include "ebike/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace ebike::agents {

namespace {

void require_narrative(std::string_view narrative) {
    if (text::trim(narrative).empty()) throw PreconditionError("narrative is empty");
}

template <class T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

EbikeLabel classify_ebike(std::string_view narrative, AgentBackend& backend) {
    require_narrative(narrative);
    return backend.classify(narrative);
}

ExtractedFactors extract_factors(std::string_view narrative, AgentBackend& backend) {
    require_narrative(narrative);
    ExtractedFactors f = backend.extract(narrative);
    std::vector<std::string> modes;
    for (auto& m : f.modes) {
        std::string t = text::trim(m);
        if (t.empty()) continue;
        if (std::find(modes.begin(), modes.end(), t) == modes.end()) modes.push_back(std::move(t));
    }
    f.modes = std::move(modes);
    f.modes_count = static_cast<int>(f.modes.size());
    for (auto* s : {&f.time_raw, &f.weather_raw, &f.road_raw, &f.cause_raw}) {
        if (text::trim(*s).empty()) *s = std::string(kNoInformation);
    }
    return f;
}

CauseDetermination determine_cause(std::string_view narrative, const ExtractedFactors& factors,
                                   AgentBackend& backend) {
    require_narrative(narrative);
    CauseDetermination d = backend.cause(narrative, factors);
    d.matched.erase(std::remove(d.matched.begin(), d.matched.end(), CauseLabel::Unclear), d.matched.end());
    sort_unique(d.matched);
    if (!d.matched.empty()) {
        // label and type always follow from the evidence set
        d.cause_label = d.matched.front();
        d.cause_type = codebook::combine_cause_types(d.matched);
    } else if (d.cause_label != CauseLabel::Unclear) {
        d.matched.push_back(d.cause_label);
        d.cause_type = codebook::combine_cause_types(d.matched);
    } else {
        d.cause_type = CauseType::Unclear;
    }
    return d;
}

ComponentLinkage detect_component_links(std::string_view narrative, AgentBackend& backend) {
    require_narrative(narrative);
    ComponentLinkage links = backend.components(narrative);
    sort_unique(links.related);
    sort_unique(links.caused_by);
    std::vector<Component> caused;
    std::set_intersection(links.caused_by.begin(), links.caused_by.end(), links.related.begin(),
                          links.related.end(), std::back_inserter(caused));
    links.caused_by = std::move(caused);
    return links;
}

// ---------------------------------------------------------------------------

namespace {

enum class Outcome { No, Yes, Unclassified, ExtractionError };

Outcome process(const IncidentReport& report, AgentBackend& backend, const PipelineConfig& config,
                StructuredIncident& out) {
    out.record_id = report.record_id;
    try {
        out.is_ebike = classify_ebike(report.narrative, backend) == EbikeLabel::Yes;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        out.status = RecordStatus::Error;
        out.error = std::string("classification: ") + e.what();
        return Outcome::Unclassified;
    }
    if (!out.is_ebike) return Outcome::No;

    try {
        auto factors = extract_factors(report.narrative, backend);
        auto cause = determine_cause(report.narrative, factors, backend);
        auto links = detect_component_links(report.narrative, backend);
        out.factors = std::move(factors);
        out.cause = std::move(cause);
        out.links = std::move(links);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        out.status = RecordStatus::Error;
        out.error = std::string("extraction: ") + e.what();
        out.factors.reset();
        out.cause.reset();
        out.links.reset();
        return Outcome::ExtractionError;
    }
    if (config.codebook) out.predictors = config.codebook->build_predictor_vector(out, report).vector;
    return Outcome::Yes;
}

}  // namespace

PipelineResult run_pipeline(const std::vector<IncidentReport>& reports, AgentBackend& backend,
                            const PipelineConfig& config) {
    PipelineResult result;
    result.records.resize(reports.size());
    std::vector<Outcome> outcomes(reports.size(), Outcome::No);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr fatal;
    std::mutex fatal_mu;

    auto worker = [&] {
        while (!abort.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= reports.size()) return;
            try {
                outcomes[i] = process(reports[i], backend, config, result.records[i]);
            } catch (...) {
                std::lock_guard lock(fatal_mu);
                if (!fatal) fatal = std::current_exception();
                abort = true;
            }
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(reports.size())));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    }
    if (fatal) std::rethrow_exception(fatal);

    auto& s = result.summary;
    s.total = reports.size();
    for (auto o : outcomes) {
        switch (o) {
            case Outcome::No: ++s.ebike_no; break;
            case Outcome::Yes: ++s.ebike_yes; break;
            case Outcome::Unclassified: ++s.unclassified; break;
            case Outcome::ExtractionError:
                ++s.ebike_yes;
                ++s.extraction_errors;
                break;
        }
    }
    return result;
}

}  // namespace ebike::agents
