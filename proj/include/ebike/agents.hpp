#pragma once

// The four extraction agents and the gated pipeline that runs them:
//
//   classify_ebike ──yes──> extract_factors -> determine_cause
//                    └────> detect_component_links
//
// Each agent runs against an AgentBackend: the deterministic RuleBackend
// (keyword vocabularies from rules.toml) or the LlmBackend (zero-shot prompts
// through llm::Gateway).

#include "ebike/codebook.hpp"
#include "ebike/llm_gateway.hpp"
#include "ebike/rules.hpp"
#include "ebike/text.hpp"
#include "ebike/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ebike::agents {

// Implementations must be safe to call concurrently.
class AgentBackend {
public:
    virtual ~AgentBackend() = default;

    virtual EbikeLabel classify(std::string_view narrative) = 0;
    virtual ExtractedFactors extract(std::string_view narrative) = 0;
    virtual CauseDetermination cause(std::string_view narrative, const ExtractedFactors& factors) = 0;
    virtual ComponentLinkage components(std::string_view narrative) = 0;
};

// Agent entry points. They check preconditions (non-empty narrative) and
// normalize outputs (sorted components, caused_by within related, deduplicated
// modes) whatever the backend returned.
EbikeLabel classify_ebike(std::string_view narrative, AgentBackend& backend);
ExtractedFactors extract_factors(std::string_view narrative, AgentBackend& backend);
CauseDetermination determine_cause(std::string_view narrative, const ExtractedFactors& factors,
                                   AgentBackend& backend);
ComponentLinkage detect_component_links(std::string_view narrative, AgentBackend& backend);

// ---------------------------------------------------------------------------
// Rule backend
// ---------------------------------------------------------------------------

class RuleBackend : public AgentBackend {
public:
    explicit RuleBackend(const rules::RuleSet& rules = rules::RuleSet::defaults());

    EbikeLabel classify(std::string_view narrative) override;
    ExtractedFactors extract(std::string_view narrative) override;
    CauseDetermination cause(std::string_view narrative, const ExtractedFactors& factors) override;
    ComponentLinkage components(std::string_view narrative) override;

    const codebook::Codebook& codebook() const { return codebook_; }

private:
    struct Vocab {
        std::vector<std::string> labels;
        std::vector<text::TaggedPattern> patterns;
    };
    static Vocab compile(const rules::Vocabulary& v);
    // First-appearing label, or the no-information sentinel.
    static std::string first_label(const Vocab& vocab, const std::string& normalized);
    std::vector<std::string> find_modes(const std::string& normalized) const;
    std::vector<CauseLabel> component_causes(const ComponentLinkage& links) const;

    codebook::Codebook codebook_;
    std::vector<text::TaggedPattern> ebike_;
    Vocab modes_;
    std::size_t ebike_mode_ = static_cast<std::size_t>(-1);
    std::vector<text::Pattern> generic_modes_;
    Vocab time_;
    Vocab weather_;
    Vocab road_;
    std::vector<std::vector<text::TaggedPattern>> component_patterns_;  // by Component index
    std::vector<std::vector<text::Pattern>> component_excludes_;
    std::vector<text::TaggedPattern> failure_verbs_;
    std::vector<std::optional<CauseLabel>> component_cause_;  // by Component index
};

// ---------------------------------------------------------------------------
// LLM backend
// ---------------------------------------------------------------------------

// Named prompt templates with {placeholder} substitution. Names: classify,
// modes, time, weather, road, cause, cause_type, component_caused.
class PromptSet {
public:
    static PromptSet defaults();
    // Defaults, with any <name>.txt found in dir replacing the bundled text.
    static PromptSet load(const std::filesystem::path& dir);

    // Throws ConfigError for an unknown template or an unfilled placeholder.
    std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;
    const std::map<std::string, std::string>& templates() const { return templates_; }

private:
    std::map<std::string, std::string> templates_;
};

struct LlmSettings {
    std::string model_name = "gpt-4";
    double temperature = 0.0;
    int max_tokens = 256;
};

// Reply parsing shared with tests.
std::optional<EbikeLabel> parse_yes_no(std::string_view reply);
// Strips quotes/punctuation; maps any "no certain information" reply to the
// sentinel. Returns nullopt for an empty reply.
std::optional<std::string> parse_free_text(std::string_view reply);
std::vector<std::string> parse_list(std::string_view reply);

class LlmBackend : public AgentBackend {
public:
    LlmBackend(llm::Gateway& gateway, PromptSet prompts, LlmSettings settings,
               const rules::RuleSet& rules = rules::RuleSet::defaults());

    EbikeLabel classify(std::string_view narrative) override;
    ExtractedFactors extract(std::string_view narrative) override;
    CauseDetermination cause(std::string_view narrative, const ExtractedFactors& factors) override;
    ComponentLinkage components(std::string_view narrative) override;

private:
    std::string ask(const std::string& prompt);
    // One strict-format reprompt on parse failure, then ExtractionError.
    EbikeLabel ask_yes_no(const std::string& prompt, std::string_view what);
    std::string ask_free_text(const std::string& prompt, std::string_view what);

    llm::Gateway& gateway_;
    PromptSet prompts_;
    LlmSettings settings_;
    RuleBackend keywords_;  // component relation is keyword-based for both backends
};

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct RunSummary {
    std::size_t total = 0;
    std::size_t ebike_yes = 0;
    std::size_t ebike_no = 0;
    std::size_t unclassified = 0;  // classification itself failed
    std::size_t extraction_errors = 0;
};

struct PipelineConfig {
    unsigned jobs = 1;
    // Used to attach predictor vectors; nullptr skips them.
    const codebook::Codebook* codebook = &codebook::Codebook::defaults();
};

struct PipelineResult {
    std::vector<StructuredIncident> records;  // input order
    RunSummary summary;
};

// Classifies every report and runs the other agents only on yes-labeled
// ones. Per-record failures become error records; ConfigError aborts the run.
PipelineResult run_pipeline(const std::vector<IncidentReport>& reports, AgentBackend& backend,
                            const PipelineConfig& config = {});

}  // namespace ebike::agents
