#pragma once

// Joins structured records with their source reports, codes them, and fits
// the restricted and full severity models.
//
//   restricted: age, gender, cause type, number of modes
//   full:       restricted + weather, road, time

#include "ebike/codebook.hpp"
#include "ebike/inference.hpp"
#include "ebike/ingest.hpp"
#include "ebike/ordlogit.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ebike::analysis {

struct ModelRow {
    std::string record_id;
    PredictorVector predictors;
    int severity_code = 0;
};

struct Exclusion {
    std::string record_id;
    std::string reason;
};

struct ModelSample {
    std::vector<ModelRow> rows;
    std::vector<Exclusion> exclusions;  // e-bike records that could not be coded
    ingest::FilterSummary filter;
    std::size_t ebike_records = 0;
};

// Only e-bike records whose report survives filter_for_model are considered.
// A structured record without a matching report is a DomainError.
ModelSample assemble_sample(const std::vector<StructuredIncident>& records,
                            const std::vector<IncidentReport>& reports, bool drop_unspecified_gender,
                            const codebook::Codebook& codebook = codebook::Codebook::defaults());

enum class Coding { Numeric, Dummy };
enum class Spec { Restricted, Full };

std::string_view coding_name(Coding c);

// Severity codes are compacted to ranks 1..K in ascending order of the codes
// present. Throws DomainError when fewer than two levels are observed.
struct Outcome {
    std::vector<int> y;
    std::vector<int> levels;  // levels[k-1] = severity code of rank k
};
Outcome compact_severity(const std::vector<ModelRow>& rows);

// Numeric coding: one column per variable holding its code. Dummy coding:
// indicators against the bases Children, Female, Equipment-Related and
// Favorable; number of modes stays numeric.
ordlogit::ModelData design(const std::vector<ModelRow>& rows, Spec spec, Coding coding);

struct ModelResult {
    std::string label;
    ordlogit::OrderedLogitFit fit;
    double pseudo_r2 = 0.0;
    ordlogit::InformationCriteria ic;
};

struct FitReport {
    Coding coding = Coding::Numeric;
    std::vector<int> severity_levels;
    ModelResult full;
    ModelResult restricted;
    inference::LrTestResult lr;
    std::vector<std::string> notes;
};

FitReport fit_models(const ModelSample& sample, Coding coding, double alpha = 0.05,
                     const ordlogit::FitConfig& config = {});

std::string render_fit_text(const FitReport& r);
std::string render_fit_json(const FitReport& r);

}  // namespace ebike::analysis
