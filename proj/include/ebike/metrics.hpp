#pragma once

// Per-class confusion counts, precision/recall/F1 and support-weighted F1 for
// component-cause detection.

#include "ebike/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ebike::metrics {

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;
    bool operator==(const ConfusionCounts&) const = default;
};

using ClassSets = std::map<std::string, std::set<std::string>>;  // record id -> classes

struct ClassCounts {
    std::string class_name;
    ConfusionCounts counts;
};

// Both maps must cover the same record ids (DomainError otherwise).
std::vector<ClassCounts> tally(const ClassSets& predictions, const ClassSets& truths,
                               const std::vector<std::string>& classes);

// nullopt marks 0/0.
struct Prf {
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};
Prf precision_recall_f1(const ConfusionCounts& c);

struct ClassMetrics {
    std::string class_name;
    ConfusionCounts counts;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    long support = 0;  // tp + fn
};

ClassMetrics class_metrics(std::string class_name, const ConfusionCounts& c);

// sum f1 * support / sum support over classes with support > 0. An undefined
// f1 counts as 0 and adds a warning. Throws DomainError if every support is 0.
double weighted_f1(const std::vector<ClassMetrics>& per_class, std::vector<std::string>* warnings = nullptr);

// Ground truth: CSV record_id,class,caused. Every record id present is
// evaluated; an empty class column marks a record with no component.
struct Truth {
    std::map<std::string, std::set<Component>> related;
    std::map<std::string, std::set<Component>> caused;
    std::vector<std::string> ids;  // file order, unique
};
Truth load_truth(const std::filesystem::path& path);

struct Evaluation {
    std::vector<ClassMetrics> classes;  // component order
    double weighted_f1 = 0.0;
    std::size_t records = 0;
    std::vector<std::string> warnings;
};

// Scores predicted caused_by links of e-bike records against the truth. The
// truth ids and the e-bike record ids must match exactly; otherwise a
// DomainError lists the offending ids.
Evaluation evaluate_components(const std::vector<StructuredIncident>& records, const Truth& truth);

// Two-decimal display; undefined values render as an em dash.
std::string format_metric(const std::optional<double>& v);
std::string render_text(const Evaluation& e);
std::string render_json(const Evaluation& e);

}  // namespace ebike::metrics
