#include "ebike/metrics.hpp"

#include "ebike/csv.hpp"
#include "ebike/errors.hpp"
#include "ebike/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ebike::metrics {

namespace {

std::optional<double> ratio(long num, long den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::string list_ids(const std::vector<std::string>& ids) {
    std::string out;
    const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + ids[i];
    if (ids.size() > shown) out += ", ... (" + std::to_string(ids.size()) + " total)";
    return out;
}

bool parse_flag(const std::string& raw, bool& out) {
    const std::string v = text::to_lower(text::trim(raw));
    if (v == "1" || v == "yes" || v == "y" || v == "true") {
        out = true;
        return true;
    }
    if (v == "0" || v == "no" || v == "n" || v == "false" || v.empty()) {
        out = false;
        return true;
    }
    return false;
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::vector<ClassCounts> tally(const ClassSets& predictions, const ClassSets& truths,
                               const std::vector<std::string>& classes) {
    std::vector<std::string> missing;
    for (const auto& [id, _] : predictions) {
        if (!truths.count(id)) missing.push_back(id);
    }
    for (const auto& [id, _] : truths) {
        if (!predictions.count(id)) missing.push_back(id);
    }
    if (!missing.empty()) throw DomainError("record ids differ between predictions and truth: " + list_ids(missing));

    std::vector<ClassCounts> out;
    for (const auto& c : classes) {
        ConfusionCounts k;
        for (const auto& [id, pred] : predictions) {
            const bool p = pred.count(c) > 0;
            const bool t = truths.at(id).count(c) > 0;
            if (p && t) ++k.tp;
            else if (p) ++k.fp;
            else if (t) ++k.fn;
            else ++k.tn;
        }
        out.push_back({c, k});
    }
    return out;
}

Prf precision_recall_f1(const ConfusionCounts& c) {
    Prf r;
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    if (r.precision && r.recall && *r.precision + *r.recall > 0) {
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    }
    return r;
}

ClassMetrics class_metrics(std::string class_name, const ConfusionCounts& c) {
    const Prf prf = precision_recall_f1(c);
    return {std::move(class_name), c, prf.precision, prf.recall, prf.f1, c.tp + c.fn};
}

double weighted_f1(const std::vector<ClassMetrics>& per_class, std::vector<std::string>* warnings) {
    double num = 0.0;
    long den = 0;
    for (const auto& m : per_class) {
        if (m.support <= 0) continue;
        if (!m.f1) {
            if (warnings) warnings->push_back("F1 undefined for " + m.class_name + "; counted as 0");
        } else {
            num += *m.f1 * static_cast<double>(m.support);
        }
        den += m.support;
    }
    if (den == 0) throw DomainError("weighted F1 undefined: every class has zero support");
    return num / static_cast<double>(den);
}

Truth load_truth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read truth file " + path.string());
    csv::Reader reader(in);
    const auto header = reader.next();
    if (!header) throw SchemaError("truth file " + path.string() + " is empty");
    const std::vector<std::string> expected{"record_id", "class", "caused"};
    std::vector<std::string> cols;
    for (const auto& h : *header) cols.push_back(text::trim(h));
    if (cols != expected) throw SchemaError("truth file header must be record_id,class,caused");

    Truth t;
    while (auto row = reader.next()) {
        if (row->size() == 1 && text::trim((*row)[0]).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(reader.line());
        if (row->size() != 3) throw SchemaError(where + ": expected 3 fields");
        const std::string id = text::trim((*row)[0]);
        if (id.empty()) throw SchemaError(where + ": empty record_id");
        if (!t.related.count(id)) {
            t.ids.push_back(id);
            t.related[id];
            t.caused[id];
        }
        const std::string cls = text::trim((*row)[1]);
        bool caused = false;
        if (!parse_flag((*row)[2], caused)) throw SchemaError(where + ": caused must be yes/no or 1/0");
        if (cls.empty()) {
            if (caused) throw SchemaError(where + ": caused set without a class");
            continue;
        }
        const auto comp = parse_component(cls);
        if (!comp) throw SchemaError(where + ": unknown component class '" + cls + "'");
        t.related[id].insert(*comp);
        if (caused) t.caused[id].insert(*comp);
    }
    if (t.ids.empty()) throw SchemaError("truth file " + path.string() + " has no records");
    return t;
}

Evaluation evaluate_components(const std::vector<StructuredIncident>& records, const Truth& truth) {
    ClassSets pred, gold;
    for (const auto& r : records) {
        if (!r.is_ebike) continue;
        auto& s = pred[r.record_id];
        if (r.links) {
            for (auto c : r.links->caused_by) s.insert(std::string(component_name(c)));
        }
    }
    for (const auto& [id, comps] : truth.caused) {
        auto& s = gold[id];
        for (auto c : comps) s.insert(std::string(component_name(c)));
    }

    std::vector<std::string> only_pred, only_truth;
    for (const auto& [id, _] : pred) {
        if (!gold.count(id)) only_pred.push_back(id);
    }
    for (const auto& [id, _] : gold) {
        if (!pred.count(id)) only_truth.push_back(id);
    }
    if (!only_pred.empty() || !only_truth.empty()) {
        std::string msg = "record ids do not match the truth file";
        if (!only_truth.empty()) msg += "; in truth but not e-bike predictions: " + list_ids(only_truth);
        if (!only_pred.empty()) msg += "; e-bike predictions without truth: " + list_ids(only_pred);
        throw DomainError(msg);
    }

    std::vector<std::string> classes;
    for (auto c : kAllComponents) classes.emplace_back(component_name(c));
    Evaluation e;
    e.records = pred.size();
    for (const auto& cc : tally(pred, gold, classes)) e.classes.push_back(class_metrics(cc.class_name, cc.counts));
    e.weighted_f1 = weighted_f1(e.classes, &e.warnings);
    return e;
}

std::string format_metric(const std::optional<double>& v) {
    if (!v) return "\u2014";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return buf;
}

std::string render_text(const Evaluation& e) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %5s %5s %5s %5s %9s %7s %8s\n", "Caused By", "TP", "FP", "FN",
                  "Supp", "Precision", "Recall", "F1 Score");
    out << line;
    for (const auto& m : e.classes) {
        // pad by display width; the em dash is one column but three bytes
        auto pad = [](const std::string& s, int w) {
            const int cols = s == "\u2014" ? 1 : static_cast<int>(s.size());
            return std::string(static_cast<std::size_t>(std::max(0, w - cols)), ' ') + s;
        };
        std::snprintf(line, sizeof line, "%-18s %5ld %5ld %5ld %5ld ", m.class_name.c_str(), m.counts.tp,
                      m.counts.fp, m.counts.fn, m.support);
        out << line << pad(format_metric(m.precision), 9) << ' ' << pad(format_metric(m.recall), 7) << ' '
            << pad(format_metric(m.f1), 8) << '\n';
    }
    out << "Weighted F1 Score: " << format_metric(e.weighted_f1) << "  (records evaluated: " << e.records << ")\n";
    for (const auto& w : e.warnings) out << "warning: " << w << '\n';
    return out.str();
}

std::string render_json(const Evaluation& e) {
    nlohmann::ordered_json j;
    j["records"] = e.records;
    auto& classes = j["classes"] = nlohmann::ordered_json::array();
    for (const auto& m : e.classes) {
        classes.push_back({{"class", m.class_name},
                           {"tp", m.counts.tp},
                           {"fp", m.counts.fp},
                           {"fn", m.counts.fn},
                           {"tn", m.counts.tn},
                           {"support", m.support},
                           {"precision", opt_json(m.precision)},
                           {"recall", opt_json(m.recall)},
                           {"f1", opt_json(m.f1)}});
    }
    j["weighted_f1"] = e.weighted_f1;
    j["warnings"] = e.warnings;
    return j.dump(2) + "\n";
}

}  // namespace ebike::metrics
