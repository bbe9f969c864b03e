#include "ebike/analysis.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ebike::analysis {

namespace {

std::string fmt(const char* spec, double v) {
    if (std::isnan(v)) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Table-style p-value: three decimals, "0" when it rounds away entirely.
std::string fmt_p(double p) {
    if (std::isnan(p)) return "n/a";
    if (p < 0.0005) return "0";
    return fmt("%.3f", p);
}

std::string levels_string(const std::vector<int>& levels) {
    std::string s;
    for (std::size_t i = 0; i < levels.size(); ++i) s += (i ? "," : "") + std::to_string(levels[i]);
    return s;
}

void model_block(std::ostringstream& out, const ModelResult& m) {
    const auto& f = m.fit;
    const auto est = f.estimates();
    const auto wald = ordlogit::wald_p_values(f);
    char line[256];
    for (Eigen::Index k = 0; k < est.size(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        const std::string label = k == 0 ? m.label : "";
        std::string p = fmt_p(wald.p_values[i]);
        if (wald.unreliable[i]) p += " (!)";
        std::snprintf(line, sizeof line, "%-11s %-34s %10s %11s %10s  %s\n", label.c_str(), f.names[i].c_str(),
                      fmt("%.3f", est[k]).c_str(), fmt("%.3f", f.se[k]).c_str(), p.c_str(),
                      ordlogit::significance_stars(wald.p_values[i]).c_str());
        out << line;
    }
    out << "Pseudo R2 (" << m.label << "): " << fmt("%.3f", m.pseudo_r2) << "   converged: "
        << (f.converged ? "yes" : "no") << " after " << f.iterations << " iteration(s)\n";
    for (const auto& w : f.warnings) out << "  warning: " << w << '\n';
}

nlohmann::ordered_json num(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json model_json(const ModelResult& m) {
    const auto& f = m.fit;
    const auto est = f.estimates();
    const auto wald = ordlogit::wald_p_values(f);
    nlohmann::ordered_json j;
    j["n"] = f.n;
    j["k"] = f.parameter_count();
    j["ll_null"] = num(f.ll_null);
    j["ll_model"] = num(f.ll_model);
    j["pseudo_r2"] = num(m.pseudo_r2);
    j["aic"] = num(m.ic.aic);
    j["bic"] = num(m.ic.bic);
    j["converged"] = f.converged;
    j["iterations"] = f.iterations;
    auto& coefs = j["coefficients"] = nlohmann::ordered_json::array();
    const auto p = static_cast<std::size_t>(f.beta.size());
    for (Eigen::Index k = 0; k < est.size(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        coefs.push_back({{"name", f.names[i]},
                         {"kind", i < p ? "coefficient" : "threshold"},
                         {"estimate", num(est[k])},
                         {"std_error", num(f.se[k])},
                         {"z", num(f.z[k])},
                         {"p_value", num(wald.p_values[i])},
                         {"significance", ordlogit::significance_stars(wald.p_values[i])},
                         {"unreliable", static_cast<bool>(wald.unreliable[i])}});
    }
    j["warnings"] = f.warnings;
    return j;
}

}  // namespace

std::string render_fit_text(const FitReport& r) {
    std::ostringstream out;
    char line[256];
    out << "Ordered Logit Model\n";
    out << "coding: " << coding_name(r.coding) << "; severity levels (rank order): "
        << levels_string(r.severity_levels) << "\n\n";
    std::snprintf(line, sizeof line, "%-11s %-34s %10s %11s %10s  %s\n", "Model", "Coeff", "Estimate",
                  "Std. Error", "p-value", "Significance");
    out << line;
    model_block(out, r.full);
    out << '\n';
    model_block(out, r.restricted);

    out << "\nLikelihood Ratio Test\n";
    std::snprintf(line, sizeof line, "%-11s %6s %12s %12s %10s %10s %4s\n", "Model", "N", "ll(null)", "ll(model)",
                  "AIC", "BIC", "k");
    out << line;
    for (const auto* m : {&r.full, &r.restricted}) {
        std::snprintf(line, sizeof line, "%-11s %6d %12.3f %12.3f %10.3f %10.3f %4d\n", m->label.c_str(), m->fit.n,
                      m->fit.ll_null, m->fit.ll_model, m->ic.aic, m->ic.bic, m->fit.parameter_count());
        out << line;
    }
    const auto& lr = r.lr;
    out << "LR chi2(" << lr.df << ")      " << fmt("%.3f", lr.lr) << "   = -2 x (" << fmt("%.3f", lr.ll_restricted)
        << " - (" << fmt("%.3f", lr.ll_full) << "))\n";
    out << "Prob > chi2     " << fmt("%.4f", lr.p_value) << "   (p = " << fmt("%.3e", lr.p_value) << ", df = "
        << lr.df << " from parameter counts " << r.full.fit.parameter_count() << " - "
        << r.restricted.fit.parameter_count() << ")\n";
    out << "critical value at alpha " << fmt("%.3g", lr.alpha) << ": " << fmt("%.3f", lr.critical_value) << "; "
        << (lr.reject ? "reject" : "do not reject") << " the restricted model\n";
    for (const auto& w : lr.warnings) out << "warning: " << w << '\n';
    for (const auto& n : r.notes) out << "note: " << n << '\n';
    out << "\nSignificance: ** p < 0.05, *** p < 0.01; (!) standard error unreliable\n";
    return out.str();
}

std::string render_fit_json(const FitReport& r) {
    nlohmann::ordered_json j;
    j["coding"] = std::string(coding_name(r.coding));
    j["severity_levels"] = r.severity_levels;
    j["models"]["full"] = model_json(r.full);
    j["models"]["restricted"] = model_json(r.restricted);
    const auto& lr = r.lr;
    j["lr_test"] = {{"lr", num(lr.lr)},
                    {"df", lr.df},
                    {"p_value", num(lr.p_value)},
                    {"alpha", lr.alpha},
                    {"critical_value", num(lr.critical_value)},
                    {"reject", lr.reject},
                    {"ll_restricted", num(lr.ll_restricted)},
                    {"ll_full", num(lr.ll_full)},
                    {"warnings", lr.warnings}};
    j["notes"] = r.notes;
    return j.dump(2) + "\n";
}

}  // namespace ebike::analysis
