#include "ebike/ordlogit.hpp"

#include "ebike/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace ebike::ordlogit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double logistic(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// f = F(1 - F); zero at +-infinity.
double density(double t) {
    if (std::isinf(t)) return 0.0;
    const double F = logistic(t);
    return F * (1.0 - F);
}

double density_prime(double t) {
    if (std::isinf(t)) return 0.0;
    const double F = logistic(t);
    return F * (1.0 - F) * (1.0 - 2.0 * F);
}

// F(a) - F(b) for a > b, via survival functions when both are positive.
double interval_prob(double a, double b) {
    if (b > 0) return logistic(-b) - logistic(-a);
    return logistic(a) - logistic(b);
}

bool strictly_increasing(const Eigen::VectorXd& theta) {
    for (Eigen::Index j = 1; j < theta.size(); ++j) {
        if (!(theta[j] > theta[j - 1])) return false;
    }
    return true;
}

struct Cut {
    double a;  // theta_y - eta
    double b;  // theta_{y-1} - eta
};

Cut cuts(const Eigen::VectorXd& theta, int y, double eta) {
    const int K = static_cast<int>(theta.size()) + 1;
    return {y == K ? kInf : theta[y - 1] - eta, y == 1 ? -kInf : theta[y - 2] - eta};
}

void check_params(const Params& params, const ModelData& data) {
    if (params.beta.size() != data.p()) throw DomainError("beta length does not match covariate count");
    if (params.theta.size() != data.categories - 1) throw DomainError("theta length must be K-1");
}

// Reparameterized coordinates psi = [beta, theta_1, log-gaps].
Eigen::VectorXd to_psi(const Params& params) {
    const auto p = params.beta.size();
    const auto m = params.theta.size();
    Eigen::VectorXd psi(p + m);
    psi.head(p) = params.beta;
    psi[p] = params.theta[0];
    for (Eigen::Index j = 1; j < m; ++j) psi[p + j] = std::log(params.theta[j] - params.theta[j - 1]);
    return psi;
}

Params from_psi(const Eigen::VectorXd& psi, Eigen::Index p) {
    Params out;
    const auto m = psi.size() - p;
    out.beta = psi.head(p);
    out.theta.resize(m);
    out.theta[0] = psi[p];
    for (Eigen::Index j = 1; j < m; ++j) out.theta[j] = out.theta[j - 1] + std::exp(psi[p + j]);
    return out;
}

// d(beta, theta)/d psi
Eigen::MatrixXd jacobian(const Eigen::VectorXd& psi, Eigen::Index p) {
    const auto P = psi.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(P, P);
    J.topLeftCorner(p, p).setIdentity();
    const auto m = P - p;
    for (Eigen::Index j = 0; j < m; ++j) {
        J(p + j, p) = 1.0;
        for (Eigen::Index k = 1; k <= j; ++k) J(p + j, p + k) = std::exp(psi[p + k]);
    }
    return J;
}

// Moore-Penrose style inverse of a symmetric matrix, with eigenvalues taken in
// absolute value so the Newton direction is always a descent direction.
Eigen::MatrixXd abs_pinv(const Eigen::MatrixXd& H, bool* singular = nullptr) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double top = lam.cwiseAbs().maxCoeff();
    const double cut = std::max(top, 1.0) * 1e-10;
    Eigen::VectorXd inv(lam.size());
    bool sing = false;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (std::abs(lam[i]) > cut) {
            inv[i] = 1.0 / std::abs(lam[i]);
        } else {
            inv[i] = 0.0;
            sing = true;
        }
        if (lam[i] <= cut) sing = true;
    }
    if (singular) *singular = sing;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

ModelData select_columns(const ModelData& data, const std::vector<int>& cols) {
    Eigen::MatrixXd x(data.n(), static_cast<Eigen::Index>(cols.size()));
    std::vector<std::string> names;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        x.col(static_cast<Eigen::Index>(k)) = data.x.col(cols[k]);
        names.push_back(data.covariate_names[cols[k]]);
    }
    ModelData out;
    out.x = std::move(x);
    out.y = data.y;
    out.categories = data.categories;
    out.covariate_names = std::move(names);
    return out;
}

}  // namespace

ModelData::ModelData(Eigen::MatrixXd x_, std::vector<int> y_, int categories_, std::vector<std::string> names)
    : x(std::move(x_)), y(std::move(y_)), categories(categories_), covariate_names(std::move(names)) {
    if (categories < 2) throw DomainError("ordered logit needs K >= 2 categories");
    if (x.rows() != static_cast<Eigen::Index>(y.size())) throw DomainError("x rows and y length differ");
    if (!x.allFinite()) throw DomainError("x contains missing or non-finite entries");
    for (int v : y) {
        if (v < 1 || v > categories) throw DomainError("y value " + std::to_string(v) + " outside 1..K");
    }
    if (covariate_names.empty()) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) covariate_names.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(covariate_names.size()) != x.cols()) {
        throw DomainError("covariate name count does not match x columns");
    }
}

std::vector<int> ModelData::category_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(categories), 0);
    for (int v : y) ++counts[static_cast<std::size_t>(v - 1)];
    return counts;
}

Eigen::VectorXd Params::packed() const {
    Eigen::VectorXd v(beta.size() + theta.size());
    v << beta, theta;
    return v;
}

Params Params::unpack(const Eigen::VectorXd& v, int p) {
    return {v.head(p), v.tail(v.size() - p)};
}

Eigen::VectorXd OrderedLogitFit::estimates() const {
    Eigen::VectorXd v(beta.size() + theta.size());
    v << beta, theta;
    return v;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd cumulative_probs(const Eigen::VectorXd& theta, const Eigen::VectorXd& beta,
                                 const Eigen::VectorXd& x_row) {
    if (theta.size() < 1) throw DomainError("theta must have at least one threshold");
    if (!strictly_increasing(theta)) throw DomainError("thresholds must be strictly increasing");
    if (beta.size() != x_row.size()) throw DomainError("beta and x_row lengths differ");
    const double eta = beta.size() ? beta.dot(x_row) : 0.0;
    const auto K = theta.size() + 1;
    Eigen::VectorXd out(K);
    for (int y = 1; y <= K; ++y) {
        const auto c = cuts(theta, y, eta);
        out[y - 1] = interval_prob(c.a, c.b);
    }
    return out;
}

double neg_log_likelihood(const Params& params, const ModelData& data) {
    check_params(params, data);
    if (!params.theta.allFinite() || !params.beta.allFinite()) return kInf;
    double nll = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        const double eta = data.p() ? data.x.row(i).dot(params.beta) : 0.0;
        const auto c = cuts(params.theta, data.y[i], eta);
        const double pr = interval_prob(c.a, c.b);
        if (!(pr > 0.0)) return kInf;
        nll -= std::log(pr);
    }
    return nll;
}

Eigen::VectorXd gradient(const Params& params, const ModelData& data) {
    check_params(params, data);
    const int p = data.p();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p + data.categories - 1);
    for (int i = 0; i < data.n(); ++i) {
        const double eta = p ? data.x.row(i).dot(params.beta) : 0.0;
        const int y = data.y[i];
        const auto c = cuts(params.theta, y, eta);
        const double pr = interval_prob(c.a, c.b);
        const double u = density(c.a);
        const double v = density(c.b);
        if (p) g.head(p) += data.x.row(i).transpose() * ((u - v) / pr);
        if (y < data.categories) g[p + y - 1] -= u / pr;
        if (y > 1) g[p + y - 2] += v / pr;
    }
    return g;
}

Eigen::MatrixXd hessian(const Params& params, const ModelData& data) {
    check_params(params, data);
    const int p = data.p();
    const int P = p + data.categories - 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(P, P);
    for (int i = 0; i < data.n(); ++i) {
        const Eigen::VectorXd xi = data.x.row(i).transpose();
        const double eta = p ? xi.dot(params.beta) : 0.0;
        const int y = data.y[i];
        const auto c = cuts(params.theta, y, eta);
        const double pr = interval_prob(c.a, c.b);
        const double u = density(c.a), v = density(c.b);
        const double du = density_prime(c.a), dv = density_prime(c.b);
        const bool upper = y < data.categories;  // theta_y exists
        const bool lower = y > 1;                // theta_{y-1} exists
        const int ju = p + y - 1, jl = p + y - 2;

        // H of -log p = dp dp^T / p^2 - d2p / p
        if (p) H.topLeftCorner(p, p) += xi * xi.transpose() * ((u - v) * (u - v) / (pr * pr) - (du - dv) / pr);
        if (upper) {
            H(ju, ju) += u * u / (pr * pr) - du / pr;
            if (p) {
                const Eigen::VectorXd col = xi * (-(u - v) * u / (pr * pr) + du / pr);
                H.block(0, ju, p, 1) += col;
                H.block(ju, 0, 1, p) += col.transpose();
            }
        }
        if (lower) {
            H(jl, jl) += v * v / (pr * pr) + dv / pr;
            if (p) {
                const Eigen::VectorXd col = xi * ((u - v) * v / (pr * pr) - dv / pr);
                H.block(0, jl, p, 1) += col;
                H.block(jl, 0, 1, p) += col.transpose();
            }
        }
        if (upper && lower) {
            H(ju, jl) -= u * v / (pr * pr);
            H(jl, ju) -= u * v / (pr * pr);
        }
    }
    return H;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd null_thresholds(const std::vector<int>& counts) {
    const int K = static_cast<int>(counts.size());
    if (K < 2) throw DomainError("need at least two categories");
    double n = 0;
    for (int c : counts) {
        if (c <= 0) throw DomainError("every category needs at least one observation");
        n += c;
    }
    Eigen::VectorXd theta(K - 1);
    double cum = 0;
    for (int j = 0; j < K - 1; ++j) {
        cum += counts[static_cast<std::size_t>(j)];
        const double q = cum / n;
        theta[j] = std::log(q / (1.0 - q));
    }
    return theta;
}

double null_log_likelihood(const std::vector<int>& counts) {
    double n = 0;
    for (int c : counts) n += c;
    double ll = 0;
    for (int c : counts) {
        if (c > 0) ll += c * std::log(c / n);
    }
    return ll;
}

OrderedLogitFit fit(const ModelData& data, const FitConfig& config) {
    const auto counts = data.category_counts();
    for (int j = 0; j < data.categories; ++j) {
        if (counts[static_cast<std::size_t>(j)] == 0) {
            throw DomainError("category " + std::to_string(j + 1) +
                              " has no observations; thresholds are not identifiable");
        }
    }
    const int full_p = data.p();
    const int K = data.categories;
    if (data.n() <= full_p + K - 1) {
        throw DomainError("too few observations: n=" + std::to_string(data.n()) + " <= parameters=" +
                          std::to_string(full_p + K - 1));
    }

    OrderedLogitFit out;
    out.n = data.n();
    out.categories = K;
    out.names = data.covariate_names;
    for (int j = 1; j < K; ++j) out.names.push_back("cut" + std::to_string(j));

    // All-zero columns carry no information: pinned at 0, reported without se.
    std::vector<int> active;
    for (int j = 0; j < full_p; ++j) {
        if (data.x.col(j).cwiseAbs().maxCoeff() == 0.0) {
            out.warnings.push_back("covariate " + data.covariate_names[static_cast<std::size_t>(j)] +
                                   " is identically zero; coefficient fixed at 0");
        } else {
            active.push_back(j);
        }
    }
    const ModelData work = static_cast<int>(active.size()) == full_p ? data : select_columns(data, active);
    const int p = work.p();
    const int P = p + K - 1;

    Params cur{Eigen::VectorXd::Zero(p), null_thresholds(counts)};
    Eigen::VectorXd psi = to_psi(cur);
    double f = neg_log_likelihood(cur, work);
    Eigen::VectorXd g = gradient(cur, work);

    auto psi_system = [&](const Eigen::VectorXd& ps, const Params& prm, const Eigen::VectorXd& grad,
                          Eigen::VectorXd& g_psi, Eigen::MatrixXd& H_psi) {
        const Eigen::MatrixXd J = jacobian(ps, p);
        g_psi = J.transpose() * grad;
        H_psi = J.transpose() * hessian(prm, work) * J;
        // second-order term of theta_j = theta_{j-1} + exp(delta_j)
        for (int m = 1; m < K - 1; ++m) {
            double s = 0;
            for (int j = m; j < K - 1; ++j) s += grad[p + j];
            H_psi(p + m, p + m) += s * std::exp(ps[p + m]);
        }
    };

    int it = 0;
    bool stalled = false;
    while (g.cwiseAbs().maxCoeff() > config.tol && it < config.max_iter) {
        ++it;
        Eigen::VectorXd g_psi;
        Eigen::MatrixXd H_psi;
        psi_system(psi, cur, g, g_psi, H_psi);
        const Eigen::VectorXd dir = -abs_pinv(H_psi) * g_psi;

        // Near the optimum the objective change drops below its rounding
        // noise; there a step is judged by the gradient instead.
        const double noise = 1e-12 * std::max(1.0, std::abs(f));
        const double gmax = g.cwiseAbs().maxCoeff();
        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h < 60; ++h, step *= 0.5) {
            const Eigen::VectorXd trial_psi = psi + step * dir;
            const Params trial = from_psi(trial_psi, p);
            const double ft = neg_log_likelihood(trial, work);
            if (!std::isfinite(ft)) continue;
            bool ok = ft < f;
            Eigen::VectorXd gt;
            if (!ok && ft <= f + noise) {
                gt = gradient(trial, work);
                ok = gt.cwiseAbs().maxCoeff() < gmax;
            }
            if (ok) {
                psi = trial_psi;
                cur = trial;
                f = ft;
                accepted = true;
                break;
            }
        }
        g = gradient(cur, work);
        if (!accepted) {
            stalled = true;
            break;
        }
    }
    out.iterations = it;
    out.converged = g.cwiseAbs().maxCoeff() <= config.tol;
    if (!out.converged) {
        std::ostringstream msg;
        msg << "not converged after " << it << " iterations (max |gradient| " << g.cwiseAbs().maxCoeff() << ")";
        if (stalled) msg << "; line search stalled";
        out.warnings.push_back(msg.str());
    }

    // Delta method: cov(beta, theta) = J H_psi^-1 J^T
    Eigen::VectorXd g_psi;
    Eigen::MatrixXd H_psi;
    psi_system(psi, cur, g, g_psi, H_psi);
    bool singular = false;
    const Eigen::MatrixXd J = jacobian(psi, p);
    const Eigen::MatrixXd cov_active = J * abs_pinv(H_psi, &singular) * J.transpose();
    if (singular) out.warnings.push_back("information matrix is singular at the optimum; standard errors unreliable");

    const int FP = full_p + K - 1;
    out.beta = Eigen::VectorXd::Zero(full_p);
    for (int k = 0; k < p; ++k) out.beta[active[static_cast<std::size_t>(k)]] = cur.beta[k];
    out.theta = cur.theta;
    out.ll_model = -f;
    out.ll_null = null_log_likelihood(counts);

    // map active index -> full index
    std::vector<int> idx(static_cast<std::size_t>(P));
    for (int k = 0; k < p; ++k) idx[static_cast<std::size_t>(k)] = active[static_cast<std::size_t>(k)];
    for (int j = 0; j < K - 1; ++j) idx[static_cast<std::size_t>(p + j)] = full_p + j;

    out.cov = Eigen::MatrixXd::Constant(FP, FP, kNaN);
    for (int r = 0; r < P; ++r) {
        for (int c = 0; c < P; ++c) out.cov(idx[r], idx[c]) = cov_active(r, c);
    }
    out.se = Eigen::VectorXd::Constant(FP, kNaN);
    out.se_unreliable.assign(static_cast<std::size_t>(FP), false);
    std::vector<bool> is_active(static_cast<std::size_t>(FP), false);
    for (int r = 0; r < P; ++r) {
        const double var = cov_active(r, r);
        const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]);
        is_active[k] = true;
        if (std::isfinite(var) && var > 0) out.se[idx[r]] = std::sqrt(var);
        if (singular || !(var > 0) || !out.converged) out.se_unreliable[k] = true;
    }

    // pinned coefficients have no standard error at all
    for (int k = 0; k < FP; ++k)
        if (!is_active[static_cast<std::size_t>(k)]) out.se_unreliable[static_cast<std::size_t>(k)] = true;

    const Eigen::VectorXd est = out.estimates();
    for (int k = 0; k < FP; ++k) {
        const double s = out.se[k];
        if (is_active[static_cast<std::size_t>(k)] && std::abs(est[k]) > 10 && s / std::abs(est[k]) > 5) {
            out.se_unreliable[static_cast<std::size_t>(k)] = true;
            out.warnings.push_back("possible quasi-separation on " + out.names[static_cast<std::size_t>(k)]);
        }
    }
    out.z = est.cwiseQuotient(out.se);
    out.p_values.resize(FP);
    for (int k = 0; k < FP; ++k) out.p_values[k] = est[k] == 0.0 ? 1.0 : normal_two_sided_p(out.z[k]);
    return out;
}

// ---------------------------------------------------------------------------

double pseudo_r2(double ll_null, double ll_model) {
    if (ll_null == 0.0) throw DomainError("pseudo R2 undefined when ll(null) is 0");
    return 1.0 - ll_model / ll_null;
}

InformationCriteria information_criteria(int k, int n, double ll) {
    if (k < 0) throw DomainError("parameter count must be non-negative");
    if (n < 1) throw DomainError("observation count must be positive");
    return {2.0 * k - 2.0 * ll, k * std::log(static_cast<double>(n)) - 2.0 * ll};
}

double normal_two_sided_p(double z) {
    if (std::isnan(z)) return kNaN;
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

WaldResult wald_p_values(const OrderedLogitFit& fit) {
    const Eigen::VectorXd est = fit.estimates();
    WaldResult r;
    for (Eigen::Index k = 0; k < est.size(); ++k) {
        const double s = k < fit.se.size() ? fit.se[k] : kNaN;
        r.p_values.push_back(est[k] == 0.0 ? 1.0 : normal_two_sided_p(est[k] / s));
        const bool flagged = static_cast<std::size_t>(k) < fit.se_unreliable.size() &&
                             fit.se_unreliable[static_cast<std::size_t>(k)];
        r.unreliable.push_back(flagged || !(s > 0));
    }
    return r;
}

std::string significance_stars(double p) {
    if (std::isnan(p)) return "";
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    return "";
}

}  // namespace ebike::ordlogit
