#include "bedside/logit.hpp"

#include "bedside/error.hpp"
#include "bedside/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace bedside::stats {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Eigen::VectorXd penalty_mask(Eigen::Index p) {
    Eigen::VectorXd m = Eigen::VectorXd::Ones(p);
    m(0) = 0.0;
    return m;
}

double heldout_loglik(const Eigen::VectorXd& w, const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    Eigen::VectorXd eta = design * w;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
    return ll;
}

} // namespace

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

double penalized_loglik(const Eigen::VectorXd& w, const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                        double lambda) {
    double ll = heldout_loglik(w, design, y);
    double ss = w.tail(w.size() - 1).squaredNorm();
    return ll - 0.5 * lambda * ss;
}

Eigen::VectorXd penalized_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& design,
                                   const Eigen::VectorXd& y, double lambda) {
    Eigen::VectorXd eta = design * w;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = y(i) - sigmoid(eta(i));
    Eigen::VectorXd g = design.transpose() * resid;
    g -= lambda * penalty_mask(w.size()).cwiseProduct(w);
    return g;
}

Eigen::MatrixXd penalized_hessian(const Eigen::VectorXd& w, const Eigen::MatrixXd& design, double lambda) {
    Eigen::VectorXd eta = design * w;
    Eigen::VectorXd weight(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        double p = sigmoid(eta(i));
        weight(i) = p * (1.0 - p);
    }
    Eigen::MatrixXd h = -(design.transpose() * weight.asDiagonal() * design);
    h.diagonal() -= lambda * penalty_mask(w.size());
    return h;
}

Eigen::VectorXd fit_penalized(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double lambda,
                              std::size_t max_iterations, double tolerance) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(design.cols());
    double f = penalized_loglik(w, design, y, lambda);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        Eigen::VectorXd g = penalized_gradient(w, design, y, lambda);
        Eigen::MatrixXd neg_h = -penalized_hessian(w, design, lambda);
        // tiny ridge keeps the solve defined when lambda = 0 and columns collide
        neg_h.diagonal().array() += 1e-12;
        Eigen::VectorXd dir = neg_h.ldlt().solve(g);
        double step = 1.0;
        Eigen::VectorXd next = w + dir;
        double fn = penalized_loglik(next, design, y, lambda);
        while (fn < f && step > 1e-10) {
            step *= 0.5;
            next = w + step * dir;
            fn = penalized_loglik(next, design, y, lambda);
        }
        if (fn < f) break;
        double change = (next - w).cwiseAbs().maxCoeff();
        w = next;
        double improvement = fn - f;
        f = fn;
        if (change < tolerance || improvement < tolerance * (1.0 + std::abs(f))) break;
    }
    return w;
}

const LogitModel::Coefficient* LogitModel::find(const std::string& name) const {
    for (const auto& c : coefficients_)
        if (c.name == name) return &c;
    return nullptr;
}

double LogitModel::predict(const std::vector<double>& raw_row) const {
    if (raw_row.size() != n_columns_) throw ValidationError("feature row has the wrong length");
    double eta = intercept_.weight;
    for (std::size_t j = 0; j < coefficients_.size(); ++j) {
        const auto& c = coefficients_[j];
        eta += c.weight * (raw_row[columns_[j]] - c.mean) / c.sd;
    }
    return sigmoid(eta);
}

double LogitModel::raw_weight(const std::string& name) const {
    const auto* c = find(name);
    if (!c) throw NotFoundError("no feature named '" + name + "'");
    return c->weight / c->sd;
}

nlohmann::json LogitModel::to_json() const {
    auto coef = [](const Coefficient& c) {
        return nlohmann::json{{"name", c.name},   {"beta", c.weight}, {"std_error", c.std_error},
                              {"p_value", c.wald_p}, {"mean", c.mean},   {"sd", c.sd},
                              {"standardized", c.standardized}};
    };
    nlohmann::json coefs = nlohmann::json::array();
    for (const auto& c : coefficients_) coefs.push_back(coef(c));
    nlohmann::json cv = nlohmann::json::array();
    for (auto [lambda, ll] : cv_loglik_) cv.push_back({{"penalty", lambda}, {"heldout_loglik", ll}});
    return {{"intercept", coef(intercept_)}, {"coefficients", coefs}, {"penalty", penalty_},
            {"cv", cv},                      {"separation", separation_}, {"warnings", warnings_}};
}

LogitModel logit_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<FeatureSpec>& features,
                     const LogitConfig& config) {
    const auto n = X.rows();
    if (static_cast<std::size_t>(X.cols()) != features.size())
        throw ValidationError("feature spec count does not match matrix columns");
    if (y.size() != n) throw ValidationError("outcome length does not match rows");
    if (n < 10) throw ValidationError("logit_fit needs at least 10 rows");
    for (Eigen::Index i = 0; i < n; ++i)
        if (y(i) != 0.0 && y(i) != 1.0) throw ValidationError("outcomes must be 0 or 1");
    if (config.penalty_grid.empty()) throw ValidationError("empty penalty grid");
    if (config.folds < 2 || config.folds > static_cast<std::size_t>(n)) throw ValidationError("bad fold count");

    LogitModel model;
    model.n_columns_ = features.size();
    for (std::size_t j = 0; j < features.size(); ++j) {
        const auto col = X.col(static_cast<Eigen::Index>(j));
        double mean = col.mean();
        double var = (col.array() - mean).square().sum() / static_cast<double>(n);
        if (!(var > 0.0)) {
            model.warnings_.push_back("dropped constant feature '" + features[j].name + "'");
            continue;
        }
        LogitModel::Coefficient c;
        c.name = features[j].name;
        c.standardized = features[j].standardize;
        if (c.standardized) {
            c.mean = mean;
            c.sd = std::sqrt(var);
        }
        model.coefficients_.push_back(c);
        model.columns_.push_back(j);
    }

    const auto p = static_cast<Eigen::Index>(model.coefficients_.size()) + 1;
    Eigen::MatrixXd design(n, p);
    design.col(0).setOnes();
    for (Eigen::Index j = 1; j < p; ++j) {
        const auto& c = model.coefficients_[static_cast<std::size_t>(j - 1)];
        design.col(j) = (X.col(static_cast<Eigen::Index>(model.columns_[static_cast<std::size_t>(j - 1)])).array() -
                         c.mean) / c.sd;
    }

    // deterministic fold assignment
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> fold(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = i % config.folds;

    double best_ll = -std::numeric_limits<double>::infinity();
    for (double lambda : config.penalty_grid) {
        double total = 0.0;
        for (std::size_t f = 0; f < config.folds; ++f) {
            std::vector<Eigen::Index> train, test;
            for (Eigen::Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
            Eigen::MatrixXd dtrain = design(train, Eigen::all);
            Eigen::VectorXd ytrain = y(train);
            auto w = fit_penalized(dtrain, ytrain, lambda, config.max_iterations, config.tolerance);
            total += heldout_loglik(w, design(test, Eigen::all), y(test));
        }
        model.cv_loglik_.emplace_back(lambda, total);
        if (total > best_ll) {
            best_ll = total;
            model.penalty_ = lambda;
        }
    }

    Eigen::VectorXd w = fit_penalized(design, y, model.penalty_, config.max_iterations, config.tolerance);
    Eigen::MatrixXd cov = (-penalized_hessian(w, design, model.penalty_)).inverse();
    auto fill = [&](LogitModel::Coefficient& c, Eigen::Index j) {
        c.weight = w(j);
        c.std_error = std::sqrt(std::max(cov(j, j), 0.0));
        c.wald_p = c.std_error > 0.0 ? two_tailed_p(c.weight / c.std_error) : 1.0;
    };
    fill(model.intercept_, 0);
    for (Eigen::Index j = 1; j < p; ++j) fill(model.coefficients_[static_cast<std::size_t>(j - 1)], j);

    Eigen::VectorXd eta = design * w;
    bool separated = true;
    for (Eigen::Index i = 0; i < n && separated; ++i) separated = (2.0 * y(i) - 1.0) * eta(i) > 0.0;
    if (separated) {
        model.separation_ = true;
        model.warnings_.push_back("outcomes are perfectly separated; weights are bounded only by the penalty");
    }
    return model;
}

LogitModel logit_from_weights(double intercept, const std::vector<std::pair<std::string, double>>& weights) {
    LogitModel m;
    m.intercept_.weight = intercept;
    for (const auto& [name, w] : weights) {
        LogitModel::Coefficient c;
        c.name = name;
        c.weight = w;
        c.standardized = false;
        m.columns_.push_back(m.coefficients_.size());
        m.coefficients_.push_back(c);
    }
    m.n_columns_ = weights.size();
    return m;
}

double predict_cluster_pmu(const LogitModel& model, const std::string& cluster) {
    const auto* c = model.find("cluster_" + cluster);
    if (!c) throw NotFoundError("unknown cluster '" + cluster + "'");
    if (c->standardized) throw ValidationError("cluster indicator '" + c->name + "' was standardized");
    return sigmoid(model.intercept() + c->weight);
}

} // namespace bedside::stats
