#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace bedside::stats {

struct FeatureSpec {
    std::string name;
    /// Indicator features can stay on their 0/1 scale so a weight reads as
    /// the effect of membership with every standardized covariate at its mean.
    bool standardize = true;
};

struct LogitConfig {
    std::vector<double> penalty_grid{0.001, 0.01, 0.1, 1.0, 10.0};
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 100;
    double tolerance = 1e-10;
};

/// Penalized log-likelihood sum_i [y_i eta_i - log(1 + e^eta_i)] - lambda/2 |w_1..|^2.
/// `design` carries the intercept column first; the intercept is not penalized.
double penalized_loglik(const Eigen::VectorXd& w, const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                        double lambda);
Eigen::VectorXd penalized_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& design,
                                   const Eigen::VectorXd& y, double lambda);
/// Observed Hessian of penalized_loglik (negative definite for lambda > 0).
Eigen::MatrixXd penalized_hessian(const Eigen::VectorXd& w, const Eigen::MatrixXd& design, double lambda);

/// Newton's method with step halving on the penalized log-likelihood.
Eigen::VectorXd fit_penalized(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, double lambda,
                              std::size_t max_iterations = 100, double tolerance = 1e-10);

double sigmoid(double x);

class LogitModel {
public:
    struct Coefficient {
        std::string name;
        double weight = 0.0;
        double std_error = 0.0;
        double wald_p = 1.0;
        /// Training mean and standard deviation (identity for unstandardized features).
        double mean = 0.0;
        double sd = 1.0;
        bool standardized = true;
    };

    double intercept() const { return intercept_.weight; }
    const Coefficient& intercept_coefficient() const { return intercept_; }
    const std::vector<Coefficient>& coefficients() const { return coefficients_; }
    const Coefficient* find(const std::string& name) const;

    double penalty() const { return penalty_; }
    const std::vector<std::pair<double, double>>& cv_loglik() const { return cv_loglik_; }
    bool separation() const { return separation_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Probability for one raw feature row (same column order as training).
    double predict(const std::vector<double>& raw_row) const;
    /// Weight on the raw (unnormalized) scale of each feature.
    double raw_weight(const std::string& name) const;

    nlohmann::json to_json() const;

private:
    friend LogitModel logit_fit(const Eigen::MatrixXd&, const Eigen::VectorXd&, const std::vector<FeatureSpec>&,
                                const LogitConfig&);
    friend LogitModel logit_from_weights(double, const std::vector<std::pair<std::string, double>>&);

    Coefficient intercept_{"intercept"};
    std::vector<Coefficient> coefficients_;
    /// Column of each coefficient in the raw training matrix.
    std::vector<std::size_t> columns_;
    std::size_t n_columns_ = 0;
    double penalty_ = 0.0;
    std::vector<std::pair<double, double>> cv_loglik_;
    bool separation_ = false;
    std::vector<std::string> warnings_;
};

/// Standardizes features, picks the L2 strength by k-fold held-out
/// log-likelihood, fits by Newton's method and attaches Wald tests from the
/// inverse observed Hessian. Constant columns are dropped with a warning.
LogitModel logit_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<FeatureSpec>& features,
                     const LogitConfig& config = {});

/// A model with the given weights on unstandardized indicator features.
LogitModel logit_from_weights(double intercept, const std::vector<std::pair<std::string, double>>& weights);

/// Predicted outcome probability for members of `cluster` with every
/// standardized covariate at its mean: sigmoid(intercept + w_cluster).
/// The model must carry an unstandardized indicator named "cluster_<id>".
double predict_cluster_pmu(const LogitModel& model, const std::string& cluster);

} // namespace bedside::stats
