#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

namespace bedside::cluster {

using Point = std::vector<double>;

struct Clustering {
    std::size_t k = 0;
    std::vector<Point> centroids;
    std::vector<std::size_t> assignment;
    double inertia = 0.0;
    std::size_t iterations = 0;
    /// Inertia after each Lloyd iteration of the winning restart.
    std::vector<double> inertia_trace;
};

struct KMeansOptions {
    std::uint64_t seed = 0;
    std::size_t n_restarts = 10;
    std::size_t max_iterations = 300;
};

std::size_t distinct_points(std::span<const Point> points);

/// Lloyd's algorithm with k-means++ seeding, best of n_restarts by inertia.
/// Throws ValidationError when k exceeds the number of distinct points.
Clustering kmeans(std::span<const Point> points, std::size_t k, const KMeansOptions& opts = {});

/// Mean silhouette coefficient; points in singleton clusters contribute 0.
double silhouette(std::span<const Point> points, std::span<const std::size_t> assignment);

struct ModelSelection {
    std::vector<std::size_t> ks;
    /// Silhouette per k (k-means branch) or BIC per k (GMM branch).
    std::vector<double> scores;
    std::size_t chosen_k = 0;
    /// Clustering for the chosen k (k-means branch only).
    Clustering best;
    /// GMM branch: some component variance hit the floor.
    bool variance_floored = false;

    nlohmann::json to_json(const char* score_name) const;
};

/// k-means + silhouette for each k in [k_lo, k_hi]; largest silhouette wins,
/// ties to the smaller k.
ModelSelection select_k(std::span<const Point> points, std::size_t k_lo, std::size_t k_hi,
                        const KMeansOptions& opts = {});

struct GaussianMixture {
    std::vector<double> weights;
    std::vector<Point> means;
    std::vector<Point> variances;
    double log_likelihood = 0.0;
    bool variance_floored = false;

    /// Free parameters of a diagonal mixture with k components in d dims.
    static std::size_t parameter_count(std::size_t k, std::size_t d);
};

inline constexpr double kVarianceFloor = 1e-6;

/// EM for a diagonal-covariance mixture, initialized from k-means.
GaussianMixture fit_gmm(std::span<const Point> points, std::size_t k, std::uint64_t seed = 0,
                        std::size_t max_iterations = 500);

/// -2 log L + p ln n; lower is better.
double bic(double log_likelihood, std::size_t n_params, std::size_t n_points);

/// GMM fits for k in [k_lo, k_hi] (k_lo may be 1); smallest BIC wins, ties
/// to the smaller k.
ModelSelection gmm_bic(std::span<const Point> points, std::size_t k_lo, std::size_t k_hi, std::uint64_t seed = 0);

} // namespace bedside::cluster
