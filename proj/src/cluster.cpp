#include "bedside/cluster.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace bedside::cluster {

namespace {

double sq_dist(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void check_points(std::span<const Point> points) {
    if (points.empty()) throw ValidationError("no points to cluster");
    const auto d = points.front().size();
    if (d == 0) throw ValidationError("points have zero dimension");
    for (const auto& p : points)
        if (p.size() != d) throw ValidationError("points have inconsistent dimensions");
}

std::size_t nearest(const Point& p, const std::vector<Point>& centroids, double* dist = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        double d = sq_dist(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (dist) *dist = best_d;
    return best;
}

std::vector<Point> plus_plus_init(std::span<const Point> points, std::size_t k, std::mt19937_64& rng) {
    std::vector<Point> centers;
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    centers.push_back(points[pick(rng)]);
    std::vector<double> d2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) d2[i] = sq_dist(points[i], centers[0]);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (centers.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t chosen = 0;
        double target = unit(rng) * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            acc += d2[i];
            if (d2[i] > 0.0 && acc >= target) {
                chosen = i;
                break;
            }
            // rounding can leave target just above the final sum
            if (d2[i] > 0.0) chosen = i;
        }
        centers.push_back(points[chosen]);
        for (std::size_t i = 0; i < points.size(); ++i) d2[i] = std::min(d2[i], sq_dist(points[i], centers.back()));
    }
    return centers;
}

Clustering lloyd(std::span<const Point> points, std::vector<Point> centroids, std::size_t max_iterations) {
    const std::size_t n = points.size();
    const std::size_t k = centroids.size();
    const std::size_t d = points.front().size();
    Clustering c;
    c.k = k;
    c.assignment.assign(n, k);
    std::vector<double> dist(n, 0.0);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto a = nearest(points[i], centroids, &dist[i]);
            if (a != c.assignment[i]) changed = true;
            c.assignment[i] = a;
            inertia += dist[i];
        }
        assert(c.inertia_trace.empty() || inertia <= c.inertia_trace.back() * (1.0 + 1e-12) + 1e-15);
        c.inertia_trace.push_back(inertia);
        c.inertia = inertia;
        c.iterations = iter + 1;
        if (!changed && iter > 0) break;

        std::vector<Point> sums(k, Point(d, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto a = c.assignment[i];
            ++counts[a];
            for (std::size_t j = 0; j < d; ++j) sums[a][j] += points[i][j];
        }
        for (std::size_t a = 0; a < k; ++a) {
            if (counts[a] == 0) {
                // reseed at the point farthest from its own centroid
                auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
                centroids[a] = points[far];
                dist[far] = 0.0;
                continue;
            }
            for (std::size_t j = 0; j < d; ++j) centroids[a][j] = sums[a][j] / static_cast<double>(counts[a]);
        }
    }
    c.centroids = std::move(centroids);
    return c;
}

} // namespace

std::size_t distinct_points(std::span<const Point> points) {
    std::set<Point> seen(points.begin(), points.end());
    return seen.size();
}

Clustering kmeans(std::span<const Point> points, std::size_t k, const KMeansOptions& opts) {
    check_points(points);
    if (k == 0) throw ValidationError("k must be positive");
    if (k > distinct_points(points))
        throw ValidationError("k = " + std::to_string(k) + " exceeds the number of distinct points");
    Clustering best;
    bool have = false;
    const std::size_t restarts = std::max<std::size_t>(1, opts.n_restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                          static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(k)};
        std::mt19937_64 rng(seq);
        auto c = lloyd(points, plus_plus_init(points, k, rng), opts.max_iterations);
        if (!have || c.inertia < best.inertia) {
            best = std::move(c);
            have = true;
        }
    }
    return best;
}

double silhouette(std::span<const Point> points, std::span<const std::size_t> assignment) {
    check_points(points);
    if (assignment.size() != points.size()) throw ValidationError("assignment size does not match points");
    std::size_t k = 0;
    for (auto a : assignment) k = std::max(k, a + 1);
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignment) ++sizes[a];
    std::size_t nonempty = std::count_if(sizes.begin(), sizes.end(), [](auto s) { return s > 0; });
    if (nonempty < 2) throw ValidationError("silhouette needs at least 2 clusters");

    const std::size_t n = points.size();
    double total = 0.0;
    std::vector<double> sums(k);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sums[assignment[j]] += std::sqrt(sq_dist(points[i], points[j]));
        const auto own = assignment[i];
        if (sizes[own] == 1) continue;
        double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c)
            if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        double m = std::max(a, b);
        if (m > 0.0) total += (b - a) / m;
    }
    return total / static_cast<double>(n);
}

nlohmann::json ModelSelection::to_json(const char* score_name) const {
    nlohmann::json table = nlohmann::json::array();
    for (std::size_t i = 0; i < ks.size(); ++i) table.push_back({{"k", ks[i]}, {score_name, scores[i]}});
    nlohmann::json j = {{"table", table}, {"chosen_k", chosen_k}};
    if (variance_floored) j["variance_floored"] = true;
    return j;
}

ModelSelection select_k(std::span<const Point> points, std::size_t k_lo, std::size_t k_hi, const KMeansOptions& opts) {
    check_points(points);
    if (k_lo < 2 || k_hi < k_lo) throw ValidationError("k range must satisfy 2 <= lo <= hi");
    if (k_hi > distinct_points(points)) throw ValidationError("k range exceeds the number of distinct points");
    ModelSelection sel;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        auto c = kmeans(points, k, opts);
        double s = silhouette(points, c.assignment);
        sel.ks.push_back(k);
        sel.scores.push_back(s);
        if (s > best) {
            best = s;
            sel.chosen_k = k;
            sel.best = std::move(c);
        }
    }
    return sel;
}

std::size_t GaussianMixture::parameter_count(std::size_t k, std::size_t d) { return (k - 1) + 2 * k * d; }

double bic(double log_likelihood, std::size_t n_params, std::size_t n_points) {
    return -2.0 * log_likelihood + static_cast<double>(n_params) * std::log(static_cast<double>(n_points));
}

GaussianMixture fit_gmm(std::span<const Point> points, std::size_t k, std::uint64_t seed, std::size_t max_iterations) {
    check_points(points);
    const std::size_t n = points.size();
    const std::size_t d = points.front().size();
    if (n < k) throw ValidationError("fewer points than mixture components");

    GaussianMixture g;
    auto init = kmeans(points, k, {seed, 5, 300});
    g.means = init.centroids;
    g.variances.assign(k, Point(d, 0.0));
    g.weights.assign(k, 0.0);
    {
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto a = init.assignment[i];
            ++counts[a];
            for (std::size_t j = 0; j < d; ++j) {
                double diff = points[i][j] - g.means[a][j];
                g.variances[a][j] += diff * diff;
            }
        }
        for (std::size_t a = 0; a < k; ++a) {
            g.weights[a] = static_cast<double>(counts[a]) / static_cast<double>(n);
            for (auto& v : g.variances[a]) {
                v = counts[a] ? v / static_cast<double>(counts[a]) : 0.0;
                if (v < kVarianceFloor) {
                    v = kVarianceFloor;
                    g.variance_floored = true;
                }
            }
        }
    }

    const double log2pi = std::log(2.0 * std::numbers::pi);
    std::vector<double> resp(n * k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        // E step
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < k; ++a) {
                double lp = std::log(std::max(g.weights[a], 1e-300));
                for (std::size_t j = 0; j < d; ++j) {
                    double diff = points[i][j] - g.means[a][j];
                    lp -= 0.5 * (log2pi + std::log(g.variances[a][j]) + diff * diff / g.variances[a][j]);
                }
                resp[i * k + a] = lp;
                mx = std::max(mx, lp);
            }
            double s = 0.0;
            for (std::size_t a = 0; a < k; ++a) s += std::exp(resp[i * k + a] - mx);
            double lse = mx + std::log(s);
            ll += lse;
            for (std::size_t a = 0; a < k; ++a) resp[i * k + a] = std::exp(resp[i * k + a] - lse);
        }
        g.log_likelihood = ll;
        if (std::abs(ll - prev_ll) <= 1e-10 * std::max(1.0, std::abs(ll))) break;
        prev_ll = ll;

        // M step
        for (std::size_t a = 0; a < k; ++a) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp[i * k + a];
            if (nk < 1e-12) continue;
            g.weights[a] = nk / static_cast<double>(n);
            for (std::size_t j = 0; j < d; ++j) {
                double m = 0.0;
                for (std::size_t i = 0; i < n; ++i) m += resp[i * k + a] * points[i][j];
                m /= nk;
                double v = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double diff = points[i][j] - m;
                    v += resp[i * k + a] * diff * diff;
                }
                v /= nk;
                if (v < kVarianceFloor) {
                    v = kVarianceFloor;
                    g.variance_floored = true;
                }
                g.means[a][j] = m;
                g.variances[a][j] = v;
            }
        }
    }
    return g;
}

ModelSelection gmm_bic(std::span<const Point> points, std::size_t k_lo, std::size_t k_hi, std::uint64_t seed) {
    check_points(points);
    if (k_lo < 1 || k_hi < k_lo) throw ValidationError("k range must satisfy 1 <= lo <= hi");
    if (points.size() < k_hi) throw ValidationError("fewer points than the largest k");
    ModelSelection sel;
    const std::size_t d = points.front().size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        auto g = fit_gmm(points, k, seed);
        double b = bic(g.log_likelihood, GaussianMixture::parameter_count(k, d), points.size());
        sel.ks.push_back(k);
        sel.scores.push_back(b);
        sel.variance_floored = sel.variance_floored || g.variance_floored;
        if (b < best) {
            best = b;
            sel.chosen_k = k;
        }
    }
    return sel;
}

} // namespace bedside::cluster
