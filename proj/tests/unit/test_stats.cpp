#include "bedside/error.hpp"
#include "bedside/logit.hpp"
#include "bedside/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bedside;
using namespace bedside::stats;

TEST_CASE("derive_outcome examples") {
    auto L = PrognosisResponse::level;
    auto o = derive_outcome(L(3), L(3));
    CHECK(o.level == 0);
    CHECK_FALSE(o.misunderstood);
    o = derive_outcome(L(1), L(5));
    CHECK(o.level == 4);
    CHECK(o.misunderstood);
    CHECK_FALSE(o.severe);
    o = derive_outcome(L(0), L(6));
    CHECK(o.level == 6);
    CHECK(o.severe);
    o = derive_outcome(L(2), PrognosisResponse::refused());
    CHECK(o.excluded);
    CHECK_FALSE(o.level.has_value());
    CHECK(derive_outcome(ConversationMeta{}).excluded);
}

TEST_CASE("derive_outcome over all 81 pairs") {
    for (const auto& a : PrognosisResponse::all())
        for (const auto& b : PrognosisResponse::all()) {
            auto o = derive_outcome(a, b);
            auto r = derive_outcome(b, a);
            CHECK(o.excluded == r.excluded);
            CHECK(o.level == r.level);
            if (!a.answered() || !b.answered()) {
                CHECK(o.excluded);
                continue;
            }
            int d = std::abs(a.value() - b.value());
            CHECK(*o.level == d);
            CHECK(o.misunderstood == (d > 1));
            CHECK(o.severe == (d >= 5));
        }
}

TEST_CASE("two-proportion z-test") {
    auto t = two_prop_ztest(30, 100, 30, 100);
    CHECK(t.z == 0.0);
    CHECK(t.p == 1.0);
    t = two_prop_ztest(160, 191, 138, 191);
    CHECK(t.z == doctest::Approx(2.717731744622759).epsilon(1e-12));
    CHECK(t.p == doctest::Approx(0.006573110613489554).epsilon(1e-10));
    t = two_prop_ztest(0, 50, 50, 50);
    CHECK(std::abs(t.z) > 6);
    CHECK(t.p < 1e-10);
    auto swapped = two_prop_ztest(138, 191, 160, 191);
    CHECK(swapped.z == doctest::Approx(-2.717731744622759));
    CHECK(swapped.p == doctest::Approx(0.006573110613489554));
    CHECK_THROWS_AS(two_prop_ztest(0, 0, 1, 2), ValidationError);
    CHECK_THROWS_AS(two_prop_ztest(3, 2, 1, 2), ValidationError);
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
}

TEST_CASE("cliffs d") {
    std::vector<double> a{5, 6}, b{1, 2};
    CHECK(cliffs_d(a, b) == 1.0);
    CHECK(cliffs_d(b, a) == -1.0);
    std::vector<double> c{3, 3};
    CHECK(cliffs_d(c, c) == 0.0);
    std::vector<double> d{1, 3}, e{2};
    CHECK(cliffs_d(d, e) == 0.0);
    std::vector<double> none;
    CHECK_THROWS_AS(cliffs_d(none, a), ValidationError);
}

TEST_CASE("penalized gradient matches central differences") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    const int n = 40, p = 4;
    Eigen::MatrixXd design(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        for (int j = 1; j < p; ++j) design(i, j) = n01(rng);
        y(i) = n01(rng) > 0 ? 1.0 : 0.0;
    }
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd w(p);
        for (int j = 0; j < p; ++j) w(j) = n01(rng);
        auto g = penalized_gradient(w, design, y, 0.3);
        for (int j = 0; j < p; ++j) {
            const double h = 1e-5;
            Eigen::VectorXd a = w, b = w;
            a(j) += h;
            b(j) -= h;
            double fd = (penalized_loglik(a, design, y, 0.3) - penalized_loglik(b, design, y, 0.3)) / (2 * h);
            CHECK(std::abs(fd - g(j)) <= 1e-6 * std::max(1.0, std::abs(g(j))));
        }
    }
}

TEST_CASE("logit recovers a planted model and ignores noise features") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    const int n = 5000;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = n01(rng);
        X(i, 1) = n01(rng);
        X(i, 2) = n01(rng);
        double p = sigmoid(1.0 * X(i, 0) - 0.5 * X(i, 1));
        y(i) = std::uniform_real_distribution<double>(0, 1)(rng) < p ? 1.0 : 0.0;
    }
    auto m = logit_fit(X, y, {{"x1"}, {"x2"}, {"noise"}});
    CHECK(std::abs(m.raw_weight("x1") - 1.0) < 0.1);
    CHECK(std::abs(m.raw_weight("x2") + 0.5) < 0.1);
    CHECK(std::abs(m.find("noise")->weight) < 0.05);
    CHECK(m.find("x1")->wald_p < 1e-10);
    CHECK(m.cv_loglik().size() == 5);
    CHECK_FALSE(m.separation());
}

TEST_CASE("logit predictions are invariant to rescaling a raw feature") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n01;
    const int n = 200;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = n01(rng);
        X(i, 1) = 50 + 10 * n01(rng);
        y(i) = n01(rng) + 0.8 * X(i, 0) > 0 ? 1.0 : 0.0;
    }
    Eigen::MatrixXd X10 = X;
    X10.col(1) *= 10.0;
    auto a = logit_fit(X, y, {{"a"}, {"b"}}, {});
    auto b = logit_fit(X10, y, {{"a"}, {"b"}}, {});
    for (int i = 0; i < n; i += 7)
        CHECK(std::abs(a.predict({X(i, 0), X(i, 1)}) - b.predict({X10(i, 0), X10(i, 1)})) < 1e-8);
}

TEST_CASE("logit flags separation, drops constant columns and validates input") {
    const int n = 20;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = i;
        X(i, 1) = 3.0;
        y(i) = i >= 10 ? 1.0 : 0.0;
    }
    auto m = logit_fit(X, y, {{"x"}, {"const"}});
    CHECK(m.separation());
    CHECK(m.find("const") == nullptr);
    CHECK(m.warnings().size() == 2);
    CHECK(std::isfinite(m.find("x")->weight));

    CHECK_THROWS_AS(logit_fit(X.topRows(5), y.head(5), {{"x"}, {"const"}}), ValidationError);
    Eigen::VectorXd bad = y;
    bad(0) = 2.0;
    CHECK_THROWS_AS(logit_fit(X, bad, {{"x"}, {"const"}}), ValidationError);
}

TEST_CASE("cluster-wise predicted misunderstanding") {
    auto zero = logit_from_weights(0.0, {{"cluster_A", 0.0}, {"cluster_B", 0.0}});
    CHECK(predict_cluster_pmu(zero, "A") == 0.5);
    auto m = logit_from_weights(0.2, {{"cluster_A", -0.294}});
    CHECK(predict_cluster_pmu(m, "A") == doctest::Approx(0.4765172885573248).epsilon(1e-12));
    CHECK_THROWS_AS(predict_cluster_pmu(m, "Z"), NotFoundError);
}

TEST_CASE("one-hot cluster indicators stay unstandardized") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    const int n = 300;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        int c = i % 2;
        X(i, 0) = n01(rng);
        X(i, 1) = c == 0;
        X(i, 2) = c == 1;
        y(i) = std::uniform_real_distribution<double>(0, 1)(rng) < (c == 0 ? 0.3 : 0.7) ? 1.0 : 0.0;
    }
    auto m = logit_fit(X, y, {{"age"}, {"cluster_A", false}, {"cluster_B", false}});
    CHECK_FALSE(m.find("cluster_A")->standardized);
    CHECK(m.find("cluster_A")->sd == 1.0);
    CHECK(predict_cluster_pmu(m, "A") < predict_cluster_pmu(m, "B"));
    CHECK(predict_cluster_pmu(m, "A") == doctest::Approx(sigmoid(m.intercept() + m.find("cluster_A")->weight)));
    auto j = m.to_json();
    CHECK(j["coefficients"].size() == 3);
}
