#include "bedside/error.hpp"
#include "bedside/lectur.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace bedside;
using namespace bedside::lectur;
using testutil::make_transcript;

namespace {

// direct re-scan of every window
std::vector<std::size_t> naive(const Transcript& t, const LectUrParams& p) {
    std::vector<std::size_t> out;
    const auto w = static_cast<std::size_t>(p.window);
    for (std::size_t s = 0; s + w <= t.turns.size(); s += static_cast<std::size_t>(p.step)) {
        double d = 0, q = 0;
        for (std::size_t i = s; i < s + w; ++i) {
            if (t.turns[i].speaker() == Role::physician) d += static_cast<double>(t.turns[i].words());
            if (t.turns[i].speaker() == Role::patient) q += static_cast<double>(t.turns[i].words());
        }
        if (d - p.tau >= 0 && p.tau - q >= 0) out.push_back(s);
    }
    return out;
}

} // namespace

TEST_CASE("lecturing windows match a naive re-scan") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<Role, std::size_t>> spec;
        auto n = std::uniform_int_distribution<int>(0, 40)(rng);
        for (int i = 0; i < n; ++i)
            spec.emplace_back(static_cast<Role>(std::uniform_int_distribution<int>(0, 2)(rng)),
                              std::uniform_int_distribution<std::size_t>(0, 60)(rng));
        auto t = make_transcript(spec);
        LectUrParams p{std::uniform_int_distribution<int>(2, 12)(rng),
                       static_cast<double>(std::uniform_int_distribution<int>(1, 200)(rng)),
                       std::uniform_int_distribution<int>(1, 3)(rng)};
        auto r = lecturing_windows(t, p);
        CHECK(r.windows == naive(t, p));
        CHECK(r.score == r.windows.size());
        CHECK(r.n_windows_total == window_count(t.turns.size(), p));
    }
}

TEST_CASE("threshold is inclusive on both sides") {
    // physician sum exactly tau, patient sum exactly tau
    auto t = make_transcript({{Role::physician, 50}, {Role::patient, 100}, {Role::physician, 50}});
    auto r = lecturing_windows(t, {3, 100.0, 1});
    CHECK(r.score == 1);
    auto below = lecturing_windows(t, {3, 100.5, 1});
    CHECK(below.score == 0);
}

TEST_CASE("other-role turns occupy window positions without adding words") {
    auto t = make_transcript({{Role::physician, 30}, {Role::other, 500}, {Role::physician, 30}});
    CHECK(lecturing_windows(t, {3, 60.0, 1}).score == 1);
    CHECK(lecturing_windows(other_as_patient(t), {3, 60.0, 1}).score == 0);
    CHECK(lecturing_windows(t, {2, 60.0, 1}).score == 0);
}

TEST_CASE("short transcripts yield no windows") {
    auto t = make_transcript({{Role::physician, 500}});
    CHECK(window_count(1, {2, 1.0, 1}) == 0);
    CHECK(lecturing_windows(t, {2, 1.0, 1}).score == 0);
    CHECK(window_count(10, {4, 1.0, 3}) == 3);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(LectUrParams({1, 10.0, 1}).validate(), ValidationError);
    CHECK_THROWS_AS(LectUrParams({5, 0.0, 1}).validate(), ValidationError);
    CHECK_THROWS_AS(LectUrParams({5, 10.0, 0}).validate(), ValidationError);
}

TEST_CASE("entropy oracle values") {
    std::vector<double> p{0.5, 0.25, 0.25};
    CHECK(entropy(p) == doctest::Approx(1.0397207708399179).epsilon(1e-14));
    for (std::size_t n : {1, 2, 7, 256}) {
        std::vector<double> u(n, 1.0 / static_cast<double>(n));
        CHECK(std::abs(entropy(u) - std::log(static_cast<double>(n))) < 1e-12);
    }
    std::vector<double> with_zero{0.0, 1.0};
    CHECK(entropy(with_zero) == 0.0);
    std::vector<double> bad{0.5, 0.6};
    CHECK_THROWS_AS(entropy(bad), ValidationError);
    std::vector<double> negative{-0.5, 1.5};
    CHECK_THROWS_AS(entropy(negative), ValidationError);
}

TEST_CASE("kde pmf is normalized over a padded grid") {
    std::vector<double> scores{0, 1, 1, 2, 5, 9};
    auto pmf = kde_pmf(scores, 128);
    CHECK(pmf.grid.size() == 128);
    CHECK(std::accumulate(pmf.mass.begin(), pmf.mass.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pmf.grid.front() == doctest::Approx(0 - 3 * pmf.bandwidth));
    CHECK(pmf.grid.back() == doctest::Approx(9 + 3 * pmf.bandwidth));
    std::vector<double> same{4, 4, 4};
    CHECK(silverman_bandwidth(same) == 1.0);
    std::vector<double> none;
    CHECK_THROWS_AS(kde_pmf(none), ValidationError);
}

TEST_CASE("grid ranges parse lo:hi:step inclusively") {
    auto g = GridRange::parse("10:20:5");
    CHECK(g.values() == std::vector<double>{10, 15, 20});
    CHECK(GridRange::parse("5:5:1").values() == std::vector<double>{5});
    CHECK(GridRange::parse("10:12").values() == std::vector<double>{10, 11, 12});
    CHECK(GridRange::parse("7").values() == std::vector<double>{7});
    CHECK_THROWS(GridRange::parse("a:b:c"));
    CHECK_THROWS(GridRange::parse("20:10:1"));
    CHECK_THROWS(GridRange::parse("1:2:0"));
}

TEST_CASE("fit_params finds the only informative grid point") {
    // Two-turn transcripts: W=3 never fits, tau=100 never reached, so only
    // (tau=10, W=2) separates long from short physician turns.
    std::vector<Transcript> corpus;
    for (int i = 0; i < 12; ++i)
        corpus.push_back(make_transcript({{Role::physician, i % 3 == 0 ? 20u : 5u}, {Role::patient, 1}},
                                         "t" + std::to_string(i)));
    auto s = fit_params(corpus, {10, 100, 90}, {2, 3, 1});
    CHECK(s.taus == std::vector<double>{10, 100});
    CHECK(s.windows == std::vector<int>{2, 3});
    CHECK(s.best_tau == 10);
    CHECK(s.best_window == 2);
    CHECK(s.best_entropy > 0.0);
    CHECK(s.degenerate_points == 3);
    CHECK_FALSE(s.degenerate);
    CHECK(s.entropy[1][0] == 0.0);
}

TEST_CASE("all-degenerate surface ties to the smallest window and tau") {
    std::vector<Transcript> corpus{make_transcript({{Role::patient, 3}}, "a"), make_transcript({{Role::patient, 4}}, "b")};
    auto s = fit_params(corpus, {10, 30, 10}, {2, 4, 1});
    CHECK(s.degenerate);
    CHECK(s.best_window == 2);
    CHECK(s.best_tau == 10);
    CHECK(s.best_entropy == 0.0);
}

TEST_CASE("median split sends ties to the low group") {
    std::vector<double> scores{1, 2, 2, 3};
    auto m = split_by_median(scores);
    CHECK(m.median == 2.0);
    CHECK(m.high == std::vector<std::size_t>{3});
    CHECK(m.low == std::vector<std::size_t>{0, 1, 2});
    std::vector<double> flat{5, 5};
    CHECK(split_by_median(flat).degenerate);
}
