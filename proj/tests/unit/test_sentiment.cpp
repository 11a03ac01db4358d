#include "bedside/error.hpp"
#include "bedside/sentiment.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace bedside;
using namespace bedside::sentiment;

namespace {
SentimentLexicon good_only() {
    SentimentLexicon lex;
    lex.add_word("good", 1.9);
    for (const auto& n : SentimentLexicon::default_negations()) lex.add_negation(n);
    for (const auto& [w, b] : SentimentLexicon::default_boosters()) lex.add_booster(w, b);
    return lex;
}
} // namespace

TEST_CASE("empty text is fully neutral") {
    auto s = score_turn("", SentimentLexicon::demo());
    CHECK(s.pos == 0.0);
    CHECK(s.neg == 0.0);
    CHECK(s.neu == 1.0);
    CHECK(s.compound == 0.0);
    auto punct = score_turn("... !!", SentimentLexicon::demo());
    CHECK(punct.neu == 1.0);
}

TEST_CASE("single positive word") {
    auto s = score_turn("Good!", good_only());
    CHECK(s.compound == doctest::Approx(0.44043357076016854).epsilon(1e-12));
    CHECK(s.pos == doctest::Approx(1.0));
    CHECK(s.neu == doctest::Approx(0.0));
}

TEST_CASE("negation flips sign and damps magnitude") {
    auto lex = good_only();
    auto s = score_turn("not good", lex);
    CHECK(s.compound == doctest::Approx(-0.3412376512543242).epsilon(1e-12));
    CHECK(s.neg == doctest::Approx(0.7064004697592483).epsilon(1e-12));
    CHECK(s.neu == doctest::Approx(1.0 - 0.7064004697592483).epsilon(1e-12));
    CHECK(std::abs(s.compound) < score_turn("good", lex).compound);
    // contractions ending in n't negate too
    CHECK(score_turn("isn't good", lex).compound == doctest::Approx(s.compound));
    // outside the three-token window no flip happens
    CHECK(score_turn("not one two three good", lex).compound > 0.0);
    CHECK(score_turn("not one two good", lex).compound < 0.0);
}

TEST_CASE("boosters scale with distance") {
    auto lex = good_only();
    CHECK(score_turn("very good", lex).compound == doctest::Approx(0.4927250317396701).epsilon(1e-12));
    auto near = score_turn("very good", lex).compound;
    auto far = score_turn("very xx yy good", lex).compound;
    CHECK(near > far);
    CHECK(far > score_turn("good", lex).compound);
    CHECK(score_turn("slightly good", lex).compound < score_turn("good", lex).compound);
}

TEST_CASE("scores are a distribution on random strings") {
    std::mt19937_64 rng(3);
    const auto& lex = SentimentLexicon::demo();
    std::vector<std::string> vocab{"good", "bad", "not", "very", "pain", "hope", "the", "scan", "isn't", "slightly",
                                   "cancer", "glad", "worse", "fine", "no", "never", "Great!", "sad,", "x"};
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        auto n = std::uniform_int_distribution<int>(0, 15)(rng);
        for (int k = 0; k < n; ++k) text += vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)] + " ";
        auto s = score_turn(text, lex);
        CHECK(s.pos + s.neg + s.neu == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.compound >= -1.0);
        CHECK(s.compound <= 1.0);
    }
}

TEST_CASE("unknown tokens at the edges leave the compound score unchanged") {
    const auto& lex = SentimentLexicon::demo();
    for (std::string text : {"I am not glad about the pain", "very good news", "this is bad"}) {
        auto base = score_turn(text, lex).compound;
        CHECK(score_turn("qqq zzz " + text, lex).compound == doctest::Approx(base).epsilon(1e-15));
        CHECK(score_turn(text + " qqq zzz", lex).compound == doctest::Approx(base).epsilon(1e-15));
    }
}

TEST_CASE("lexicon parsing") {
    auto lex = SentimentLexicon::parse("# comment\nhappy\t2.7\t0.6\t[3,2]\n@booster\nsuper\t0.5\n@negate\nnah\n@lexicon\nsad\t-2.1\n");
    REQUIRE(lex.valence("happy"));
    CHECK(*lex.valence("happy") == 2.7);
    CHECK(*lex.valence("sad") == -2.1);
    CHECK(*lex.booster("super") == 0.5);
    CHECK(lex.is_negation("nah"));
    CHECK_FALSE(lex.is_negation("not"));  // explicit section replaces the defaults
    CHECK(lex.size() == 2);
    CHECK_THROWS_AS(SentimentLexicon::parse("good\t1\ngood\t2\n"), Error);
    CHECK_THROWS_AS(SentimentLexicon::parse("good\tabc\n"), Error);
    auto defaults = SentimentLexicon::parse("good\t1.9\n");
    CHECK(defaults.is_negation("not"));
    CHECK(defaults.booster("very"));
    CHECK(SentimentLexicon::demo().size() > 50);
}

TEST_CASE("segment bounds put the remainder in earlier segments") {
    auto b = segment_bounds(10, 4);
    std::vector<std::pair<std::size_t, std::size_t>> want{{0, 3}, {3, 6}, {6, 8}, {8, 10}};
    CHECK(b == want);
    CHECK(segment_bounds(8, 8).back() == std::pair<std::size_t, std::size_t>{7, 8});
    CHECK_THROWS_AS(segment_bounds(3, 4), ValidationError);
    CHECK_THROWS_AS(segment_bounds(3, 0), ValidationError);
}

TEST_CASE("trajectory averages role turns per segment and flags empty ones") {
    auto lex = good_only();
    Transcript t;
    t.turns.emplace_back(Role::physician, "good");
    t.turns.emplace_back(Role::patient, "meh");
    t.turns.emplace_back(Role::patient, "meh");
    t.turns.emplace_back(Role::physician, "good stuff");
    auto tr = trajectory(t, Role::physician, 4, lex);
    REQUIRE(tr.size() == 4);
    CHECK(tr.segments[0] == doctest::Approx(1.0));
    CHECK(tr.empty_segment[1]);
    CHECK(tr.segments[1] == 0.0);
    CHECK(tr.segments[3] == doctest::Approx(2.9 / 3.9));
    CHECK(tr.any_empty());
    CHECK(average_sentiment(t, Role::physician, lex) == doctest::Approx((1.0 + 2.9 / 3.9) / 2));
    CHECK_THROWS_AS(average_sentiment(t, Role::other, lex), ValidationError);
}
