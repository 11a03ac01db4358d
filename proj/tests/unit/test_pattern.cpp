#include "bedside/dialogue/pattern.hpp"
#include "bedside/error.hpp"

#include <doctest.h>

using namespace bedside;
using namespace bedside::dialogue;

namespace {
std::optional<Bindings> m(const std::vector<std::string>& pat, const std::string& text, const FeatureClasses& f = {}) {
    return match_pattern(Pattern::parse(pat), tokenize(text), f);
}
} // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("Hello, Sophie!") == Tokens{"hello", ",", "sophie", "!"});
    CHECK(tokenize("I'm  \"fine\" (really)") == Tokens{"i'm", "fine", "really"});
    CHECK(tokenize("don\xE2\x80\x99t") == Tokens{"don't"});
    CHECK(tokenize("Is it bad? Yes.", true) == Tokens{"is", "it", "bad", "yes"});
    CHECK(tokenize("").empty());
}

TEST_CASE("split_sentences keeps terminators") {
    auto s = split_sentences(tokenize("I see. What now? ok"));
    REQUIRE(s.size() == 3);
    CHECK(s[0] == Tokens{"i", "see", "."});
    CHECK(s[1] == Tokens{"what", "now", "?"});
    CHECK(s[2] == Tokens{"ok"});
}

TEST_CASE("pattern parse") {
    auto p = Pattern::parse({"a", "@cls", "*3", "*"});
    REQUIRE(p.elements().size() == 4);
    CHECK(p.elements()[1].kind == PatternElement::Kind::feature);
    CHECK(p.elements()[2].max_span == 3);
    CHECK(p.elements()[3].max_span == PatternElement::unbounded);
    CHECK(p.wildcard_count() == 2);
    CHECK_THROWS_AS(Pattern::parse({""}), ValidationError);
    CHECK_THROWS_AS(Pattern::parse({"*x"}), ValidationError);
    CHECK_THROWS_AS(Pattern::parse({"@"}), ValidationError);
}

TEST_CASE("patterns must cover the whole sequence") {
    CHECK(m({"yes"}, "yes"));
    CHECK_FALSE(m({"yes"}, "yes please"));
    CHECK(m({"yes", "*"}, "yes please"));
    CHECK(m({"*"}, ""));
    CHECK_FALSE(m({"yes"}, ""));
}

TEST_CASE("wildcards expand leftmost-shortest") {
    auto b = m({"*", "and", "*"}, "a and b and c");
    REQUIRE(b);
    CHECK((*b)[0] == "a");
    CHECK((*b)[1] == "b and c");
    b = m({"*", "*"}, "x y");
    REQUIRE(b);
    CHECK((*b)[0] == "");
    CHECK((*b)[1] == "x y");
}

TEST_CASE("bounded wildcards") {
    CHECK(m({"i", "*1", "you"}, "i love you"));
    CHECK(m({"i", "*1", "you"}, "i you"));
    CHECK_FALSE(m({"i", "*1", "you"}, "i really love you"));
    CHECK(m({"i", "*2", "you"}, "i really love you"));
}

TEST_CASE("feature classes") {
    FeatureClasses f{{"pain", {"pain", "ache"}}};
    CHECK(m({"*", "@pain", "*"}, "my back ache is bad", f));
    CHECK_FALSE(m({"*", "@pain", "*"}, "my back is bad", f));
    CHECK_FALSE(m({"@nope"}, "pain", f));
    auto spans = match_spans(Pattern::parse({"*", "@pain", "*"}), tokenize("the ache now"), f);
    REQUIRE(spans);
    CHECK((*spans)[0] == Tokens{"the"});
    CHECK((*spans)[1] == Tokens{"now"});
}

TEST_CASE("templates") {
    CHECK(fill_template("you said {1} then {2}", {"a", "b c"}) == "you said a then b c");
    CHECK(fill_template("no slots", {}) == "no slots");
    CHECK_THROWS_AS(fill_template("{3}", {"a"}), ValidationError);
    CHECK(max_slot("{1} and {12}") == 12);
    CHECK(max_slot("plain") == 0);
}
