#include "bedside/dialogue/engine.hpp"
#include "bedside/error.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace bedside;
using namespace bedside::dialogue;
namespace fs = std::filesystem;

namespace {
const ContentPack& sophie() {
    static const ContentPack pack = ContentPack::load(default_pack_dir());
    return pack;
}

const std::vector<std::string> kCooperative{
    "Hello Sophie, nice to meet you.",
    "I'm sorry to hear you're having trouble sleeping.",
    "Yes, I think we should increase your pain medication.",
    "The scan shows the cancer has spread.",
    "Yes, I'm afraid the treatment is not working anymore.",
    "It is hard to predict, but it may be a matter of months.",
    "I understand that this is scary.",
    "I think comfort care may be the best option for you.",
    "We can bring your family together and make a plan.",
};

std::vector<std::string> executed_steps(const SessionState& s) {
    std::vector<std::string> out;
    for (const auto& h : s.history)
        if (!h.skipped && h.step.kind == PlanStep::Kind::say && !h.step.step.empty()) out.push_back(h.step.step);
    return out;
}

void write(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << s;
}

ContentPack mini() {
    auto dir = testutil::temp_dir("engine_mini");
    write(dir / "pack.json", R"({"id": "mini", "main_schema": "main", "backbone_tree": "general",
        "reaction_tree": "reactions", "reply_tree": "replies", "closing": "Bye.",
        "generic_default": "Pardon?", "unknown_question": "No idea."})");
    write(dir / "features.json", R"({"yes": ["yes", "yeah"]})");
    write(dir / "schemas/main.json", R"({"events": [
        {"say": "Hello.", "tag": "hello"}, {"expect": "hello"},
        {"say": "Anything more?", "tag": "general", "topic": "more"}, {"expect": "general"}]})");
    write(dir / "trees/hello.json", R"({"nodes": [{"pattern": ["@yes", "*"], "gist": "Yes.", "topic": "more"}]})");
    write(dir / "trees/general.json", R"({"nodes": [
        {"pattern": ["what", "*", "?"], "gist": "A question.", "kind": "question"},
        {"pattern": ["*", "?"], "gist": "Odd question.", "kind": "question"},
        {"pattern": ["ok", "*"], "gist": "Fine."}]})");
    write(dir / "trees/reactions.json", R"({"nodes": [{"pattern": ["yes", "."], "output": "Good."}]})");
    write(dir / "trees/replies.json", R"({"nodes": [{"pattern": ["a", "question", "."], "output": "An answer."}]})");
    return ContentPack::load(dir);
}
} // namespace

TEST_CASE("the opener is the first line of the main schema") {
    DialogueEngine engine(sophie());
    auto s = engine.start();
    const auto& first = std::get<AgentSay>(sophie().schema("main").events.front());
    REQUIRE(DialogueEngine::opener(s).size() == 1);
    CHECK(DialogueEngine::opener(s)[0] == first.text);
    CHECK(s.context() == "opener");
    REQUIRE(s.turn_log.size() == 1);
    CHECK(s.turn_log[0].speaker == Speaker::agent);
    CHECK_FALSE(s.complete);
}

TEST_CASE("a cooperative script visits the protocol steps in order") {
    DialogueEngine engine(sophie());
    auto s = engine.start();
    ReplyBundle last;
    for (const auto& line : kCooperative) last = engine.step(s, line);
    CHECK(last.done);
    CHECK(s.complete);
    CHECK(last.replies.back() == sophie().closing);
    std::vector<std::string> want{"setup",     "perception", "perception", "invitation",
                                  "knowledge", "emotion",    "strategy",   "strategy"};
    CHECK(executed_steps(s) == want);
    CHECK_THROWS_AS(engine.step(s, "one more thing"), ConflictError);
}

TEST_CASE("information given early skips the step that asks for it") {
    DialogueEngine engine(sophie());
    auto s = engine.start();
    for (int i = 0; i < 3; ++i) engine.step(s, kCooperative[i]);
    CHECK(s.context() == "test-results");
    auto r = engine.step(s, "The scan shows the cancer has spread, and I think you may have about six months to live.");
    auto interp_gists = s.turn_log[s.turn_log.size() - 2].gists;
    REQUIRE(interp_gists.size() == 2);
    CHECK(interp_gists[0].topic == "test-results");
    CHECK(interp_gists[1].topic == "prognosis");
    CHECK(s.context() == "emotion");
    bool skipped = false;
    for (const auto& h : s.history)
        if (h.step.tag == "prognosis" && h.step.kind == PlanStep::Kind::say) {
            skipped = h.skipped;
            CHECK(h.reason == "answered");
        }
    CHECK(skipped);
    REQUIRE(r.replies.size() == 2);
    CHECK(r.replies[1].find("scared") != std::string::npos);
}

TEST_CASE("a question answered by a subschema moves into its follow-up") {
    DialogueEngine engine(sophie());
    auto s = engine.start();
    engine.step(s, kCooperative[0]);
    engine.step(s, kCooperative[1]);
    auto r = engine.step(s, "Can you tell me more about how you're feeling?");
    REQUIRE(r.replies.size() == 1);
    CHECK(r.replies[0].find("ache") != std::string::npos);
    CHECK(s.context() == "pain-details");
}

TEST_CASE("a statement and a question: react to one, answer the other") {
    DialogueEngine engine(sophie());
    auto s = engine.start();
    for (int i = 0; i < 6; ++i) engine.step(s, kCooperative[i]);
    CHECK(s.context() == "emotion");
    auto r = engine.step(s, "I understand. What matters most to you?");
    REQUIRE(r.replies.size() == 2);
    CHECK(r.replies[0] == "Thank you. It helps to hear that.");
    CHECK(r.replies[1] == "Being comfortable, and having good time with my family.");
    CHECK(s.context() == "emotion");
}

TEST_CASE("a subschema reply stays on the current topic") {
    DialogueEngine engine(sophie());
    auto s = engine.start();
    for (int i = 0; i < 7; ++i) engine.step(s, kCooperative[i]);
    CHECK(s.context() == "treatment-options");
    auto r = engine.step(s, "Are you worried about the side effects of chemo?");
    REQUIRE(r.replies.size() == 1);
    CHECK(r.replies[0].find("sick") != std::string::npos);
    CHECK(s.context() == "treatment-options");
}

TEST_CASE("unrecognized input re-prompts once then moves on") {
    DialogueEngine engine(sophie());
    auto s = engine.start();
    for (int i = 0; i < 8; ++i) engine.step(s, kCooperative[i]);
    CHECK(s.context() == "family");
    auto first = engine.step(s, "asdf qwerty zzz");
    CHECK(first.replies == std::vector<std::string>{*sophie().tree("family")->default_response});
    CHECK_FALSE(first.done);
    auto second = engine.step(s, "asdf qwerty zzz");
    CHECK(second.replies == std::vector<std::string>{sophie().closing});
    CHECK(second.done);
}

TEST_CASE("generic default, unknown questions and skip on a small pack") {
    auto pack = mini();
    DialogueEngine engine(pack);
    auto s = engine.start();
    CHECK(DialogueEngine::opener(s) == std::vector<std::string>{"Hello."});
    CHECK(engine.step(s, "zzz").replies == std::vector<std::string>{"Pardon?"});
    CHECK(engine.step(s, "what is this?").replies == std::vector<std::string>{"An answer."});
    CHECK(engine.step(s, "why?").replies == std::vector<std::string>{"No idea."});
    // answering "more" up front skips the second line and ends the session
    auto r = engine.step(s, "Yes.");
    CHECK(r.replies == std::vector<std::string>{"Good.", "Bye."});
    CHECK(r.done);
}

TEST_CASE("re-prompt then advance on a small pack") {
    auto pack = mini();
    DialogueEngine engine(pack);
    auto s = engine.start();
    CHECK(engine.step(s, "zzz").replies == std::vector<std::string>{"Pardon?"});
    CHECK(engine.step(s, "zzz").replies == std::vector<std::string>{"Anything more?"});
    CHECK(engine.step(s, "ok then.").replies == std::vector<std::string>{"Bye."});
    CHECK(s.complete);
}

TEST_CASE("identical input gives identical sessions") {
    DialogueEngine engine(sophie());
    auto a = engine.start();
    auto b = engine.start();
    for (const auto& line : kCooperative) CHECK(engine.step(a, line).replies == engine.step(b, line).replies);
    REQUIRE(a.turn_log.size() == b.turn_log.size());
    for (std::size_t i = 0; i < a.turn_log.size(); ++i) {
        CHECK(a.turn_log[i].text == b.turn_log[i].text);
        CHECK(a.turn_log[i].gists == b.turn_log[i].gists);
    }
}

TEST_CASE("punctuation-free input still works when stripping is on") {
    DialogueEngine engine(sophie(), {true});
    auto s = engine.start();
    engine.step(s, "hello sophie nice to meet you");
    engine.step(s, "im sorry to hear youre having trouble sleeping");
    auto r = engine.step(s, "can you tell me more about how youre feeling");
    REQUIRE(r.replies.size() == 1);
    CHECK(r.replies[0].find("ache") != std::string::npos);
}

TEST_CASE("timestamps are validated and logged") {
    DialogueEngine engine(sophie());
    auto s = engine.start();
    CHECK_THROWS_AS(engine.step(s, "hello", 5.0, 4.0), ValidationError);
    engine.step(s, "Hello Sophie, nice to meet you.", 1.0, 3.5);
    const auto& user = s.turn_log[1];
    CHECK(user.speaker == Speaker::user);
    CHECK(*user.t_start == 1.0);
    CHECK(*user.t_end == 3.5);
}
