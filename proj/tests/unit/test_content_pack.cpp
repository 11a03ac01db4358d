#include "bedside/dialogue/content_pack.hpp"
#include "bedside/error.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace bedside;
using namespace bedside::dialogue;
namespace fs = std::filesystem;

namespace {
void write(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << s;
}

// Minimal valid pack; tests break one thing at a time.
fs::path mini_pack(const std::string& name) {
    auto dir = testutil::temp_dir(name);
    write(dir / "pack.json", R"({"id": "mini", "main_schema": "main", "backbone_tree": "general",
        "reaction_tree": "reactions", "reply_tree": "replies", "closing": "Bye.",
        "generic_default": "Pardon?", "unknown_question": "No idea."})");
    write(dir / "features.json", R"({"yes": ["yes", "yeah"]})");
    write(dir / "schemas/main.json", R"({"events": [
        {"say": "Hello.", "tag": "hello"}, {"expect": "hello"},
        {"say": "Anything else?", "tag": "general", "topic": "more"}, {"expect": "general"}]})");
    write(dir / "trees/hello.json", R"({"nodes": [{"pattern": ["@yes", "*"], "gist": "Yes.", "topic": "more"}]})");
    write(dir / "trees/general.json", R"({"nodes": [{"pattern": ["*", "?"], "gist": "A question.", "kind": "question"}]})");
    write(dir / "trees/reactions.json", R"({"nodes": [{"pattern": ["yes", "."], "output": "Good."}]})");
    write(dir / "trees/replies.json", R"({"nodes": [{"pattern": ["a", "question", "."], "output": "An answer."}]})");
    return dir;
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    for (const auto& p : problems)
        if (p.find(needle) != std::string::npos) return true;
    return false;
}
} // namespace

TEST_CASE("shipped pack is valid") {
    auto pack = ContentPack::load(default_pack_dir());
    CHECK(pack.id == "sophie");
    CHECK(pack.validate().empty());
    CHECK(pack.schemas.contains("main"));
    CHECK(pack.tree("general") != nullptr);
    CHECK(pack.tree("nope") == nullptr);
    CHECK_THROWS_AS(pack.schema("nope"), NotFoundError);
}

TEST_CASE("mini pack loads") {
    auto pack = ContentPack::load(mini_pack("pack_ok"));
    CHECK(pack.trees.size() == 4);
    CHECK(pack.features.at("yes").contains("yeah"));
}

TEST_CASE("dangling context tag") {
    auto dir = mini_pack("pack_tag");
    write(dir / "schemas/main.json", R"({"events": [{"say": "Hi.", "tag": "missing"}, {"expect": "missing"}]})");
    auto problems = ContentPack::load_unchecked(dir).validate();
    CHECK(mentions(problems, "context tag 'missing'"));
    CHECK_THROWS_AS(ContentPack::load(dir), ValidationError);
}

TEST_CASE("undeclared feature class") {
    auto dir = mini_pack("pack_feature");
    write(dir / "trees/hello.json", R"({"nodes": [{"pattern": ["@nope"], "gist": "x"}]})");
    CHECK(mentions(ContentPack::load_unchecked(dir).validate(), "undeclared feature class '@nope'"));
}

TEST_CASE("unbound template slot") {
    auto dir = mini_pack("pack_slot");
    write(dir / "trees/hello.json", R"({"nodes": [{"pattern": ["*", "yes"], "gist": "{1} and {2}"}]})");
    CHECK(mentions(ContentPack::load_unchecked(dir).validate(), "slot {2}"));
    // every alternative must bind the slot
    write(dir / "trees/hello.json", R"({"nodes": [{"patterns": [["*", "yes"], ["yes"]], "output": "{1}"}]})");
    CHECK(mentions(ContentPack::load_unchecked(dir).validate(), "slot {1}"));
}

TEST_CASE("instantiation cycle") {
    auto dir = mini_pack("pack_cycle");
    write(dir / "schemas/a.json", R"({"events": [{"subschema": "b"}]})");
    write(dir / "schemas/b.json", R"({"events": [{"subschema": "a"}]})");
    CHECK(mentions(ContentPack::load_unchecked(dir).validate(), "cycle"));
}

TEST_CASE("unknown subschema and malformed files") {
    auto dir = mini_pack("pack_bad");
    write(dir / "trees/hello.json", R"({"nodes": [{"pattern": ["*"], "subschema": "ghost"}]})");
    CHECK(mentions(ContentPack::load_unchecked(dir).validate(), "unknown schema 'ghost'"));
    write(dir / "trees/hello.json", R"({"nodes": [{"pattern": ["*"], "gist": "a", "output": "b"}]})");
    CHECK_THROWS_AS(ContentPack::load_unchecked(dir), ParseError);
    write(dir / "trees/hello.json", "{not json");
    CHECK_THROWS_AS(ContentPack::load_unchecked(dir), ParseError);
    CHECK_THROWS_AS(ContentPack::load_unchecked(dir / "absent"), NotFoundError);
}
