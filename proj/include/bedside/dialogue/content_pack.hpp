#pragma once

#include "bedside/dialogue/pattern.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace bedside::dialogue {

enum class GistKind { statement, question };

std::string_view to_string(GistKind k);

struct StoreGist {
    std::string text;
    GistKind kind = GistKind::statement;
    std::string topic;
};
struct Output {
    std::string text;
};
struct InstantiateSubschema {
    std::string name;
};
/// Treat this terminal as a non-match so traversal moves on to its siblings.
struct Fallthrough {};
/// Transduce each listed wildcard slot separately from the tree's roots.
struct Segment {
    std::vector<std::size_t> slots;
};

using Directive = std::variant<StoreGist, Output, InstantiateSubschema, Fallthrough, Segment>;

struct TreeNode {
    std::string id;
    /// Alternatives; the node matches when any of them does (first wins).
    std::vector<Pattern> patterns;
    std::vector<TreeNode> children;
    std::optional<Directive> directive;

    bool terminal() const { return directive.has_value(); }
};

struct TransductionTree {
    std::string name;
    /// Topic-specific fallback line when nothing matches.
    std::optional<std::string> default_response;
    std::vector<TreeNode> roots;
};

struct AgentSay {
    std::string text;
    /// Context for interpreting the user's answer.
    std::string tag;
    /// Information this line asks for; skipped when the user already gave it.
    std::string topic;
    /// Protocol step label (setup, perception, ...), for tracing only.
    std::string step;
};
struct ExpectUser {
    std::string tag;
};
struct AgentSubschema {
    std::string name;
};

using SchemaEvent = std::variant<AgentSay, ExpectUser, AgentSubschema>;

struct DialogueSchema {
    std::string name;
    std::vector<SchemaEvent> events;
};

struct ContentPack {
    std::string id;
    std::string persona;
    std::string main_schema;
    std::string backbone_tree;
    std::string reaction_tree;
    std::string reply_tree;
    std::string closing;
    std::string generic_default;
    std::string unknown_question;

    std::map<std::string, DialogueSchema> schemas;
    std::map<std::string, TransductionTree> trees;
    FeatureClasses features;

    const DialogueSchema& schema(const std::string& name) const;
    const TransductionTree* tree(const std::string& name) const;

    /// Reads pack.json, schemas/*.json, trees/*.json and features.json.
    /// Throws ParseError on malformed files and ValidationError listing every
    /// problem validate() finds.
    static ContentPack load(const std::filesystem::path& dir);
    /// Parses without cross-reference validation.
    static ContentPack load_unchecked(const std::filesystem::path& dir);

    /// Dangling context tags, undeclared feature classes, unbound template
    /// slots, missing schemas and instantiation cycles. Empty when valid.
    std::vector<std::string> validate() const;
};

/// Directory of the pack shipped with the source tree.
std::filesystem::path default_pack_dir();

TreeNode parse_tree_node(const nlohmann::json& j, const std::string& default_id);
TransductionTree parse_tree(const nlohmann::json& j, const std::string& name);
DialogueSchema parse_schema(const nlohmann::json& j, const std::string& name);

} // namespace bedside::dialogue
