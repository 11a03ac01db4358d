#pragma once

#include "bedside/dialogue/content_pack.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bedside::dialogue {

struct GistClause {
    std::string text;
    GistKind kind = GistKind::statement;
    std::string topic;

    bool operator==(const GistClause&) const = default;
};

/// Visit log for instrumented traversals: node ids in the order their
/// patterns were tried, with whether any alternative matched.
struct TraversalTrace {
    std::vector<std::pair<std::string, bool>> visits;
};

/// The first terminal reached and the wildcard bindings of its pattern.
struct TreeHit {
    const TreeNode* node = nullptr;
    Bindings bindings;
    std::vector<Tokens> spans;
};

/// Depth-first search: a matching inner node descends into its children in
/// order; when none of them reaches a terminal the search continues with
/// the node's next sibling, and only then backs up a level. Fallthrough
/// terminals count as failures.
std::optional<TreeHit> find_terminal(const TransductionTree& tree, const Tokens& tokens, const FeatureClasses& features,
                                     TraversalTrace* trace = nullptr);

/// Gist clauses for one token sequence. Segment terminals transduce each
/// listed slot from the tree's roots and concatenate the results in order.
std::vector<GistClause> transduce_tokens(const TransductionTree& tree, const Tokens& tokens,
                                         const FeatureClasses& features, TraversalTrace* trace = nullptr);

/// Splits the utterance into sentences and transduces each, in input order.
std::vector<GistClause> transduce(const TransductionTree& tree, const std::string& utterance,
                                  const FeatureClasses& features, bool strip_punctuation = false);

} // namespace bedside::dialogue
