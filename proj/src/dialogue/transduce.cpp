#include "bedside/dialogue/transduce.hpp"

#include "bedside/error.hpp"

namespace bedside::dialogue {

namespace {

constexpr int kMaxSegmentDepth = 8;

bool search(const std::vector<TreeNode>& nodes, const Tokens& tokens, const FeatureClasses& features,
            TraversalTrace* trace, TreeHit& hit) {
    for (const auto& node : nodes) {
        std::optional<std::vector<Tokens>> spans;
        for (const auto& p : node.patterns) {
            spans = match_spans(p, tokens, features);
            if (spans) break;
        }
        if (trace) trace->visits.emplace_back(node.id, spans.has_value());
        if (!spans) continue;
        if (node.terminal()) {
            if (std::holds_alternative<Fallthrough>(*node.directive)) continue;
            hit.node = &node;
            hit.spans = std::move(*spans);
            hit.bindings.clear();
            for (const auto& s : hit.spans) hit.bindings.push_back(join(s));
            return true;
        }
        if (search(node.children, tokens, features, trace, hit)) return true;
    }
    return false;
}

void collect(const TransductionTree& tree, const Tokens& tokens, const FeatureClasses& features,
             TraversalTrace* trace, int depth, std::vector<GistClause>& out) {
    if (tokens.empty() || depth > kMaxSegmentDepth) return;
    auto hit = find_terminal(tree, tokens, features, trace);
    if (!hit) return;
    if (const auto* g = std::get_if<StoreGist>(&*hit->node->directive)) {
        out.push_back({fill_template(g->text, hit->bindings), g->kind, g->topic});
    } else if (const auto* seg = std::get_if<Segment>(&*hit->node->directive)) {
        for (auto slot : seg->slots) collect(tree, hit->spans.at(slot - 1), features, trace, depth + 1, out);
    }
}

} // namespace

std::optional<TreeHit> find_terminal(const TransductionTree& tree, const Tokens& tokens, const FeatureClasses& features,
                                     TraversalTrace* trace) {
    TreeHit hit;
    if (search(tree.roots, tokens, features, trace, hit)) return hit;
    return std::nullopt;
}

std::vector<GistClause> transduce_tokens(const TransductionTree& tree, const Tokens& tokens,
                                         const FeatureClasses& features, TraversalTrace* trace) {
    std::vector<GistClause> out;
    collect(tree, tokens, features, trace, 0, out);
    return out;
}

std::vector<GistClause> transduce(const TransductionTree& tree, const std::string& utterance,
                                  const FeatureClasses& features, bool strip_punctuation) {
    std::vector<GistClause> out;
    for (const auto& sentence : split_sentences(tokenize(utterance, strip_punctuation))) {
        auto gists = transduce_tokens(tree, sentence, features);
        out.insert(out.end(), gists.begin(), gists.end());
    }
    return out;
}

} // namespace bedside::dialogue
