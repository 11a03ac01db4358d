#pragma once

#include "bedside/dialogue/content_pack.hpp"
#include "bedside/dialogue/transduce.hpp"

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bedside::dialogue {

struct PlanStep {
    enum class Kind { say, expect, subschema };
    Kind kind = Kind::say;
    /// Agent line (say) or schema name (subschema).
    std::string text;
    std::string tag;
    std::string topic;
    std::string step;
    std::string schema;
    /// Set when interpretation made this step redundant.
    std::string skip_reason;
};

struct ExecutedStep {
    PlanStep step;
    bool skipped = false;
    std::string reason;
};

enum class Speaker { user, agent };

struct LoggedTurn {
    Speaker speaker = Speaker::agent;
    std::string text;
    std::optional<double> t_start;
    std::optional<double> t_end;
    /// Gist clauses extracted from a user turn.
    std::vector<GistClause> gists;
};

struct SessionState {
    std::deque<PlanStep> plan;
    std::vector<ExecutedStep> history;
    std::vector<GistClause> gist_store;
    /// The single active ExpectUser step while the session is live.
    std::optional<PlanStep> expecting;
    /// Set after one re-prompt on the current ExpectUser.
    bool reprompted = false;
    bool last_fallback = false;
    bool complete = false;
    std::vector<LoggedTurn> turn_log;
    /// Agent lines emitted by start().
    std::vector<std::string> opening;

    const std::string& context() const;
};

struct InterpretResult {
    std::vector<GistClause> gists;
    /// No tree produced a gist for the input.
    bool fallback = false;
    /// Plan steps newly marked as skipped.
    std::vector<std::string> skipped;
};

struct ReplyBundle {
    std::vector<std::string> replies;
    bool done = false;

    std::string text() const;
    nlohmann::json to_json() const;
};

struct EngineOptions {
    /// Drop user punctuation before matching, as ASR output would arrive.
    bool strip_punctuation = false;
};

/// Schema-driven dialogue manager over a content pack. Deterministic: the
/// same pack, history and input always produce the same output.
class DialogueEngine {
public:
    explicit DialogueEngine(const ContentPack& pack, EngineOptions opts = {});

    /// New session, advanced up to the first ExpectUser. The opener lines
    /// are logged as the first agent turn.
    SessionState start() const;
    static std::vector<std::string> opener(const SessionState& s);

    InterpretResult interpret(SessionState& s, const std::string& text) const;
    ReplyBundle respond(SessionState& s, const InterpretResult& interpretation) const;

    /// interpret + respond, logging both turns. Throws ConflictError once
    /// the session is complete.
    ReplyBundle step(SessionState& s, const std::string& text, std::optional<double> t_start = std::nullopt,
                     std::optional<double> t_end = std::nullopt) const;

    const ContentPack& pack() const { return pack_; }
    const EngineOptions& options() const { return opts_; }

private:
    void instantiate(SessionState& s, const std::string& schema) const;
    void advance(SessionState& s, std::vector<std::string>& out) const;
    void mark_answered(SessionState& s, std::vector<std::string>* skipped) const;
    bool answered(const SessionState& s, const std::string& topic) const;
    std::optional<TreeHit> react(const std::string& tree, const GistClause& gist) const;

    const ContentPack& pack_;
    EngineOptions opts_;
};

} // namespace bedside::dialogue
