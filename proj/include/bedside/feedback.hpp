#pragma once

#include "bedside/dialogue/engine.hpp"
#include "bedside/lectur.hpp"
#include "bedside/sentiment.hpp"
#include "bedside/transcript.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bedside::feedback {

/// Reference curve for S segments. The shape is a dynamic style: raised at
/// 25% of the way in and again near the end. Other S are linearly resampled.
std::vector<double> default_suggested_trajectory(std::size_t segments = 8);

struct FeedbackConfig {
    /// Live chat turns are short, so the corpus optimum is scaled down.
    lectur::LectUrParams lectur{6, 40.0, 1};
    std::size_t segments = 8;
    /// Empty means default_suggested_trajectory(segments).
    std::vector<double> suggested;
    /// nullptr means the bundled demo lexicon.
    const sentiment::SentimentLexicon* lexicon = nullptr;
};

/// User turns become physician turns and agent turns patient turns.
Transcript session_transcript(const std::vector<dialogue::LoggedTurn>& log, const std::string& id = "session");

/// Pooled words per minute over user turns carrying both timestamps.
std::optional<double> speech_rate(const std::vector<dialogue::LoggedTurn>& log);

/// Question gists plus user turns ending in '?' that yielded no gist at all.
std::size_t count_questions(const std::vector<dialogue::LoggedTurn>& log);

/// Indices into `log` of user turns inside at least one lecturing window.
std::vector<std::size_t> lecturing_highlights(const std::vector<dialogue::LoggedTurn>& log,
                                              const lectur::LectUrParams& p);

struct AnnotatedTurn {
    std::size_t id = 0;
    std::string speaker;
    std::string text;
    std::size_t words = 0;
    std::optional<double> t_start;
    std::optional<double> t_end;
    std::vector<dialogue::GistClause> gists;
    bool lecturing = false;

    bool operator==(const AnnotatedTurn&) const = default;
};

struct TurnTaking {
    std::string speaker;
    std::size_t words = 0;

    bool operator==(const TurnTaking&) const = default;
};

struct FeedbackReport {
    std::optional<double> speech_rate_wpm;
    std::size_t question_count = 0;
    std::vector<TurnTaking> turn_taking;
    std::vector<std::size_t> lecturing_turn_ids;
    lectur::LectUrParams lectur;
    std::size_t segments = 0;
    std::optional<std::vector<double>> user_trajectory;
    std::optional<std::vector<double>> agent_trajectory;
    /// Why trajectories are missing, when they are.
    std::string trajectories_omitted;
    std::vector<double> suggested_trajectory;
    std::vector<AnnotatedTurn> transcript;

    nlohmann::json to_json() const;
    static FeedbackReport from_json(const nlohmann::json& j);
    bool operator==(const FeedbackReport& o) const;
};

/// Throws ValidationError("nothing to report") when the user never spoke.
FeedbackReport build_report(const dialogue::SessionState& session, const FeedbackConfig& config = {});
FeedbackReport build_report(const std::vector<dialogue::LoggedTurn>& log, const FeedbackConfig& config = {});

/// JSON Schema (draft 2020-12) describing FeedbackReport::to_json output.
const nlohmann::json& report_schema();

nlohmann::json to_json(const dialogue::GistClause& g);
dialogue::GistClause gist_from_json(const nlohmann::json& j);

} // namespace bedside::feedback
