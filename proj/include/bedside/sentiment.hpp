#pragma once

#include "bedside/transcript.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bedside::sentiment {

// Rule constants, same values as the published VADER scorer.
inline constexpr double kNegationScalar = -0.74;
inline constexpr double kBoosterIncrement = 0.293;
inline constexpr double kNormalizationAlpha = 15.0;
inline constexpr std::size_t kRuleWindow = 3;

/// Word valences plus booster increments and negation words. Keys are
/// stored lowercase; lookups are case-insensitive.
class SentimentLexicon {
public:
    SentimentLexicon() = default;

    void add_word(std::string_view word, double valence);
    void add_booster(std::string_view word, double increment);
    void add_negation(std::string_view word);

    const double* valence(std::string_view lower_word) const;
    const double* booster(std::string_view lower_word) const;
    bool is_negation(std::string_view lower_word) const;

    std::size_t size() const { return words_.size(); }

    /// Tab-separated `word<TAB>valence` lines; extra columns (as in the
    /// published VADER lexicon) are ignored. `@booster` and `@negate`
    /// headers switch sections, `@lexicon` switches back. `#` starts a comment.
    static SentimentLexicon parse(std::string_view text);
    static SentimentLexicon load(const std::filesystem::path& path);
    /// The small demo lexicon shipped under data/lexicon.
    static const SentimentLexicon& demo();

    /// Negation words used when a lexicon file has no @negate section.
    static const std::vector<std::string>& default_negations();
    /// Booster words used when a lexicon file has no @booster section.
    static const std::vector<std::pair<std::string, double>>& default_boosters();

private:
    std::unordered_map<std::string, double> words_;
    std::unordered_map<std::string, double> boosters_;
    std::unordered_set<std::string> negations_;
};

struct TurnSentiment {
    double pos = 0.0;
    double neg = 0.0;
    double neu = 1.0;
    double compound = 0.0;
};

/// Lowercased tokens with leading/trailing punctuation removed; tokens that
/// are punctuation only are dropped.
std::vector<std::string> sentiment_tokens(std::string_view text);

TurnSentiment score_turn(std::string_view text, const SentimentLexicon& lex);

struct SentimentTrajectory {
    Role role = Role::physician;
    std::vector<double> segments;
    /// True for segments with no turn by `role`; their entry is 0.
    std::vector<bool> empty_segment;

    std::size_t size() const { return segments.size(); }
    bool any_empty() const;
};

/// Bounds [begin, end) of `n_segments` contiguous near-equal segments over
/// `n_turns` turns; earlier segments take the remainder.
std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(std::size_t n_turns, std::size_t n_segments);

SentimentTrajectory trajectory(const Transcript& t, Role r, std::size_t n_segments, const SentimentLexicon& lex);

/// Mean positive score over the role's turns.
double average_sentiment(const Transcript& t, Role r, const SentimentLexicon& lex);

} // namespace bedside::sentiment
