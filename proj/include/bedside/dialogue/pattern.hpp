#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bedside::dialogue {

using Tokens = std::vector<std::string>;

/// Lowercases and splits on whitespace; sentence punctuation (. , ! ? ; :)
/// becomes its own token, apostrophes stay inside words, quotes and
/// brackets are dropped. With strip_punctuation all punctuation tokens are
/// removed, as an ASR transcript would arrive.
Tokens tokenize(std::string_view text, bool strip_punctuation = false);

/// Splits after each '.', '?' or '!' token; the terminator stays with its sentence.
std::vector<Tokens> split_sentences(const Tokens& tokens);

std::string join(std::span<const std::string> tokens);

/// Feature class name -> member words.
using FeatureClasses = std::map<std::string, std::set<std::string>>;

struct PatternElement {
    enum class Kind { literal, feature, wildcard };
    Kind kind = Kind::literal;
    /// Literal token or feature class name.
    std::string text;
    /// Wildcards match 0..max_span tokens.
    std::size_t max_span = 0;

    static constexpr std::size_t unbounded = static_cast<std::size_t>(-1);
};

/// Token pattern. Written as strings: "word" is a literal, "@class" a
/// feature class, "*N" a wildcard of at most N tokens and "*" an unbounded
/// wildcard. A pattern must account for the whole token sequence.
class Pattern {
public:
    Pattern() = default;
    explicit Pattern(std::vector<PatternElement> elements) : elements_(std::move(elements)) {}

    static Pattern parse(const std::vector<std::string>& items);

    const std::vector<PatternElement>& elements() const { return elements_; }
    std::size_t wildcard_count() const;
    std::string str() const;

private:
    std::vector<PatternElement> elements_;
};

/// Wildcard bindings in pattern order (slot 1 is index 0), as joined text.
using Bindings = std::vector<std::string>;

/// First alignment under leftmost-shortest wildcard expansion, or nullopt.
/// Feature classes must have been validated at load time; an unknown class
/// simply never matches here.
std::optional<Bindings> match_pattern(const Pattern& pattern, std::span<const std::string> tokens,
                                      const FeatureClasses& features);

/// Token spans of each wildcard for the same alignment match_pattern picks.
std::optional<std::vector<Tokens>> match_spans(const Pattern& pattern, std::span<const std::string> tokens,
                                               const FeatureClasses& features);

/// Replaces {N} with slot N (1-based). Throws ValidationError for a slot
/// the bindings do not hold.
std::string fill_template(std::string_view tmpl, const Bindings& bindings);

/// Largest {N} referenced by the template (0 when none).
std::size_t max_slot(std::string_view tmpl);

} // namespace bedside::dialogue
