#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bedside {

enum class Role { physician, patient, other };

std::string_view to_string(Role r);
/// Maps "physician"/"patient"/"other"; throws ValidationError for anything else.
Role parse_role(std::string_view s);

enum class Gender { unknown, female, male, other };

std::string_view to_string(Gender g);
Gender parse_gender(std::string_view s);

/// One answer on the seven-point two-year survival survey, or a non-answer.
class PrognosisResponse {
public:
    enum class Kind { value, dont_know, refused };

    PrognosisResponse() = default;
    static PrognosisResponse level(int v);
    static PrognosisResponse dont_know() { return PrognosisResponse(Kind::dont_know, 0); }
    static PrognosisResponse refused() { return PrognosisResponse(Kind::refused, 0); }
    /// All nine survey options, levels first.
    static std::vector<PrognosisResponse> all();

    Kind kind() const { return kind_; }
    bool answered() const { return kind_ == Kind::value; }
    /// Only valid when answered().
    int value() const;

    /// "0".."6", "dont_know" or "refused".
    std::string str() const;
    static PrognosisResponse parse(const nlohmann::json& j);

    bool operator==(const PrognosisResponse&) const = default;

private:
    PrognosisResponse(Kind k, int v) : kind_(k), value_(v) {}
    Kind kind_ = Kind::dont_know;
    int value_ = 0;
};

struct ConversationMeta {
    std::optional<double> patient_age;
    Gender patient_gender = Gender::unknown;
    std::optional<int> disease_severity;
    std::string study_site;
    std::string study_arm;
    std::optional<PrognosisResponse> physician_prognosis_response;
    std::optional<PrognosisResponse> patient_prognosis_response;

    bool operator==(const ConversationMeta&) const = default;
};

/// Number of whitespace-delimited tokens; punctuation stays attached.
std::size_t word_count(std::string_view text);

class Turn {
public:
    Turn(Role speaker, std::string text,
         std::optional<double> t_start = std::nullopt,
         std::optional<double> t_end = std::nullopt);

    Role speaker() const { return speaker_; }
    const std::string& text() const { return text_; }
    std::size_t words() const { return word_count_; }
    const std::optional<double>& t_start() const { return t_start_; }
    const std::optional<double>& t_end() const { return t_end_; }
    bool timed() const { return t_start_ && t_end_; }

    bool operator==(const Turn&) const = default;

private:
    Role speaker_;
    std::string text_;
    std::size_t word_count_;
    std::optional<double> t_start_;
    std::optional<double> t_end_;
};

struct Transcript {
    std::string id;
    std::vector<Turn> turns;
    ConversationMeta meta;

    std::size_t total_words() const;
    std::size_t role_words(Role r) const;

    bool operator==(const Transcript&) const = default;
};

/// Subsequence of turns spoken by `r`, paired with their original indices.
std::vector<std::pair<std::size_t, const Turn*>> role_turns(const Transcript& t, Role r);

/// Returns a copy with every `other` turn relabelled as patient.
Transcript other_as_patient(const Transcript& t);

Transcript parse_transcript(std::string_view document);
Transcript transcript_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Transcript& t);
nlohmann::json to_json(const ConversationMeta& m);
ConversationMeta meta_from_json(const nlohmann::json& j);
std::string serialize_transcript(const Transcript& t);

/// Loads a corpus from a directory of *.json files (sorted by file name)
/// or from a JSON-lines file. Ids must be unique.
std::vector<Transcript> load_corpus(const std::filesystem::path& path);
void write_corpus_jsonl(const std::vector<Transcript>& corpus, const std::filesystem::path& path);

} // namespace bedside
