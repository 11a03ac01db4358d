#include "bedside/feedback.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bedside::feedback {

using dialogue::GistClause;
using dialogue::GistKind;
using dialogue::LoggedTurn;
using dialogue::Speaker;

namespace {

constexpr double kBase = 0.08;
constexpr double kPeak = 0.15;
const std::vector<double> kReferenceShape{kBase, kPeak, 0.09, kBase, kBase, 0.09, kPeak, 0.11};

bool ends_with_question(const std::string& text) {
    auto end = text.find_last_not_of(" \t\r\n");
    return end != std::string::npos && text[end] == '?';
}

template <class T>
std::optional<T> opt_field(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

} // namespace

std::vector<double> default_suggested_trajectory(std::size_t segments) {
    if (segments == 0) throw ValidationError("segments must be positive");
    if (segments == kReferenceShape.size()) return kReferenceShape;
    std::vector<double> out(segments);
    const double last = static_cast<double>(kReferenceShape.size() - 1);
    for (std::size_t i = 0; i < segments; ++i) {
        double x = segments == 1 ? 0.5 * last : last * static_cast<double>(i) / static_cast<double>(segments - 1);
        auto lo = static_cast<std::size_t>(std::floor(x));
        auto hi = std::min(lo + 1, kReferenceShape.size() - 1);
        double f = x - static_cast<double>(lo);
        out[i] = (1.0 - f) * kReferenceShape[lo] + f * kReferenceShape[hi];
    }
    return out;
}

Transcript session_transcript(const std::vector<LoggedTurn>& log, const std::string& id) {
    Transcript t;
    t.id = id;
    for (const auto& turn : log)
        t.turns.emplace_back(turn.speaker == Speaker::user ? Role::physician : Role::patient, turn.text, turn.t_start,
                             turn.t_end);
    return t;
}

std::optional<double> speech_rate(const std::vector<LoggedTurn>& log) {
    double words = 0.0;
    double seconds = 0.0;
    bool any = false;
    for (const auto& turn : log) {
        if (turn.speaker != Speaker::user || !turn.t_start || !turn.t_end) continue;
        if (*turn.t_end < *turn.t_start) throw ValidationError("turn t_end precedes t_start");
        words += static_cast<double>(word_count(turn.text));
        seconds += *turn.t_end - *turn.t_start;
        any = true;
    }
    // zero total duration carries no rate information
    if (!any || !(seconds > 0.0)) return std::nullopt;
    return words / (seconds / 60.0);
}

std::size_t count_questions(const std::vector<LoggedTurn>& log) {
    std::size_t n = 0;
    for (const auto& turn : log) {
        if (turn.speaker != Speaker::user) continue;
        if (turn.gists.empty()) {
            n += ends_with_question(turn.text) ? 1 : 0;
            continue;
        }
        n += static_cast<std::size_t>(std::count_if(turn.gists.begin(), turn.gists.end(),
                                                    [](const GistClause& g) { return g.kind == GistKind::question; }));
    }
    return n;
}

std::vector<std::size_t> lecturing_highlights(const std::vector<LoggedTurn>& log, const lectur::LectUrParams& p) {
    p.validate();
    auto result = lectur::lecturing_windows(session_transcript(log), p);
    std::set<std::size_t> ids;
    const auto w = static_cast<std::size_t>(p.window);
    for (auto start : result.windows)
        for (std::size_t i = start; i < start + w && i < log.size(); ++i)
            if (log[i].speaker == Speaker::user) ids.insert(i);
    return {ids.begin(), ids.end()};
}

FeedbackReport build_report(const dialogue::SessionState& session, const FeedbackConfig& config) {
    return build_report(session.turn_log, config);
}

FeedbackReport build_report(const std::vector<LoggedTurn>& log, const FeedbackConfig& config) {
    if (std::none_of(log.begin(), log.end(), [](const LoggedTurn& t) { return t.speaker == Speaker::user; }))
        throw ValidationError("nothing to report");
    if (config.segments == 0) throw ValidationError("segments must be positive");

    FeedbackReport r;
    r.lectur = config.lectur;
    r.segments = config.segments;
    r.suggested_trajectory = config.suggested.empty() ? default_suggested_trajectory(config.segments) : config.suggested;
    if (r.suggested_trajectory.size() != config.segments)
        throw ValidationError("suggested trajectory has " + std::to_string(r.suggested_trajectory.size()) +
                              " points but segments = " + std::to_string(config.segments));

    r.speech_rate_wpm = speech_rate(log);
    r.question_count = count_questions(log);
    r.lecturing_turn_ids = lecturing_highlights(log, config.lectur);

    const auto& lex = config.lexicon ? *config.lexicon : sentiment::SentimentLexicon::demo();
    auto transcript = session_transcript(log);
    if (log.size() < config.segments) {
        r.trajectories_omitted = "session has " + std::to_string(log.size()) + " turns; at least " +
                                 std::to_string(config.segments) + " are needed to segment it";
    } else {
        r.user_trajectory = sentiment::trajectory(transcript, Role::physician, config.segments, lex).segments;
        r.agent_trajectory = sentiment::trajectory(transcript, Role::patient, config.segments, lex).segments;
    }

    std::set<std::size_t> flagged(r.lecturing_turn_ids.begin(), r.lecturing_turn_ids.end());
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& turn = log[i];
        AnnotatedTurn a;
        a.id = i;
        a.speaker = turn.speaker == Speaker::user ? "user" : "agent";
        a.text = turn.text;
        a.words = word_count(turn.text);
        a.t_start = turn.t_start;
        a.t_end = turn.t_end;
        a.gists = turn.gists;
        a.lecturing = flagged.contains(i);
        r.turn_taking.push_back({a.speaker, a.words});
        r.transcript.push_back(std::move(a));
    }
    return r;
}

nlohmann::json to_json(const GistClause& g) {
    return {{"text", g.text}, {"kind", std::string(dialogue::to_string(g.kind))}, {"topic", g.topic}};
}

GistClause gist_from_json(const nlohmann::json& j) {
    GistClause g;
    g.text = j.at("text").get<std::string>();
    auto kind = j.at("kind").get<std::string>();
    if (kind != "statement" && kind != "question") throw ParseError("gist kind must be statement or question");
    g.kind = kind == "question" ? GistKind::question : GistKind::statement;
    g.topic = j.value("topic", "");
    return g;
}

nlohmann::json FeedbackReport::to_json() const {
    nlohmann::json j;
    if (speech_rate_wpm) j["speech_rate_wpm"] = *speech_rate_wpm;
    j["question_count"] = question_count;
    j["turn_taking"] = nlohmann::json::array();
    for (const auto& t : turn_taking) j["turn_taking"].push_back({{"speaker", t.speaker}, {"words", t.words}});
    j["lecturing_turn_ids"] = lecturing_turn_ids;
    j["lectur"] = {{"window", lectur.window}, {"tau", lectur.tau}, {"step", lectur.step}};
    j["segments"] = segments;
    if (user_trajectory) j["user_trajectory"] = *user_trajectory;
    if (agent_trajectory) j["agent_trajectory"] = *agent_trajectory;
    if (!trajectories_omitted.empty()) j["trajectories_omitted"] = trajectories_omitted;
    j["suggested_trajectory"] = suggested_trajectory;
    auto& turns = j["transcript"] = nlohmann::json::array();
    for (const auto& t : transcript) {
        nlohmann::json jt{{"id", t.id}, {"speaker", t.speaker}, {"text", t.text}, {"words", t.words}};
        if (t.t_start) jt["t_start"] = *t.t_start;
        if (t.t_end) jt["t_end"] = *t.t_end;
        jt["gists"] = nlohmann::json::array();
        for (const auto& g : t.gists) jt["gists"].push_back(feedback::to_json(g));
        jt["lecturing"] = t.lecturing;
        turns.push_back(std::move(jt));
    }
    return j;
}

FeedbackReport FeedbackReport::from_json(const nlohmann::json& j) {
    try {
        FeedbackReport r;
        r.speech_rate_wpm = opt_field<double>(j, "speech_rate_wpm");
        r.question_count = j.at("question_count").get<std::size_t>();
        for (const auto& t : j.at("turn_taking"))
            r.turn_taking.push_back({t.at("speaker").get<std::string>(), t.at("words").get<std::size_t>()});
        r.lecturing_turn_ids = j.at("lecturing_turn_ids").get<std::vector<std::size_t>>();
        const auto& l = j.at("lectur");
        r.lectur.window = l.at("window").get<int>();
        r.lectur.tau = l.at("tau").get<double>();
        r.lectur.step = l.at("step").get<int>();
        r.segments = j.at("segments").get<std::size_t>();
        r.user_trajectory = opt_field<std::vector<double>>(j, "user_trajectory");
        r.agent_trajectory = opt_field<std::vector<double>>(j, "agent_trajectory");
        r.trajectories_omitted = j.value("trajectories_omitted", "");
        r.suggested_trajectory = j.at("suggested_trajectory").get<std::vector<double>>();
        for (const auto& jt : j.at("transcript")) {
            AnnotatedTurn t;
            t.id = jt.at("id").get<std::size_t>();
            t.speaker = jt.at("speaker").get<std::string>();
            t.text = jt.at("text").get<std::string>();
            t.words = jt.at("words").get<std::size_t>();
            t.t_start = opt_field<double>(jt, "t_start");
            t.t_end = opt_field<double>(jt, "t_end");
            for (const auto& g : jt.at("gists")) t.gists.push_back(gist_from_json(g));
            t.lecturing = jt.at("lecturing").get<bool>();
            r.transcript.push_back(std::move(t));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("feedback report: ") + e.what());
    }
}

bool FeedbackReport::operator==(const FeedbackReport& o) const {
    return speech_rate_wpm == o.speech_rate_wpm && question_count == o.question_count &&
           turn_taking == o.turn_taking && lecturing_turn_ids == o.lecturing_turn_ids &&
           lectur.window == o.lectur.window && lectur.tau == o.lectur.tau && lectur.step == o.lectur.step &&
           segments == o.segments && user_trajectory == o.user_trajectory && agent_trajectory == o.agent_trajectory &&
           trajectories_omitted == o.trajectories_omitted && suggested_trajectory == o.suggested_trajectory &&
           transcript == o.transcript;
}

const nlohmann::json& report_schema() {
    static const nlohmann::json schema = nlohmann::json::parse(R"JSON({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "FeedbackReport",
  "type": "object",
  "required": ["question_count", "turn_taking", "lecturing_turn_ids", "lectur", "segments",
               "suggested_trajectory", "transcript"],
  "properties": {
    "speech_rate_wpm": {
      "type": "number", "minimum": 0,
      "description": "User words per minute, pooled over timed turns. Absent without timing data."
    },
    "question_count": {"type": "integer", "minimum": 0},
    "turn_taking": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["speaker", "words"],
        "properties": {
          "speaker": {"enum": ["user", "agent"]},
          "words": {"type": "integer", "minimum": 0}
        }
      }
    },
    "lecturing_turn_ids": {
      "type": "array", "uniqueItems": true,
      "items": {"type": "integer", "minimum": 0},
      "description": "Transcript ids of user turns inside at least one lecturing window."
    },
    "lectur": {
      "type": "object",
      "required": ["window", "tau", "step"],
      "properties": {
        "window": {"type": "integer", "minimum": 2},
        "tau": {"type": "number", "exclusiveMinimum": 0},
        "step": {"type": "integer", "minimum": 1}
      }
    },
    "segments": {"type": "integer", "minimum": 1},
    "user_trajectory": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
    "agent_trajectory": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
    "trajectories_omitted": {"type": "string", "description": "Present only when both trajectories are absent."},
    "suggested_trajectory": {"type": "array", "items": {"type": "number"}},
    "transcript": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["id", "speaker", "text", "words", "gists", "lecturing"],
        "properties": {
          "id": {"type": "integer", "minimum": 0},
          "speaker": {"enum": ["user", "agent"]},
          "text": {"type": "string"},
          "words": {"type": "integer", "minimum": 0},
          "t_start": {"type": "number"},
          "t_end": {"type": "number"},
          "gists": {
            "type": "array",
            "items": {
              "type": "object",
              "required": ["text", "kind", "topic"],
              "properties": {
                "text": {"type": "string"},
                "kind": {"enum": ["statement", "question"]},
                "topic": {"type": "string"}
              }
            }
          },
          "lecturing": {"type": "boolean"}
        }
      }
    }
  }
})JSON");
    return schema;
}

} // namespace bedside::feedback
