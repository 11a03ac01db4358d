#include "bedside/transcript.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace bedside {

using nlohmann::json;

std::string_view to_string(Role r) {
    switch (r) {
    case Role::physician: return "physician";
    case Role::patient: return "patient";
    case Role::other: return "other";
    }
    return "other";
}

Role parse_role(std::string_view s) {
    if (s == "physician") return Role::physician;
    if (s == "patient") return Role::patient;
    if (s == "other") return Role::other;
    throw ValidationError("unknown speaker role '" + std::string(s) + "'");
}

std::string_view to_string(Gender g) {
    switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::other: return "other";
    case Gender::unknown: return "unknown";
    }
    return "unknown";
}

Gender parse_gender(std::string_view s) {
    if (s == "female") return Gender::female;
    if (s == "male") return Gender::male;
    if (s == "other") return Gender::other;
    if (s == "unknown") return Gender::unknown;
    throw ValidationError("unknown gender '" + std::string(s) + "'");
}

PrognosisResponse PrognosisResponse::level(int v) {
    if (v < 0 || v > 6) throw ValidationError("prognosis response out of range 0-6: " + std::to_string(v));
    return PrognosisResponse(Kind::value, v);
}

std::vector<PrognosisResponse> PrognosisResponse::all() {
    std::vector<PrognosisResponse> out;
    for (int v = 0; v <= 6; ++v) out.push_back(level(v));
    out.push_back(dont_know());
    out.push_back(refused());
    return out;
}

int PrognosisResponse::value() const {
    if (kind_ != Kind::value) throw ValidationError("prognosis response has no level");
    return value_;
}

std::string PrognosisResponse::str() const {
    switch (kind_) {
    case Kind::value: return std::to_string(value_);
    case Kind::dont_know: return "dont_know";
    case Kind::refused: return "refused";
    }
    return "refused";
}

PrognosisResponse PrognosisResponse::parse(const json& j) {
    if (j.is_number_integer()) return level(j.get<int>());
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s == "dont_know" || s == "X") return dont_know();
        if (s == "refused") return refused();
        if (s.size() == 1 && s[0] >= '0' && s[0] <= '6') return level(s[0] - '0');
    }
    throw ValidationError("invalid prognosis response " + j.dump());
}

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

Turn::Turn(Role speaker, std::string text, std::optional<double> t_start, std::optional<double> t_end)
    : speaker_(speaker), text_(std::move(text)), word_count_(word_count(text_)),
      t_start_(t_start), t_end_(t_end) {
    if (t_start_ && t_end_ && *t_end_ < *t_start_)
        throw ValidationError("turn t_end precedes t_start");
}

std::size_t Transcript::total_words() const {
    std::size_t n = 0;
    for (const auto& t : turns) n += t.words();
    return n;
}

std::size_t Transcript::role_words(Role r) const {
    std::size_t n = 0;
    for (const auto& t : turns)
        if (t.speaker() == r) n += t.words();
    return n;
}

std::vector<std::pair<std::size_t, const Turn*>> role_turns(const Transcript& t, Role r) {
    std::vector<std::pair<std::size_t, const Turn*>> out;
    for (std::size_t i = 0; i < t.turns.size(); ++i)
        if (t.turns[i].speaker() == r) out.emplace_back(i, &t.turns[i]);
    return out;
}

Transcript other_as_patient(const Transcript& t) {
    Transcript out{t.id, {}, t.meta};
    out.turns.reserve(t.turns.size());
    for (const auto& turn : t.turns) {
        Role r = turn.speaker() == Role::other ? Role::patient : turn.speaker();
        out.turns.emplace_back(r, turn.text(), turn.t_start(), turn.t_end());
    }
    return out;
}

namespace {

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw ParseError(where + "." + key + ": expected number");
    return it->get<double>();
}

std::string required_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
    if (!it->is_string()) throw ParseError(where + "." + key + ": expected string");
    return it->get<std::string>();
}

} // namespace

ConversationMeta meta_from_json(const json& j) {
    ConversationMeta m;
    if (j.is_null()) return m;
    if (!j.is_object()) throw ParseError("meta: expected object");
    m.patient_age = optional_number(j, "patient_age", "meta");
    if (auto it = j.find("patient_gender"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw ParseError("meta.patient_gender: expected string");
        m.patient_gender = parse_gender(it->get<std::string>());
    }
    if (auto it = j.find("disease_severity"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw ParseError("meta.disease_severity: expected integer");
        m.disease_severity = it->get<int>();
    }
    if (auto it = j.find("study_site"); it != j.end() && !it->is_null())
        m.study_site = required_string(j, "study_site", "meta");
    if (auto it = j.find("study_arm"); it != j.end() && !it->is_null())
        m.study_arm = required_string(j, "study_arm", "meta");
    if (auto it = j.find("physician_prognosis_response"); it != j.end() && !it->is_null())
        m.physician_prognosis_response = PrognosisResponse::parse(*it);
    if (auto it = j.find("patient_prognosis_response"); it != j.end() && !it->is_null())
        m.patient_prognosis_response = PrognosisResponse::parse(*it);
    return m;
}

json to_json(const ConversationMeta& m) {
    json j = json::object();
    if (m.patient_age) j["patient_age"] = *m.patient_age;
    if (m.patient_gender != Gender::unknown) j["patient_gender"] = std::string(to_string(m.patient_gender));
    if (m.disease_severity) j["disease_severity"] = *m.disease_severity;
    if (!m.study_site.empty()) j["study_site"] = m.study_site;
    if (!m.study_arm.empty()) j["study_arm"] = m.study_arm;
    auto response = [](const PrognosisResponse& r) -> json {
        if (r.answered()) return r.value();
        return r.str();
    };
    if (m.physician_prognosis_response) j["physician_prognosis_response"] = response(*m.physician_prognosis_response);
    if (m.patient_prognosis_response) j["patient_prognosis_response"] = response(*m.patient_prognosis_response);
    return j;
}

Transcript transcript_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("transcript: expected object");
    Transcript t;
    t.id = required_string(j, "id", "transcript");
    if (auto it = j.find("meta"); it != j.end()) t.meta = meta_from_json(*it);
    auto turns = j.find("turns");
    if (turns == j.end()) throw ParseError("transcript: missing field 'turns'");
    if (!turns->is_array()) throw ParseError("turns: expected array");
    t.turns.reserve(turns->size());
    for (std::size_t i = 0; i < turns->size(); ++i) {
        const auto& tj = (*turns)[i];
        std::string where = "turns[" + std::to_string(i) + "]";
        if (!tj.is_object()) throw ParseError(where + ": expected object");
        Role role;
        try {
            role = parse_role(required_string(tj, "speaker", where));
        } catch (const ValidationError& e) {
            throw ValidationError(where + ".speaker: " + e.what());
        }
        auto text = required_string(tj, "text", where);
        auto ts = optional_number(tj, "t_start", where);
        auto te = optional_number(tj, "t_end", where);
        if (ts && te && *te < *ts) throw ValidationError(where + ": t_end precedes t_start");
        t.turns.emplace_back(role, std::move(text), ts, te);
    }
    return t;
}

Transcript parse_transcript(std::string_view document) {
    json j;
    try {
        j = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        std::size_t line = 1 + static_cast<std::size_t>(
            std::count(document.begin(), document.begin() + std::min(e.byte, document.size()), '\n'));
        throw ParseError("line " + std::to_string(line) + ": " + e.what());
    }
    return transcript_from_json(j);
}

json to_json(const Transcript& t) {
    json turns = json::array();
    for (const auto& turn : t.turns) {
        json tj = {{"speaker", std::string(to_string(turn.speaker()))}, {"text", turn.text()}};
        if (turn.t_start()) tj["t_start"] = *turn.t_start();
        if (turn.t_end()) tj["t_end"] = *turn.t_end();
        turns.push_back(std::move(tj));
    }
    return {{"id", t.id}, {"meta", to_json(t.meta)}, {"turns", std::move(turns)}};
}

std::string serialize_transcript(const Transcript& t) { return to_json(t).dump(); }

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::vector<Transcript> load_corpus(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    std::vector<Transcript> corpus;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                corpus.push_back(parse_transcript(read_file(f)));
            } catch (const Error& e) {
                throw ParseError(f.filename().string() + ": " + e.what());
            }
        }
    } else if (fs::is_regular_file(path)) {
        std::istringstream in(read_file(path));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                corpus.push_back(parse_transcript(line));
            } catch (const Error& e) {
                throw ParseError(path.filename().string() + " line " + std::to_string(lineno) + ": " + e.what());
            }
        }
    } else {
        throw NotFoundError("corpus path does not exist: " + path.string());
    }
    std::set<std::string> ids;
    for (const auto& t : corpus)
        if (!ids.insert(t.id).second) throw ValidationError("duplicate transcript id '" + t.id + "'");
    return corpus;
}

void write_corpus_jsonl(const std::vector<Transcript>& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& t : corpus) out << serialize_transcript(t) << '\n';
}

} // namespace bedside
