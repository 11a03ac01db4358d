#include "bedside/dialogue/script.hpp"

#include "bedside/error.hpp"
#include "bedside/feedback.hpp"

#include <fstream>
#include <regex>

namespace bedside::dialogue {

std::vector<ScriptLine> parse_script(std::istream& in) {
    static const std::regex stamp(R"(^\[\s*([0-9]+(?:\.[0-9]*)?)\s*-\s*([0-9]+(?:\.[0-9]*)?)\s*\]\s*(.*)$)");
    std::vector<ScriptLine> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        ScriptLine s;
        std::smatch m;
        if (line[0] == '[') {
            if (!std::regex_match(line, m, stamp))
                throw ParseError("script line " + std::to_string(lineno) + ": expected [start-end] prefix");
            s.t_start = std::stod(m[1].str());
            s.t_end = std::stod(m[2].str());
            if (*s.t_end < *s.t_start)
                throw ValidationError("script line " + std::to_string(lineno) + ": end precedes start");
            s.text = m[3].str();
        } else {
            s.text = line;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ScriptLine> load_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path.string());
    return parse_script(in);
}

nlohmann::json run_script(const DialogueEngine& engine, const std::vector<ScriptLine>& script, bool with_report,
                          SessionState* final_state) {
    using nlohmann::json;
    auto state = engine.start();
    json turns = json::array();
    for (const auto& line : script) {
        if (state.complete) break;
        auto bundle = engine.step(state, line.text, line.t_start, line.t_end);
        json gists = json::array();
        for (const auto& g : state.turn_log[state.turn_log.size() - 2].gists) gists.push_back(feedback::to_json(g));
        turns.push_back({{"user", line.text}, {"gists", gists}, {"replies", bundle.replies}, {"done", bundle.done}});
    }
    json steps = json::array();
    for (const auto& h : state.history) {
        if (h.step.kind != PlanStep::Kind::say) continue;
        json s{{"step", h.step.step}, {"tag", h.step.tag}, {"skipped", h.skipped}};
        if (h.skipped) s["reason"] = h.reason;
        steps.push_back(s);
    }
    json j{{"opener", DialogueEngine::opener(state)}, {"turns", turns}, {"plan", steps}, {"complete", state.complete}};
    if (with_report) j["report"] = feedback::build_report(state).to_json();
    if (final_state) *final_state = std::move(state);
    return j;
}

} // namespace bedside::dialogue
