#pragma once

#include "bedside/dialogue/engine.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bedside::dialogue {

struct ScriptLine {
    std::string text;
    std::optional<double> t_start;
    std::optional<double> t_end;
};

/// One utterance per line. Blank lines and lines starting with '#' are
/// skipped. An optional "[t0-t1]" prefix gives the turn's start and end in
/// seconds.
std::vector<ScriptLine> parse_script(std::istream& in);
std::vector<ScriptLine> load_script(const std::filesystem::path& path);

/// Plays the script against a fresh session. Stops early if the session
/// completes. Output holds the opener, each turn with its gists and replies,
/// the executed plan and, when asked, the feedback report.
nlohmann::json run_script(const DialogueEngine& engine, const std::vector<ScriptLine>& script, bool with_report,
                          SessionState* final_state = nullptr);

} // namespace bedside::dialogue
