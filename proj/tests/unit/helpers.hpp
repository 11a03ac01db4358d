#pragma once

#include "bedside/transcript.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace testutil {

inline std::string words(std::size_t n, const std::string& w = "word") {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + w;
    return s;
}

/// Transcript from (role, word count) pairs.
inline bedside::Transcript make_transcript(const std::vector<std::pair<bedside::Role, std::size_t>>& spec,
                                           const std::string& id = "t") {
    bedside::Transcript t;
    t.id = id;
    for (auto [r, n] : spec) t.turns.emplace_back(r, words(n));
    return t;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("bedside-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testutil
