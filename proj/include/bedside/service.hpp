#pragma once

#include "bedside/dialogue/engine.hpp"
#include "bedside/feedback.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bedside::service {

enum class Status { active, complete };

struct ServiceConfig {
    /// Session logs live under <data_dir>/sessions/<id>.jsonl.
    std::filesystem::path data_dir;
    /// Each subdirectory is a content pack named by its directory.
    std::filesystem::path packs_dir;
    dialogue::EngineOptions engine;
    feedback::FeedbackConfig feedback;
};

struct CreatedSession {
    std::string id;
    std::vector<std::string> opener;
};

/// Owns live sessions. Every state change is appended to the session's event
/// log before the caller sees a result, so a restarted manager can rebuild
/// any session by replaying its log through the deterministic engine.
class SessionManager {
public:
    explicit SessionManager(ServiceConfig config);
    ~SessionManager();

    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    CreatedSession create_session(const std::string& pack_id);
    dialogue::ReplyBundle post_utterance(const std::string& id, const std::string& text,
                                         std::optional<double> t_start = std::nullopt,
                                         std::optional<double> t_end = std::nullopt);
    /// Idempotent: a repeat call returns the stored report.
    feedback::FeedbackReport end_session(const std::string& id);
    Transcript transcript(const std::string& id);
    Status status(const std::string& id);

    std::filesystem::path log_path(const std::string& id) const;
    const ServiceConfig& config() const { return config_; }

private:
    struct Session;

    std::shared_ptr<Session> find(const std::string& id);
    std::shared_ptr<Session> replay(const std::string& id);
    std::shared_ptr<const dialogue::ContentPack> pack(const std::string& pack_id);

    ServiceConfig config_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::map<std::string, std::shared_ptr<const dialogue::ContentPack>> packs_;
};

} // namespace bedside::service
