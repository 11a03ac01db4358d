#include "bedside/service.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

namespace bedside::service {

using dialogue::ReplyBundle;
using nlohmann::json;

struct SessionManager::Session {
    std::mutex mutex;
    std::string id;
    std::shared_ptr<const dialogue::ContentPack> pack;
    std::unique_ptr<dialogue::DialogueEngine> engine;
    dialogue::SessionState state;
    Status status = Status::active;
    std::optional<feedback::FeedbackReport> report;
    std::filesystem::path log;

    void append(const std::vector<json>& events) const {
        // one write per call keeps a user/agent pair together on disk
        std::string buf;
        for (const auto& e : events) buf += e.dump() + "\n";
        std::ofstream out(log, std::ios::app | std::ios::binary);
        out << buf;
        out.flush();
        if (!out) throw Error("cannot append to " + log.string());
    }
};

namespace {

bool valid_name(const std::string& s) {
    return !s.empty() && s.size() <= 64 && std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    });
}

std::string random_id() {
    static std::mutex m;
    static std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(m);
    std::ostringstream s;
    s << std::hex;
    for (int i = 0; i < 2; ++i) {
        auto v = rng();
        for (int b = 0; b < 8; ++b) s << ((v >> (b * 8 + 4)) & 0xF) << ((v >> (b * 8)) & 0xF);
    }
    return s.str();
}

json user_event(const std::string& text, std::optional<double> t_start, std::optional<double> t_end) {
    json e{{"event", "user"}, {"text", text}};
    if (t_start) e["t_start"] = *t_start;
    if (t_end) e["t_end"] = *t_end;
    return e;
}

json agent_event(const ReplyBundle& b) { return {{"event", "agent"}, {"replies", b.replies}, {"done", b.done}}; }

std::optional<double> opt_number(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<double>();
}

} // namespace

SessionManager::SessionManager(ServiceConfig config) : config_(std::move(config)) {
    std::filesystem::create_directories(config_.data_dir / "sessions");
}

SessionManager::~SessionManager() = default;

std::filesystem::path SessionManager::log_path(const std::string& id) const {
    return config_.data_dir / "sessions" / (id + ".jsonl");
}

std::shared_ptr<const dialogue::ContentPack> SessionManager::pack(const std::string& pack_id) {
    // caller holds mutex_
    if (auto it = packs_.find(pack_id); it != packs_.end()) return it->second;
    if (!valid_name(pack_id) || !std::filesystem::is_directory(config_.packs_dir / pack_id))
        throw NotFoundError("unknown pack '" + pack_id + "'");
    auto p = std::make_shared<const dialogue::ContentPack>(dialogue::ContentPack::load(config_.packs_dir / pack_id));
    packs_.emplace(pack_id, p);
    return p;
}

CreatedSession SessionManager::create_session(const std::string& pack_id) {
    auto s = std::make_shared<Session>();
    {
        std::lock_guard lock(mutex_);
        s->pack = pack(pack_id);
        do {
            s->id = random_id();
        } while (sessions_.contains(s->id) || std::filesystem::exists(log_path(s->id)));
        s->log = log_path(s->id);
        s->engine = std::make_unique<dialogue::DialogueEngine>(*s->pack, config_.engine);
        s->state = s->engine->start();
        s->append({json{{"event", "created"}, {"pack", pack_id},
                        {"strip_punctuation", config_.engine.strip_punctuation}}});
        sessions_.emplace(s->id, s);
    }
    return {s->id, dialogue::DialogueEngine::opener(s->state)};
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
    std::lock_guard lock(mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
    if (!valid_name(id) || !std::filesystem::exists(log_path(id))) throw NotFoundError("unknown session '" + id + "'");
    auto s = replay(id);
    sessions_.emplace(id, s);
    return s;
}

std::shared_ptr<SessionManager::Session> SessionManager::replay(const std::string& id) {
    // caller holds mutex_
    auto s = std::make_shared<Session>();
    s->id = id;
    s->log = log_path(id);
    std::ifstream in(s->log, std::ios::binary);
    std::vector<json> events;
    std::string line;
    bool torn = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            events.push_back(json::parse(line));
        } catch (const json::parse_error&) {
            // only a torn final write is tolerated
            if (in.peek() != std::char_traits<char>::eof()) throw ParseError("corrupt event log " + s->log.string());
            torn = true;
        }
    }
    if (events.empty() || events.front().value("event", "") != "created")
        throw ParseError("event log " + s->log.string() + " does not start with a created event");

    const auto& created = events.front();
    s->pack = pack(created.at("pack").get<std::string>());
    dialogue::EngineOptions opts = config_.engine;
    opts.strip_punctuation = created.value("strip_punctuation", opts.strip_punctuation);
    s->engine = std::make_unique<dialogue::DialogueEngine>(*s->pack, opts);
    s->state = s->engine->start();

    std::optional<ReplyBundle> pending;
    for (std::size_t i = 1; i < events.size(); ++i) {
        const auto& e = events[i];
        auto kind = e.value("event", "");
        if (kind == "user") {
            pending = s->engine->step(s->state, e.at("text").get<std::string>(), opt_number(e, "t_start"),
                                      opt_number(e, "t_end"));
        } else if (kind == "agent") {
            if (!pending) throw ParseError("agent event without a user event in " + s->log.string());
            if (e.at("replies").get<std::vector<std::string>>() != pending->replies)
                throw Error("replay of " + id + " diverged from its log");
            pending.reset();
        } else if (kind == "end") {
            s->report = feedback::FeedbackReport::from_json(e.at("report"));
            s->status = Status::complete;
        } else {
            throw ParseError("unknown event '" + kind + "' in " + s->log.string());
        }
    }
    if (torn) {
        // rewrite without the partial line so later appends stay parseable
        std::ofstream out(s->log, std::ios::trunc | std::ios::binary);
        for (const auto& e : events) out << e.dump() << "\n";
    }
    if (pending) s->append({agent_event(*pending)});
    return s;
}

ReplyBundle SessionManager::post_utterance(const std::string& id, const std::string& text,
                                           std::optional<double> t_start, std::optional<double> t_end) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->status == Status::complete || s->state.complete) throw ConflictError("session complete");
    if (t_start && t_end && *t_end < *t_start) throw ValidationError("turn t_end precedes t_start");
    auto backup = s->state;
    auto bundle = s->engine->step(s->state, text, t_start, t_end);
    try {
        s->append({user_event(text, t_start, t_end), agent_event(bundle)});
    } catch (...) {
        s->state = std::move(backup);
        throw;
    }
    return bundle;
}

feedback::FeedbackReport SessionManager::end_session(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    if (s->report) return *s->report;
    auto report = feedback::build_report(s->state, config_.feedback);
    s->append({json{{"event", "end"}, {"report", report.to_json()}}});
    s->report = report;
    s->status = Status::complete;
    return report;
}

Transcript SessionManager::transcript(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return feedback::session_transcript(s->state.turn_log, id);
}

Status SessionManager::status(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return s->state.complete ? Status::complete : s->status;
}

} // namespace bedside::service
