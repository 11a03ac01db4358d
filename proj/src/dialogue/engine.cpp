#include "bedside/dialogue/engine.hpp"

#include "bedside/error.hpp"

#include <algorithm>

namespace bedside::dialogue {

const std::string& SessionState::context() const {
    static const std::string none;
    return expecting ? expecting->tag : none;
}

std::string ReplyBundle::text() const {
    std::string s;
    for (const auto& r : replies) {
        if (!s.empty()) s.push_back(' ');
        s += r;
    }
    return s;
}

nlohmann::json ReplyBundle::to_json() const { return {{"replies", replies}, {"done", done}}; }

DialogueEngine::DialogueEngine(const ContentPack& pack, EngineOptions opts) : pack_(pack), opts_(opts) {}

void DialogueEngine::instantiate(SessionState& s, const std::string& name) const {
    const auto& schema = pack_.schema(name);
    std::vector<PlanStep> steps;
    for (const auto& ev : schema.events) {
        PlanStep p;
        p.schema = name;
        if (const auto* say = std::get_if<AgentSay>(&ev)) {
            p.kind = PlanStep::Kind::say;
            p.text = say->text;
            p.tag = say->tag;
            p.topic = say->topic;
            p.step = say->step;
        } else if (const auto* ex = std::get_if<ExpectUser>(&ev)) {
            p.kind = PlanStep::Kind::expect;
            p.tag = ex->tag;
        } else {
            p.kind = PlanStep::Kind::subschema;
            p.text = std::get<AgentSubschema>(ev).name;
        }
        steps.push_back(std::move(p));
    }
    s.plan.insert(s.plan.begin(), steps.begin(), steps.end());
}

bool DialogueEngine::answered(const SessionState& s, const std::string& topic) const {
    if (topic.empty()) return false;
    return std::any_of(s.gist_store.begin(), s.gist_store.end(),
                       [&](const GistClause& g) { return g.kind == GistKind::statement && g.topic == topic; });
}

void DialogueEngine::mark_answered(SessionState& s, std::vector<std::string>* skipped) const {
    bool next_expect = false;
    for (auto& p : s.plan) {
        if (p.kind == PlanStep::Kind::say) {
            next_expect = false;
            if (p.skip_reason.empty() && answered(s, p.topic)) {
                p.skip_reason = "answered";
                next_expect = true;
                if (skipped) skipped->push_back(p.text);
            }
        } else if (p.kind == PlanStep::Kind::expect && next_expect) {
            p.skip_reason = "answered";
            next_expect = false;
        }
    }
}

void DialogueEngine::advance(SessionState& s, std::vector<std::string>& out) const {
    s.expecting.reset();
    s.reprompted = false;
    bool skip_expect = false;
    while (!s.plan.empty()) {
        PlanStep p = std::move(s.plan.front());
        s.plan.pop_front();
        switch (p.kind) {
        case PlanStep::Kind::say:
            if (!p.skip_reason.empty() || answered(s, p.topic)) {
                std::string reason = p.skip_reason.empty() ? "answered" : p.skip_reason;
                s.history.push_back({std::move(p), true, reason});
                skip_expect = true;
                continue;
            }
            skip_expect = false;
            out.push_back(p.text);
            s.history.push_back({std::move(p), false, {}});
            continue;
        case PlanStep::Kind::subschema: {
            auto name = p.text;
            s.history.push_back({std::move(p), false, {}});
            instantiate(s, name);
            continue;
        }
        case PlanStep::Kind::expect:
            if (skip_expect || !p.skip_reason.empty()) {
                s.history.push_back({std::move(p), true, "answered"});
                skip_expect = false;
                continue;
            }
            s.expecting = std::move(p);
            return;
        }
    }
    out.push_back(pack_.closing);
    s.complete = true;
}

SessionState DialogueEngine::start() const {
    SessionState s;
    instantiate(s, pack_.main_schema);
    std::vector<std::string> out;
    advance(s, out);
    s.opening = out;
    LoggedTurn t;
    t.speaker = Speaker::agent;
    t.text = ReplyBundle{out, s.complete}.text();
    s.turn_log.push_back(std::move(t));
    return s;
}

std::vector<std::string> DialogueEngine::opener(const SessionState& s) { return s.opening; }

InterpretResult DialogueEngine::interpret(SessionState& s, const std::string& text) const {
    InterpretResult r;
    const TransductionTree* topic = pack_.tree(s.context());
    const TransductionTree* backbone = pack_.tree(pack_.backbone_tree);
    for (const auto& sentence : split_sentences(tokenize(text, opts_.strip_punctuation))) {
        std::vector<GistClause> gists;
        if (topic) gists = transduce_tokens(*topic, sentence, pack_.features);
        if (gists.empty() && backbone) gists = transduce_tokens(*backbone, sentence, pack_.features);
        r.gists.insert(r.gists.end(), gists.begin(), gists.end());
    }
    s.gist_store.insert(s.gist_store.end(), r.gists.begin(), r.gists.end());
    r.fallback = r.gists.empty();
    s.last_fallback = r.fallback;
    mark_answered(s, &r.skipped);
    return r;
}

std::optional<TreeHit> DialogueEngine::react(const std::string& tree, const GistClause& gist) const {
    const auto* t = pack_.tree(tree);
    if (!t) return std::nullopt;
    return find_terminal(*t, tokenize(gist.text), pack_.features);
}

ReplyBundle DialogueEngine::respond(SessionState& s, const InterpretResult& r) const {
    if (s.complete) throw ConflictError("session complete");
    std::vector<std::string> out;
    std::vector<const GistClause*> statements, questions;
    for (const auto& g : r.gists) (g.kind == GistKind::question ? questions : statements).push_back(&g);

    auto consume_and_advance = [&] {
        if (s.expecting) s.history.push_back({std::move(*s.expecting), false, {}});
        s.expecting.reset();
        advance(s, out);
    };

    if (!questions.empty()) {
        if (!statements.empty()) {
            if (auto hit = react(pack_.reaction_tree, *statements.back())) {
                if (const auto* o = std::get_if<Output>(&*hit->node->directive))
                    out.push_back(fill_template(o->text, hit->bindings));
            }
        }
        auto hit = react(pack_.reply_tree, *questions.back());
        if (hit && std::holds_alternative<InstantiateSubschema>(*hit->node->directive)) {
            instantiate(s, std::get<InstantiateSubschema>(*hit->node->directive).name);
            consume_and_advance();
        } else if (hit && std::holds_alternative<Output>(*hit->node->directive)) {
            out.push_back(fill_template(std::get<Output>(*hit->node->directive).text, hit->bindings));
        } else {
            out.push_back(pack_.unknown_question);
        }
    } else if (!statements.empty()) {
        auto hit = react(pack_.reaction_tree, *statements.back());
        if (hit) {
            if (const auto* o = std::get_if<Output>(&*hit->node->directive))
                out.push_back(fill_template(o->text, hit->bindings));
            else if (const auto* sub = std::get_if<InstantiateSubschema>(&*hit->node->directive))
                instantiate(s, sub->name);
        }
        consume_and_advance();
    } else if (!s.reprompted) {
        // stay on the current topic once before moving on
        const auto* topic = pack_.tree(s.context());
        out.push_back(topic && topic->default_response ? *topic->default_response : pack_.generic_default);
        s.reprompted = true;
    } else {
        consume_and_advance();
    }
    return {out, s.complete};
}

ReplyBundle DialogueEngine::step(SessionState& s, const std::string& text, std::optional<double> t_start,
                                 std::optional<double> t_end) const {
    if (s.complete) throw ConflictError("session complete");
    if (t_start && t_end && *t_end < *t_start) throw ValidationError("turn t_end precedes t_start");
    auto interpretation = interpret(s, text);
    LoggedTurn user;
    user.speaker = Speaker::user;
    user.text = text;
    user.t_start = t_start;
    user.t_end = t_end;
    user.gists = interpretation.gists;
    s.turn_log.push_back(std::move(user));
    auto bundle = respond(s, interpretation);
    LoggedTurn agent;
    agent.speaker = Speaker::agent;
    agent.text = bundle.text();
    s.turn_log.push_back(std::move(agent));
    return bundle;
}

} // namespace bedside::dialogue
