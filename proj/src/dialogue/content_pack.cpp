#include "bedside/dialogue/content_pack.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace bedside::dialogue {

using nlohmann::json;

std::string_view to_string(GistKind k) { return k == GistKind::question ? "question" : "statement"; }

const DialogueSchema& ContentPack::schema(const std::string& name) const {
    auto it = schemas.find(name);
    if (it == schemas.end()) throw NotFoundError("no schema named '" + name + "'");
    return it->second;
}

const TransductionTree* ContentPack::tree(const std::string& name) const {
    auto it = trees.find(name);
    return it == trees.end() ? nullptr : &it->second;
}

namespace {

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw NotFoundError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ParseError(p.filename().string() + ": " + e.what());
    }
}

std::string string_field(const json& j, const char* key, const std::string& where, bool required = true) {
    auto it = j.find(key);
    if (it == j.end()) {
        if (required) throw ParseError(where + ": missing field '" + key + "'");
        return {};
    }
    if (!it->is_string()) throw ParseError(where + "." + key + ": expected string");
    return it->get<std::string>();
}

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw ParseError(where + ": expected array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::vector<std::filesystem::path> json_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TreeNode parse_tree_node(const json& j, const std::string& default_id) {
    if (!j.is_object()) throw ParseError(default_id + ": expected node object");
    TreeNode node;
    node.id = j.contains("id") ? string_field(j, "id", default_id) : default_id;
    const std::string where = "node " + node.id;
    try {
        if (auto it = j.find("pattern"); it != j.end())
            node.patterns.push_back(Pattern::parse(string_list(*it, where + ".pattern")));
        if (auto it = j.find("patterns"); it != j.end()) {
            if (!it->is_array()) throw ParseError(where + ".patterns: expected array");
            for (const auto& p : *it) node.patterns.push_back(Pattern::parse(string_list(p, where + ".patterns")));
        }
    } catch (const ValidationError& e) {
        throw ParseError(where + ": " + e.what());
    }
    if (node.patterns.empty()) throw ParseError(where + ": needs 'pattern' or 'patterns'");

    int directives = 0;
    if (j.contains("gist")) {
        StoreGist g;
        g.text = string_field(j, "gist", where);
        auto kind = string_field(j, "kind", where, false);
        if (kind == "question") g.kind = GistKind::question;
        else if (kind.empty() || kind == "statement") g.kind = GistKind::statement;
        else throw ParseError(where + ".kind: expected statement or question");
        g.topic = string_field(j, "topic", where, false);
        node.directive = g;
        ++directives;
    }
    if (j.contains("output")) {
        node.directive = Output{string_field(j, "output", where)};
        ++directives;
    }
    if (j.contains("subschema")) {
        node.directive = InstantiateSubschema{string_field(j, "subschema", where)};
        ++directives;
    }
    if (j.contains("fallthrough")) {
        node.directive = Fallthrough{};
        ++directives;
    }
    if (auto it = j.find("segment"); it != j.end()) {
        Segment s;
        if (!it->is_array()) throw ParseError(where + ".segment: expected array of slot numbers");
        for (const auto& v : *it) {
            if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
                throw ParseError(where + ".segment: slots are positive integers");
            s.slots.push_back(v.get<std::size_t>());
        }
        node.directive = s;
        ++directives;
    }
    if (directives > 1) throw ParseError(where + ": more than one directive");
    if (auto it = j.find("children"); it != j.end()) {
        if (!it->is_array()) throw ParseError(where + ".children: expected array");
        for (std::size_t i = 0; i < it->size(); ++i)
            node.children.push_back(parse_tree_node((*it)[i], node.id + "." + std::to_string(i)));
    }
    if (directives == 1 && !node.children.empty()) throw ParseError(where + ": terminal node has children");
    if (directives == 0 && node.children.empty()) throw ParseError(where + ": node has neither children nor directive");
    return node;
}

TransductionTree parse_tree(const json& j, const std::string& name) {
    if (!j.is_object()) throw ParseError("tree " + name + ": expected object");
    TransductionTree t;
    t.name = j.contains("name") ? string_field(j, "name", "tree " + name) : name;
    if (j.contains("default")) t.default_response = string_field(j, "default", "tree " + name);
    auto nodes = j.find("nodes");
    if (nodes == j.end() || !nodes->is_array()) throw ParseError("tree " + name + ": missing 'nodes' array");
    for (std::size_t i = 0; i < nodes->size(); ++i)
        t.roots.push_back(parse_tree_node((*nodes)[i], t.name + ":" + std::to_string(i)));
    return t;
}

DialogueSchema parse_schema(const json& j, const std::string& name) {
    if (!j.is_object()) throw ParseError("schema " + name + ": expected object");
    DialogueSchema s;
    s.name = j.contains("name") ? string_field(j, "name", "schema " + name) : name;
    auto events = j.find("events");
    if (events == j.end() || !events->is_array()) throw ParseError("schema " + s.name + ": missing 'events' array");
    for (std::size_t i = 0; i < events->size(); ++i) {
        const auto& e = (*events)[i];
        std::string where = "schema " + s.name + " event " + std::to_string(i);
        if (!e.is_object()) throw ParseError(where + ": expected object");
        if (e.contains("say")) {
            AgentSay say;
            say.text = string_field(e, "say", where);
            say.tag = string_field(e, "tag", where, false);
            say.topic = string_field(e, "topic", where, false);
            say.step = string_field(e, "step", where, false);
            s.events.emplace_back(std::move(say));
        } else if (e.contains("expect")) {
            s.events.emplace_back(ExpectUser{string_field(e, "expect", where)});
        } else if (e.contains("subschema")) {
            s.events.emplace_back(AgentSubschema{string_field(e, "subschema", where)});
        } else {
            throw ParseError(where + ": expected 'say', 'expect' or 'subschema'");
        }
    }
    return s;
}

ContentPack ContentPack::load_unchecked(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw NotFoundError("content pack not found: " + dir.string());
    ContentPack pack;
    auto meta = read_json(dir / "pack.json");
    const std::string where = "pack.json";
    pack.id = string_field(meta, "id", where);
    pack.persona = string_field(meta, "persona", where, false);
    pack.main_schema = string_field(meta, "main_schema", where);
    pack.backbone_tree = string_field(meta, "backbone_tree", where);
    pack.reaction_tree = string_field(meta, "reaction_tree", where);
    pack.reply_tree = string_field(meta, "reply_tree", where);
    pack.closing = string_field(meta, "closing", where);
    pack.generic_default = string_field(meta, "generic_default", where);
    pack.unknown_question = string_field(meta, "unknown_question", where);

    if (std::filesystem::exists(dir / "features.json")) {
        auto f = read_json(dir / "features.json");
        if (!f.is_object()) throw ParseError("features.json: expected object");
        for (const auto& [name, words] : f.items()) {
            auto list = string_list(words, "features.json." + name);
            pack.features[name] = std::set<std::string>(list.begin(), list.end());
        }
    }
    for (const auto& p : json_files(dir / "schemas")) {
        auto s = parse_schema(read_json(p), p.stem().string());
        auto name = s.name;
        if (!pack.schemas.emplace(name, std::move(s)).second)
            throw ParseError("duplicate schema '" + name + "'");
    }
    for (const auto& p : json_files(dir / "trees")) {
        auto t = parse_tree(read_json(p), p.stem().string());
        auto name = t.name;
        if (!pack.trees.emplace(name, std::move(t)).second) throw ParseError("duplicate tree '" + name + "'");
    }
    return pack;
}

ContentPack ContentPack::load(const std::filesystem::path& dir) {
    auto pack = load_unchecked(dir);
    auto problems = pack.validate();
    if (!problems.empty()) {
        std::string msg = "content pack '" + pack.id + "' is invalid:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ValidationError(msg);
    }
    return pack;
}

std::vector<std::string> ContentPack::validate() const {
    std::vector<std::string> problems;
    auto need_tree = [&](const std::string& name, const std::string& where) {
        if (!trees.contains(name)) problems.push_back(where + ": no transduction tree for context tag '" + name + "'");
    };
    auto need_schema = [&](const std::string& name, const std::string& where) {
        if (!schemas.contains(name)) problems.push_back(where + ": unknown schema '" + name + "'");
    };

    need_schema(main_schema, "pack.main_schema");
    need_tree(backbone_tree, "pack.backbone_tree");
    need_tree(reaction_tree, "pack.reaction_tree");
    need_tree(reply_tree, "pack.reply_tree");

    for (const auto& [name, s] : schemas) {
        for (std::size_t i = 0; i < s.events.size(); ++i) {
            std::string where = "schema " + name + " event " + std::to_string(i);
            std::visit(
                [&](const auto& ev) {
                    using T = std::decay_t<decltype(ev)>;
                    if constexpr (std::is_same_v<T, AgentSay>) {
                        if (!ev.tag.empty()) need_tree(ev.tag, where);
                        if (max_slot(ev.text) > 0) problems.push_back(where + ": agent line has unbound slots");
                    } else if constexpr (std::is_same_v<T, ExpectUser>) {
                        need_tree(ev.tag, where);
                    } else {
                        need_schema(ev.name, where);
                    }
                },
                s.events[i]);
        }
    }

    std::function<void(const TreeNode&, const std::string&)> check_node = [&](const TreeNode& n,
                                                                             const std::string& tree) {
        std::string where = "tree " + tree + " node " + n.id;
        std::size_t slots = static_cast<std::size_t>(-1);
        for (const auto& p : n.patterns) {
            slots = std::min(slots, p.wildcard_count());
            for (const auto& e : p.elements())
                if (e.kind == PatternElement::Kind::feature && !features.contains(e.text))
                    problems.push_back(where + ": undeclared feature class '@" + e.text + "'");
        }
        if (n.directive) {
            std::visit(
                [&](const auto& d) {
                    using T = std::decay_t<decltype(d)>;
                    if constexpr (std::is_same_v<T, StoreGist> || std::is_same_v<T, Output>) {
                        if (max_slot(d.text) > slots)
                            problems.push_back(where + ": template references slot {" +
                                               std::to_string(max_slot(d.text)) + "} but the pattern binds " +
                                               std::to_string(slots));
                    } else if constexpr (std::is_same_v<T, InstantiateSubschema>) {
                        need_schema(d.name, where);
                    } else if constexpr (std::is_same_v<T, Segment>) {
                        for (auto s : d.slots)
                            if (s > slots) problems.push_back(where + ": segment slot " + std::to_string(s) + " is not bound");
                    }
                },
                *n.directive);
        }
        for (const auto& c : n.children) check_node(c, tree);
    };
    for (const auto& [name, t] : trees)
        for (const auto& r : t.roots) check_node(r, name);

    // instantiation cycles over the schema graph
    std::map<std::string, int> color; // 0 white, 1 grey, 2 black
    std::function<void(const std::string&, std::vector<std::string>&)> dfs = [&](const std::string& name,
                                                                                 std::vector<std::string>& path) {
        auto it = schemas.find(name);
        if (it == schemas.end()) return;
        color[name] = 1;
        path.push_back(name);
        for (const auto& ev : it->second.events) {
            const auto* sub = std::get_if<AgentSubschema>(&ev);
            if (!sub) continue;
            if (color[sub->name] == 1) {
                std::string cycle;
                auto start = std::find(path.begin(), path.end(), sub->name);
                for (auto p = start; p != path.end(); ++p) cycle += *p + " -> ";
                problems.push_back("schema instantiation cycle: " + cycle + sub->name);
            } else if (color[sub->name] == 0) {
                dfs(sub->name, path);
            }
        }
        path.pop_back();
        color[name] = 2;
    };
    for (const auto& [name, s] : schemas) {
        std::vector<std::string> path;
        if (color[name] == 0) dfs(name, path);
    }
    return problems;
}

std::filesystem::path default_pack_dir() { return std::filesystem::path(BEDSIDE_DATA_DIR) / "packs" / "sophie"; }

} // namespace bedside::dialogue
