#include "bedside/dialogue/pattern.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <cctype>

namespace bedside::dialogue {

namespace {

bool is_sentence_punct(char c) { return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':'; }
bool is_dropped(char c) { return c == '"' || c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}'; }

} // namespace

Tokens tokenize(std::string_view text, bool strip_punctuation) {
    Tokens out;
    std::string cur;
    auto flush = [&] {
        // trim stray apostrophes/dashes hugging the word
        while (!cur.empty() && (cur.back() == '\'' || cur.back() == '-')) cur.pop_back();
        std::size_t lead = 0;
        while (lead < cur.size() && (cur[lead] == '\'' || cur[lead] == '-')) ++lead;
        if (lead < cur.size()) out.push_back(cur.substr(lead));
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        // U+2019 right single quotation mark -> '
        if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < text.size() &&
            static_cast<unsigned char>(text[i + 1]) == 0x80 && static_cast<unsigned char>(text[i + 2]) == 0x99) {
            cur.push_back('\'');
            i += 2;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else if (is_sentence_punct(c)) {
            flush();
            if (!strip_punctuation) out.emplace_back(1, c);
        } else if (is_dropped(c)) {
            flush();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    flush();
    return out;
}

std::vector<Tokens> split_sentences(const Tokens& tokens) {
    std::vector<Tokens> out;
    Tokens cur;
    for (const auto& t : tokens) {
        cur.push_back(t);
        if (t == "." || t == "?" || t == "!") {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string join(std::span<const std::string> tokens) {
    std::string s;
    for (const auto& t : tokens) {
        if (!s.empty()) s.push_back(' ');
        s += t;
    }
    return s;
}

Pattern Pattern::parse(const std::vector<std::string>& items) {
    std::vector<PatternElement> els;
    for (const auto& item : items) {
        if (item.empty()) throw ValidationError("empty pattern element");
        PatternElement e;
        if (item[0] == '*') {
            e.kind = PatternElement::Kind::wildcard;
            if (item.size() == 1) {
                e.max_span = PatternElement::unbounded;
            } else {
                try {
                    std::size_t used = 0;
                    e.max_span = std::stoul(item.substr(1), &used);
                    if (used != item.size() - 1) throw std::invalid_argument(item);
                } catch (const std::logic_error&) {
                    throw ValidationError("bad wildcard '" + item + "'");
                }
            }
        } else if (item[0] == '@') {
            if (item.size() == 1) throw ValidationError("feature element '@' needs a class name");
            e.kind = PatternElement::Kind::feature;
            e.text = item.substr(1);
        } else {
            e.kind = PatternElement::Kind::literal;
            e.text = item;
        }
        els.push_back(std::move(e));
    }
    return Pattern(std::move(els));
}

std::size_t Pattern::wildcard_count() const {
    std::size_t n = 0;
    for (const auto& e : elements_) n += e.kind == PatternElement::Kind::wildcard ? 1 : 0;
    return n;
}

std::string Pattern::str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const auto& e = elements_[i];
        if (i) s += ", ";
        switch (e.kind) {
        case PatternElement::Kind::literal: s += e.text; break;
        case PatternElement::Kind::feature: s += "@" + e.text; break;
        case PatternElement::Kind::wildcard:
            s += e.max_span == PatternElement::unbounded ? "*" : "*" + std::to_string(e.max_span);
            break;
        }
    }
    return s + "]";
}

namespace {

struct Matcher {
    const std::vector<PatternElement>& els;
    std::span<const std::string> tokens;
    const FeatureClasses& features;
    std::vector<std::pair<std::size_t, std::size_t>> spans;

    bool element_matches(const PatternElement& e, const std::string& tok) const {
        if (e.kind == PatternElement::Kind::literal) return e.text == tok;
        auto it = features.find(e.text);
        return it != features.end() && it->second.contains(tok);
    }

    bool run(std::size_t pi, std::size_t ti) {
        if (pi == els.size()) return ti == tokens.size();
        const auto& e = els[pi];
        if (e.kind != PatternElement::Kind::wildcard) {
            if (ti >= tokens.size() || !element_matches(e, tokens[ti])) return false;
            return run(pi + 1, ti + 1);
        }
        const std::size_t remaining = tokens.size() - ti;
        const std::size_t limit = std::min(e.max_span, remaining);
        for (std::size_t len = 0; len <= limit; ++len) {
            spans.emplace_back(ti, ti + len);
            if (run(pi + 1, ti + len)) return true;
            spans.pop_back();
        }
        return false;
    }
};

} // namespace

std::optional<std::vector<Tokens>> match_spans(const Pattern& pattern, std::span<const std::string> tokens,
                                               const FeatureClasses& features) {
    Matcher m{pattern.elements(), tokens, features, {}};
    if (!m.run(0, 0)) return std::nullopt;
    std::vector<Tokens> out;
    for (auto [b, e] : m.spans) out.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(b),
                                                 tokens.begin() + static_cast<std::ptrdiff_t>(e));
    return out;
}

std::optional<Bindings> match_pattern(const Pattern& pattern, std::span<const std::string> tokens,
                                      const FeatureClasses& features) {
    auto spans = match_spans(pattern, tokens, features);
    if (!spans) return std::nullopt;
    Bindings b;
    for (const auto& s : *spans) b.push_back(join(s));
    return b;
}

std::string fill_template(std::string_view tmpl, const Bindings& bindings) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i);
            if (close != std::string_view::npos && close > i + 1) {
                auto inner = tmpl.substr(i + 1, close - i - 1);
                bool digits = std::all_of(inner.begin(), inner.end(), [](char c) { return c >= '0' && c <= '9'; });
                if (digits) {
                    auto slot = std::stoul(std::string(inner));
                    if (slot == 0 || slot > bindings.size())
                        throw ValidationError("template slot {" + std::string(inner) + "} is not bound");
                    out += bindings[slot - 1];
                    i = close;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i]);
    }
    return out;
}

std::size_t max_slot(std::string_view tmpl) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') continue;
        auto close = tmpl.find('}', i);
        if (close == std::string_view::npos || close == i + 1) continue;
        auto inner = tmpl.substr(i + 1, close - i - 1);
        if (!std::all_of(inner.begin(), inner.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
        best = std::max<std::size_t>(best, std::stoul(std::string(inner)));
    }
    return best;
}

} // namespace bedside::dialogue
