#include "bedside/sentiment.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bedside::sentiment {

extern const char* const kDemoLexiconText; // generated from data/lexicon/demo.tsv

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        cols.push_back(trim(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start)));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    return cols;
}

double parse_number(std::string_view s, std::size_t lineno) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("lexicon line " + std::to_string(lineno) + ": bad number '" + std::string(s) + "'");
    return v;
}

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

} // namespace

void SentimentLexicon::add_word(std::string_view word, double valence) {
    if (!words_.emplace(lower(word), valence).second)
        throw ValidationError("duplicate lexicon entry '" + std::string(word) + "'");
}

void SentimentLexicon::add_booster(std::string_view word, double increment) {
    if (!boosters_.emplace(lower(word), increment).second)
        throw ValidationError("duplicate booster entry '" + std::string(word) + "'");
}

void SentimentLexicon::add_negation(std::string_view word) { negations_.insert(lower(word)); }

const double* SentimentLexicon::valence(std::string_view w) const {
    auto it = words_.find(std::string(w));
    return it == words_.end() ? nullptr : &it->second;
}

const double* SentimentLexicon::booster(std::string_view w) const {
    auto it = boosters_.find(std::string(w));
    return it == boosters_.end() ? nullptr : &it->second;
}

bool SentimentLexicon::is_negation(std::string_view w) const {
    if (negations_.contains(std::string(w))) return true;
    return w.size() > 3 && w.ends_with("n't");
}

const std::vector<std::string>& SentimentLexicon::default_negations() {
    static const std::vector<std::string> words = {
        "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "dont", "hadnt",
        "hasnt", "havent", "isnt", "mightnt", "mustnt", "neither", "neednt", "never", "none", "nope",
        "nor", "not", "nothing", "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent",
        "without", "wont", "wouldnt", "rarely", "seldom", "despite"};
    return words;
}

const std::vector<std::pair<std::string, double>>& SentimentLexicon::default_boosters() {
    static const std::vector<std::pair<std::string, double>> words = [] {
        std::vector<std::pair<std::string, double>> v;
        for (const char* w : {"absolutely", "amazingly", "awfully", "completely", "considerably", "decidedly",
                              "deeply", "enormously", "entirely", "especially", "exceptionally", "extremely",
                              "fully", "greatly", "highly", "hugely", "incredibly", "intensely", "particularly",
                              "purely", "quite", "really", "remarkably", "so", "substantially", "thoroughly",
                              "totally", "tremendously", "unbelievably", "unusually", "utterly", "very", "more",
                              "most"})
            v.emplace_back(w, kBoosterIncrement);
        for (const char* w : {"almost", "barely", "hardly", "kinda", "less", "little", "marginally",
                              "occasionally", "partly", "scarcely", "slightly", "somewhat", "sorta"})
            v.emplace_back(w, -kBoosterIncrement);
        return v;
    }();
    return words;
}

SentimentLexicon SentimentLexicon::parse(std::string_view text) {
    enum class Section { lexicon, booster, negate };
    SentimentLexicon lex;
    Section section = Section::lexicon;
    bool saw_booster = false, saw_negate = false;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '@') {
            if (line == "@booster") {
                section = Section::booster;
                saw_booster = true;
            } else if (line == "@negate") {
                section = Section::negate;
                saw_negate = true;
            } else if (line == "@lexicon") {
                section = Section::lexicon;
            } else {
                throw ParseError("lexicon line " + std::to_string(lineno) + ": unknown section " + std::string(line));
            }
            continue;
        }
        auto cols = split_tabs(line);
        try {
            switch (section) {
            case Section::lexicon:
                if (cols.size() < 2)
                    throw ParseError("lexicon line " + std::to_string(lineno) + ": expected word<TAB>valence");
                lex.add_word(cols[0], parse_number(cols[1], lineno));
                break;
            case Section::booster:
                if (cols.size() < 2)
                    throw ParseError("lexicon line " + std::to_string(lineno) + ": expected word<TAB>increment");
                lex.add_booster(cols[0], parse_number(cols[1], lineno));
                break;
            case Section::negate:
                lex.add_negation(cols[0]);
                break;
            }
        } catch (const ValidationError& e) {
            throw ParseError("lexicon line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!saw_negate)
        for (const auto& w : default_negations()) lex.add_negation(w);
    if (!saw_booster)
        for (const auto& [w, b] : default_boosters()) lex.add_booster(w, b);
    return lex;
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open lexicon " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const SentimentLexicon& SentimentLexicon::demo() {
    static const SentimentLexicon lex = parse(kDemoLexiconText);
    return lex;
}

std::vector<std::string> sentiment_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::string_view tok = text.substr(i, j - i);
        i = j;
        while (!tok.empty() && is_punct(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
        while (!tok.empty() && is_punct(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
        // single characters carry no sentiment and are not counted
        if (tok.size() > 1) out.push_back(lower(tok));
    }
    return out;
}

TurnSentiment score_turn(std::string_view text, const SentimentLexicon& lex) {
    const auto tokens = sentiment_tokens(text);
    if (tokens.empty()) return {};
    std::vector<double> valences(tokens.size(), 0.0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (lex.booster(tokens[i])) continue;
        const double* base = lex.valence(tokens[i]);
        if (!base || *base == 0.0) continue;
        double v = *base;
        bool negated = false;
        for (std::size_t back = 1; back <= kRuleWindow && back <= i; ++back) {
            const auto& prev = tokens[i - back];
            if (const double* b = lex.booster(prev)) {
                double scalar = v < 0.0 ? -*b : *b;
                if (back == 2) scalar *= 0.95;
                if (back == 3) scalar *= 0.9;
                v += scalar;
            }
            if (lex.is_negation(prev)) negated = true;
        }
        if (negated) v *= kNegationScalar;
        valences[i] = v;
    }

    double pos_sum = 0.0, neg_sum = 0.0, neu_count = 0.0, total = 0.0;
    for (double v : valences) {
        total += v;
        if (v > 0.0) pos_sum += v + 1.0;
        else if (v < 0.0) neg_sum += v - 1.0;
        else neu_count += 1.0;
    }
    TurnSentiment s;
    const double mass = pos_sum + std::abs(neg_sum) + neu_count;
    s.pos = pos_sum / mass;
    s.neg = std::abs(neg_sum) / mass;
    s.neu = neu_count / mass;
    s.compound = std::clamp(total / std::sqrt(total * total + kNormalizationAlpha), -1.0, 1.0);
    return s;
}

bool SentimentTrajectory::any_empty() const {
    return std::find(empty_segment.begin(), empty_segment.end(), true) != empty_segment.end();
}

std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(std::size_t n_turns, std::size_t n_segments) {
    if (n_segments < 1) throw ValidationError("segment count must be at least 1");
    if (n_turns < n_segments) throw ValidationError("transcript too short to segment");
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t base = n_turns / n_segments;
    const std::size_t extra = n_turns % n_segments;
    std::size_t begin = 0;
    for (std::size_t s = 0; s < n_segments; ++s) {
        std::size_t len = base + (s < extra ? 1 : 0);
        out.emplace_back(begin, begin + len);
        begin += len;
    }
    return out;
}

SentimentTrajectory trajectory(const Transcript& t, Role r, std::size_t n_segments, const SentimentLexicon& lex) {
    SentimentTrajectory out;
    out.role = r;
    for (auto [b, e] : segment_bounds(t.turns.size(), n_segments)) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = b; i < e; ++i) {
            if (t.turns[i].speaker() != r) continue;
            sum += score_turn(t.turns[i].text(), lex).pos;
            ++n;
        }
        out.segments.push_back(n ? sum / static_cast<double>(n) : 0.0);
        out.empty_segment.push_back(n == 0);
    }
    return out;
}

double average_sentiment(const Transcript& t, Role r, const SentimentLexicon& lex) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& turn : t.turns) {
        if (turn.speaker() != r) continue;
        sum += score_turn(turn.text(), lex).pos;
        ++n;
    }
    if (n == 0) throw ValidationError("no " + std::string(to_string(r)) + " turns");
    return sum / static_cast<double>(n);
}

} // namespace bedside::sentiment
