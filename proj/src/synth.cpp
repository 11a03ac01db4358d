#include "bedside/synth.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace bedside::synth {

namespace {

const std::vector<std::string> kPhysicianFiller{
    "we",      "looked",   "at",        "the",    "scan",     "from",   "last",    "week",   "and",
    "talked",  "about",    "what",      "it",     "shows",    "for",    "your",    "treatment", "plan",
    "going",   "forward",  "this",      "means",  "options",  "there",  "are",     "several", "to",
    "consider", "with",    "team",      "next",   "steps",    "include", "follow", "visit",  "discuss",
    "medications", "schedule", "review", "doctor", "office",  "today",  "tumor",   "lungs",  "chest"};

const std::vector<std::string> kPatientFiller{"my",   "husband", "asked", "about", "the",     "scan",  "and",
                                              "what", "it",      "means", "for",   "us",      "at",    "home",
                                              "we",   "talked",  "last",  "night", "about",   "it",    "again"};

const std::vector<std::string> kPositiveCandidates{"good", "great", "better", "glad", "hope"};

std::vector<std::string> neutral_only(const std::vector<std::string>& words, const sentiment::SentimentLexicon& lex) {
    std::vector<std::string> out;
    for (const auto& w : words)
        if (w.size() > 1 && !lex.valence(w) && !lex.booster(w) && !lex.is_negation(w)) out.push_back(w);
    if (out.size() < 5) throw ValidationError("lexicon leaves too few neutral filler words");
    return out;
}

std::pair<std::string, double> positive_word(const sentiment::SentimentLexicon& lex) {
    for (const auto& w : kPositiveCandidates)
        if (const double* v = lex.valence(w); v && *v > 0.0) return {w, *v};
    throw ValidationError("lexicon has none of the positive anchor words");
}

/// m positive words among n neutral ones give pos = m(v+1) / (m(v+1) + n).
std::string physician_turn(double target, const std::string& pos_word, double valence,
                           const std::vector<std::string>& filler, std::mt19937_64& rng) {
    const double mass = valence + 1.0;
    auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(40.0 * target / (mass * (1.0 - target)))));
    auto n = static_cast<std::size_t>(std::max(1.0, std::round(mass * static_cast<double>(m) * (1.0 - target) / target)));
    std::uniform_int_distribution<std::size_t> pick(0, filler.size() - 1);
    std::vector<std::string> words;
    words.reserve(m + n);
    for (std::size_t i = 0; i < n; ++i) words.push_back(filler[pick(rng)]);
    // spread the positives evenly through the filler
    for (std::size_t j = 0; j < m; ++j) {
        auto at = (j + 1) * (n + j) / (m + 1);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(std::min(at, words.size())), pos_word);
    }
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    return text + ".";
}

std::string patient_turn(std::size_t len, const std::vector<std::string>& filler, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, filler.size() - 1);
    std::string text;
    for (std::size_t i = 0; i < len; ++i) text += (text.empty() ? "" : " ") + filler[pick(rng)];
    return text + ".";
}

PrognosisResponse nonresponse(std::mt19937_64& rng) {
    return std::bernoulli_distribution(0.5)(rng) ? PrognosisResponse::dont_know() : PrognosisResponse::refused();
}

} // namespace

std::vector<Family> three_families() {
    return {
        {"dynamic", 0.10, {0.08, 0.18, 0.10, 0.08, 0.08, 0.10, 0.18, 0.12}, -1.2},
        {"flat-high", 0.25, std::vector<double>(8, 0.10), 0.0},
        {"flat-low", 0.65, std::vector<double>(8, 0.05), 0.6},
    };
}

std::vector<Family> single_family() { return {{"flat", 1.0, std::vector<double>(8, 0.08), 0.0}}; }

void SynthSpec::validate() const {
    if (n_transcripts == 0) throw ValidationError("zero transcripts requested");
    if (families.empty()) throw ValidationError("no families given");
    if (segments == 0) throw ValidationError("segments must be positive");
    if (turns_per_segment < 2 || turns_per_segment % 2 != 0)
        throw ValidationError("turns_per_segment must be a positive even number");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ValidationError("noise must be a finite non-negative number");
    if (!(nonresponse_rate >= 0.0 && nonresponse_rate < 1.0)) throw ValidationError("nonresponse_rate must be in [0, 1)");
    double total = 0.0;
    for (const auto& f : families) {
        if (!std::isfinite(f.weight) || f.weight < 0.0)
            throw ValidationError("invalid mixture weight for family '" + f.name + "'");
        if (f.shape.size() != segments)
            throw ValidationError("family '" + f.name + "' shape has " + std::to_string(f.shape.size()) +
                                  " points, expected " + std::to_string(segments));
        for (double v : f.shape)
            if (!(v > 0.0 && v < 1.0)) throw ValidationError("family '" + f.name + "' shape values must be in (0, 1)");
        total += f.weight;
    }
    if (!(total > 0.0)) throw ValidationError("invalid mixture weights: they sum to zero");
}

nlohmann::json SynthSpec::to_json() const {
    nlohmann::json fams = nlohmann::json::array();
    for (const auto& f : families)
        fams.push_back({{"name", f.name}, {"weight", f.weight}, {"shape", f.shape}, {"outcome_effect", f.outcome_effect}});
    return {{"n_transcripts", n_transcripts}, {"families", fams}, {"noise", noise},
            {"segments", segments}, {"turns_per_segment", turns_per_segment},
            {"outcome_intercept", outcome_intercept}, {"nonresponse_rate", nonresponse_rate}, {"seed", seed}};
}

std::vector<std::size_t> family_sizes(const std::vector<Family>& families, std::size_t n) {
    double total = 0.0;
    for (const auto& f : families) total += f.weight;
    if (families.empty() || !(total > 0.0)) throw ValidationError("invalid mixture weights");
    std::vector<std::size_t> sizes(families.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < families.size(); ++i) {
        double exact = static_cast<double>(n) * families[i].weight / total;
        sizes[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += sizes[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++sizes[remainders[r % remainders.size()].second];
    for (std::size_t i = 0; i < families.size(); ++i) {
        if (sizes[i] > 0 || families[i].weight <= 0.0) continue;
        auto donor = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        if (sizes[donor] > 1) {
            --sizes[donor];
            ++sizes[i];
        }
    }
    return sizes;
}

TrajectorySample sample_trajectories(const std::vector<Family>& families, std::size_t n, double noise,
                                     std::uint64_t seed) {
    if (n == 0) throw ValidationError("zero trajectories requested");
    auto sizes = family_sizes(families, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> eps(0.0, noise);
    TrajectorySample out;
    for (std::size_t f = 0; f < families.size(); ++f) {
        for (std::size_t i = 0; i < sizes[f]; ++i) {
            std::vector<double> p = families[f].shape;
            for (double& v : p) v += noise > 0.0 ? eps(rng) : 0.0;
            out.points.push_back(std::move(p));
            out.family.push_back(f);
        }
    }
    return out;
}

SynthCorpus generate(const SynthSpec& spec, const sentiment::SentimentLexicon& lex) {
    spec.validate();
    const auto phys_filler = neutral_only(kPhysicianFiller, lex);
    const auto pat_filler = neutral_only(kPatientFiller, lex);
    const auto [pos_word, valence] = positive_word(lex);

    auto sizes = family_sizes(spec.families, spec.n_transcripts);
    std::vector<std::size_t> membership;
    for (std::size_t f = 0; f < sizes.size(); ++f) membership.insert(membership.end(), sizes[f], f);

    std::mt19937_64 rng(spec.seed);
    std::shuffle(membership.begin(), membership.end(), rng);

    SynthCorpus corpus;
    for (const auto& f : spec.families) corpus.family_names.push_back(f.name);
    std::normal_distribution<double> eps(0.0, spec.noise);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int width = static_cast<int>(std::to_string(spec.n_transcripts).size());

    for (std::size_t t = 0; t < spec.n_transcripts; ++t) {
        const auto& family = spec.families[membership[t]];
        Transcript tr;
        std::ostringstream id;
        id << "synth-" << std::setw(std::max(3, width)) << std::setfill('0') << (t + 1);
        tr.id = id.str();

        // patient verbosity varies by transcript so LECT-UR scores spread out
        const double verbosity = 3.0 + 37.0 * unit(rng);
        for (std::size_t s = 0; s < spec.segments; ++s) {
            for (std::size_t k = 0; k < spec.turns_per_segment; ++k) {
                if (k % 2 == 0) {
                    double target = family.shape[s] + (spec.noise > 0.0 ? eps(rng) : 0.0);
                    target = std::clamp(target, 0.005, 0.8);
                    tr.turns.emplace_back(Role::physician, physician_turn(target, pos_word, valence, phys_filler, rng));
                } else {
                    auto len = static_cast<std::size_t>(std::max(2.0, std::round(verbosity * (0.5 + unit(rng)))));
                    tr.turns.emplace_back(Role::patient, patient_turn(len, pat_filler, rng));
                }
            }
        }

        auto& meta = tr.meta;
        meta.patient_age = std::round(45.0 + 40.0 * unit(rng));
        meta.patient_gender = unit(rng) < 0.5 ? Gender::female : Gender::male;
        meta.disease_severity = 1 + static_cast<int>(std::uniform_int_distribution<int>(0, 3)(rng));
        meta.study_site = unit(rng) < 0.5 ? "site-1" : "site-2";
        meta.study_arm = unit(rng) < 0.5 ? "intervention" : "control";

        const double eta = spec.outcome_intercept + family.outcome_effect;
        const bool misunderstood = unit(rng) < 1.0 / (1.0 + std::exp(-eta));
        const int phys = std::uniform_int_distribution<int>(0, 6)(rng);
        std::vector<int> options;
        for (int pat = 0; pat <= 6; ++pat) {
            int d = std::abs(pat - phys);
            if (misunderstood ? d > 1 : d <= 1) options.push_back(pat);
        }
        const int pat = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
        meta.physician_prognosis_response =
            unit(rng) < spec.nonresponse_rate ? nonresponse(rng) : PrognosisResponse::level(phys);
        meta.patient_prognosis_response =
            unit(rng) < spec.nonresponse_rate ? nonresponse(rng) : PrognosisResponse::level(pat);

        corpus.transcripts.push_back(std::move(tr));
        corpus.family.push_back(membership[t]);
    }
    return corpus;
}

void write_corpus_dir(const SynthCorpus& corpus, const SynthSpec& spec, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& t : corpus.transcripts) {
        std::ofstream out(dir / (t.id + ".json"), std::ios::binary);
        out << serialize_transcript(t) << '\n';
        if (!out) throw Error("cannot write " + (dir / (t.id + ".json")).string());
    }
    // not *.json so corpus loading skips it
    std::ofstream truth(dir / "truth.tsv", std::ios::binary);
    truth << "# seed " << spec.seed << "\n";
    truth << "id\tfamily\n";
    for (std::size_t i = 0; i < corpus.transcripts.size(); ++i)
        truth << corpus.transcripts[i].id << '\t' << corpus.family_names[corpus.family[i]] << '\n';
    if (!truth) throw Error("cannot write " + (dir / "truth.tsv").string());
}

} // namespace bedside::synth
