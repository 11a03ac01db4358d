#pragma once

#include "bedside/sentiment.hpp"
#include "bedside/transcript.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace bedside::synth {

/// A conversation style: the physician's mean positive score per segment.
struct Family {
    std::string name;
    double weight = 1.0;
    std::vector<double> shape;
    /// Added to the misunderstanding log-odds for members of this family.
    double outcome_effect = 0.0;
};

/// Dynamic (peaks at segments 2 and 7), flat 0.1 and flat 0.05, weighted
/// 0.1 / 0.25 / 0.65.
std::vector<Family> three_families();
std::vector<Family> single_family();

struct SynthSpec {
    std::size_t n_transcripts = 40;
    std::vector<Family> families = three_families();
    double noise = 0.01;
    std::size_t segments = 8;
    /// Turns per segment, alternating physician and patient.
    std::size_t turns_per_segment = 4;
    double outcome_intercept = -0.4;
    /// Chance that each survey answer is dont_know or refused.
    double nonresponse_rate = 0.05;
    std::uint64_t seed = 7;

    void validate() const;
    nlohmann::json to_json() const;
};

struct SynthCorpus {
    std::vector<Transcript> transcripts;
    /// Generating family index per transcript.
    std::vector<std::size_t> family;
    std::vector<std::string> family_names;
};

/// Family sizes by largest remainder; every family with positive weight
/// gets at least one member when n allows.
std::vector<std::size_t> family_sizes(const std::vector<Family>& families, std::size_t n);

/// Noisy trajectories drawn straight from the family shapes, no transcripts.
struct TrajectorySample {
    std::vector<std::vector<double>> points;
    std::vector<std::size_t> family;
};
TrajectorySample sample_trajectories(const std::vector<Family>& families, std::size_t n, double noise,
                                     std::uint64_t seed);

/// Transcripts whose physician sentiment trajectory under `lex` follows the
/// family shapes, plus survey metadata with a planted outcome association.
SynthCorpus generate(const SynthSpec& spec, const sentiment::SentimentLexicon& lex = sentiment::SentimentLexicon::demo());

/// One <id>.json per transcript plus truth.tsv with the generating families.
void write_corpus_dir(const SynthCorpus& corpus, const SynthSpec& spec, const std::filesystem::path& dir);

} // namespace bedside::synth
