#pragma once

#include "bedside/lectur.hpp"
#include "bedside/sentiment.hpp"
#include "bedside/transcript.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace bedside::pipeline {

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);
/// Hash of the canonical serialization of every transcript, in order.
std::string corpus_hash(const std::vector<Transcript>& corpus);
/// {config_hash, corpus_hash, seed} block embedded in every artifact.
nlohmann::json provenance(const nlohmann::json& config, const std::vector<Transcript>& corpus, std::uint64_t seed);

/// Per-transcript metrics: LECT-UR score, average and segmented sentiment for
/// both roles, and the derived outcome.
nlohmann::json analyze(const std::vector<Transcript>& corpus, const lectur::LectUrParams& params, std::size_t segments,
                       const sentiment::SentimentLexicon& lex);

struct LecturStage {
    lectur::EntropySurface surface;
    lectur::LectUrParams params;
    std::vector<double> scores;
    lectur::MedianSplit split;

    nlohmann::json to_json(const std::vector<Transcript>& corpus) const;
};
LecturStage lectur_stage(const std::vector<Transcript>& corpus, const lectur::GridRange& tau,
                         const lectur::GridRange& window, const lectur::FitOptions& opts = {});

/// Physician trajectories, k-means model selection by silhouette, and a
/// GMM/BIC check over 1..k_hi. Cluster labels A, B, ... go by descending
/// centroid mean.
nlohmann::json cluster_stage(const std::vector<Transcript>& corpus, std::size_t segments, std::size_t k_lo,
                             std::size_t k_hi, std::uint64_t seed, const sentiment::SentimentLexicon& lex);

/// Group proportions with z-tests, Cliff's d, the confounder-adjusted logit
/// and per-cluster predicted misunderstanding. `clusters` is cluster_stage output.
nlohmann::json stats_stage(const std::vector<Transcript>& corpus, const nlohmann::json& clusters,
                           const lectur::LectUrParams& params, std::uint64_t seed,
                           const sentiment::SentimentLexicon& lex);

struct PipelineConfig {
    std::filesystem::path corpus;
    /// Empty means the bundled demo lexicon.
    std::filesystem::path lexicon;
    std::size_t segments = 8;
    lectur::GridRange tau{10, 300, 5};
    lectur::GridRange window{5, 50, 1};
    std::size_t k_lo = 2;
    std::size_t k_hi = 10;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = ".";

    /// Everything that affects artifact contents besides the corpus bytes,
    /// which are hashed separately. Paths are excluded.
    nlohmann::json to_json() const;
};

struct PipelineResult {
    std::vector<std::string> completed;
    std::string failed_stage;
    std::string error;

    bool ok() const { return failed_stage.empty(); }
};

/// Writes surface.json, clusters.json and stats.json into out_dir, then
/// manifest.json listing completed stages. Stops at the first failing stage.
PipelineResult run_pipeline(const PipelineConfig& config);

} // namespace bedside::pipeline
