#include "bedside/cluster.hpp"
#include "bedside/error.hpp"
#include "bedside/pipeline.hpp"
#include "bedside/synth.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

using namespace bedside;
using namespace bedside::synth;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fraction of points whose cluster's majority family is their own family.
double purity(const std::vector<std::size_t>& assign, const std::vector<std::size_t>& truth) {
    std::map<std::size_t, std::map<std::size_t, std::size_t>> counts;
    for (std::size_t i = 0; i < assign.size(); ++i) ++counts[assign[i]][truth[i]];
    std::size_t agree = 0;
    for (const auto& [c, by_family] : counts) {
        std::size_t best = 0;
        for (const auto& [f, n] : by_family) best = std::max(best, n);
        agree += best;
    }
    return static_cast<double>(agree) / static_cast<double>(assign.size());
}
} // namespace

TEST_CASE("family sizes by largest remainder") {
    auto f = three_families();
    CHECK(family_sizes(f, 40) == std::vector<std::size_t>{4, 10, 26});
    CHECK(family_sizes(f, 60) == std::vector<std::size_t>{6, 15, 39});
    auto sizes = family_sizes(f, 7);
    CHECK(sizes[0] + sizes[1] + sizes[2] == 7);
    CHECK(sizes[0] >= 1);
    f[1].weight = -1;
    CHECK_THROWS_AS(family_sizes(f, 10), ValidationError);
}

TEST_CASE("spec validation") {
    SynthSpec spec;
    spec.n_transcripts = 0;
    CHECK_THROWS_WITH_AS(spec.validate(), "zero transcripts requested", ValidationError);
    spec = {};
    spec.families[0].weight = std::nan("");
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = {};
    spec.families[2].shape.pop_back();
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = {};
    spec.turns_per_segment = 3;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    CHECK_NOTHROW(SynthSpec{}.validate());
}

TEST_CASE("clustering recovers three planted families") {
    auto sample = sample_trajectories(three_families(), 60, 0.01, 1);
    auto sel = cluster::select_k(sample.points, 2, 10, {5});
    CHECK(sel.chosen_k == 3);
    CHECK(purity(sel.best.assignment, sample.family) >= 0.95);
}

TEST_CASE("a single family gives one mixture component") {
    auto sample = sample_trajectories(single_family(), 60, 0.01, 2);
    CHECK(cluster::gmm_bic(sample.points, 1, 5, 3).chosen_k == 1);
}

TEST_CASE("generated transcripts follow their family shape") {
    SynthSpec spec;
    auto corpus = generate(spec);
    REQUIRE(corpus.transcripts.size() == 40);
    const auto& lex = sentiment::SentimentLexicon::demo();
    for (std::size_t i = 0; i < corpus.transcripts.size(); ++i) {
        const auto& shape = spec.families[corpus.family[i]].shape;
        auto tr = sentiment::trajectory(corpus.transcripts[i], Role::physician, 8, lex);
        CHECK_FALSE(tr.any_empty());
        for (std::size_t s = 0; s < 8; ++s) CHECK(std::abs(tr.segments[s] - shape[s]) < 0.06);
    }
    auto again = generate(spec);
    CHECK(pipeline::corpus_hash(again.transcripts) == pipeline::corpus_hash(corpus.transcripts));
    spec.seed = 8;
    CHECK(pipeline::corpus_hash(generate(spec).transcripts) != pipeline::corpus_hash(corpus.transcripts));
}

TEST_CASE("corpus directories round-trip") {
    auto dir = testutil::temp_dir("synth_dir");
    SynthSpec spec;
    spec.n_transcripts = 6;
    auto corpus = generate(spec);
    write_corpus_dir(corpus, spec, dir);
    CHECK(fs::exists(dir / "truth.tsv"));
    auto loaded = load_corpus(dir);
    REQUIRE(loaded.size() == 6);
    CHECK(pipeline::corpus_hash(loaded) == pipeline::corpus_hash(corpus.transcripts));
}

TEST_CASE("fnv-1a reference values") {
    CHECK(pipeline::hex64(pipeline::fnv1a("")) == "cbf29ce484222325");
    CHECK(pipeline::hex64(pipeline::fnv1a("a")) == "af63dc4c8601ec8c");
    CHECK(pipeline::hex64(pipeline::fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("config hash ignores paths") {
    pipeline::PipelineConfig a, b;
    a.corpus = "/x";
    b.corpus = "/y";
    b.out_dir = "/z";
    CHECK(a.to_json() == b.to_json());
    b.seed = 1;
    CHECK(a.to_json() != b.to_json());
}

TEST_CASE("pipeline on an empty corpus fails at load and says so") {
    auto dir = testutil::temp_dir("pipe_empty");
    fs::create_directories(dir / "corpus");
    pipeline::PipelineConfig cfg;
    cfg.corpus = dir / "corpus";
    cfg.out_dir = dir / "out";
    auto r = pipeline::run_pipeline(cfg);
    CHECK_FALSE(r.ok());
    CHECK(r.failed_stage == "load");
    CHECK(r.error == "no transcripts");
    auto m = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(m["failed"]["stage"] == "load");
    CHECK(m["completed"].empty());
    CHECK_FALSE(fs::exists(dir / "out" / "surface.json"));
}

TEST_CASE("pipeline is deterministic and stamps provenance") {
    auto dir = testutil::temp_dir("pipe_det");
    SynthSpec spec;
    write_corpus_dir(generate(spec), spec, dir / "corpus");
    pipeline::PipelineConfig cfg;
    cfg.corpus = dir / "corpus";
    cfg.tau = {10, 150, 10};
    cfg.window = {4, 12, 1};
    cfg.seed = 3;
    cfg.out_dir = dir / "a";
    REQUIRE(pipeline::run_pipeline(cfg).ok());
    cfg.out_dir = dir / "b";
    auto r = pipeline::run_pipeline(cfg);
    REQUIRE(r.ok());
    CHECK(r.completed == std::vector<std::string>{"load", "lectur", "cluster", "stats"});
    for (const char* f : {"surface.json", "clusters.json", "stats.json"}) {
        CAPTURE(f);
        auto a = slurp(dir / "a" / f);
        CHECK(a == slurp(dir / "b" / f));
        auto j = json::parse(a);
        CHECK(j["provenance"]["seed"] == 3);
        CHECK(j["provenance"]["config_hash"].get<std::string>().size() == 16);
        CHECK(j["provenance"]["corpus_hash"] == pipeline::corpus_hash(load_corpus(cfg.corpus)));
    }
    auto clusters = json::parse(slurp(dir / "a" / "clusters.json"));
    CHECK(clusters["kmeans"]["chosen_k"] == 3);
    auto stats = json::parse(slurp(dir / "a" / "stats.json"));
    CHECK(stats.contains("predicted_pmu"));
}
