#include "bedside/dialogue/content_pack.hpp"
#include "bedside/dialogue/script.hpp"
#include "bedside/dialogue/engine.hpp"
#include "bedside/error.hpp"
#include "bedside/feedback.hpp"
#include "bedside/http_server.hpp"
#include "bedside/pipeline.hpp"
#include "bedside/service.hpp"
#include "bedside/synth.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

using namespace bedside;
using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> parse_k_range(const std::string& spec) {
    auto colon = spec.find(':');
    try {
        if (colon == std::string::npos) {
            auto k = std::stoul(spec);
            return {k, k};
        }
        return {std::stoul(spec.substr(0, colon)), std::stoul(spec.substr(colon + 1))};
    } catch (const std::logic_error&) {
        throw ValidationError("bad k range '" + spec + "', expected lo:hi");
    }
}

void emit(const json& j, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(out, std::ios::binary);
    f << j.dump(2) << '\n';
    if (!f) throw Error("cannot write " + out);
}

const sentiment::SentimentLexicon& lexicon_for(const std::string& path, std::optional<sentiment::SentimentLexicon>& slot) {
    if (path.empty()) return sentiment::SentimentLexicon::demo();
    slot = sentiment::SentimentLexicon::load(path);
    return *slot;
}

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bedside: conversation analytics and a virtual-patient trainer"};
    app.require_subcommand(0, 1);
    bool report_schema = false;
    app.add_flag("--report-schema", report_schema, "Print the feedback report JSON schema and exit");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Per-transcript LECT-UR, sentiment and outcome metrics");
    std::string a_corpus, a_out, a_lex;
    double a_tau = 103.0;
    int a_window = 20;
    std::size_t a_segments = 8;
    analyze->add_option("--corpus", a_corpus, "Directory of transcript JSON files or a JSONL file")->required();
    analyze->add_option("--tau", a_tau, "LECT-UR word threshold")->capture_default_str();
    analyze->add_option("--window", a_window, "LECT-UR window length in turns")->capture_default_str();
    analyze->add_option("--segments", a_segments, "Sentiment trajectory segments")->capture_default_str();
    analyze->add_option("--lexicon", a_lex, "Sentiment lexicon TSV (default: bundled demo lexicon)");
    analyze->add_option("--out", a_out, "Output JSON path (default: stdout)");

    // lectur-fit
    auto* fit = app.add_subcommand("lectur-fit", "Entropy-maximizing (tau, window) grid search");
    std::string f_corpus, f_out, f_tau = "10:300:5", f_window = "5:50:1";
    std::size_t f_grid = 256;
    bool f_other = false;
    fit->add_option("--corpus", f_corpus, "Directory of transcript JSON files or a JSONL file")->required();
    fit->add_option("--tau", f_tau, "tau grid lo:hi:step")->capture_default_str();
    fit->add_option("--window", f_window, "window grid lo:hi:step")->capture_default_str();
    fit->add_option("--kde-grid", f_grid, "KDE grid cells")->capture_default_str();
    fit->add_flag("--other-as-patient", f_other, "Count other-role words on the patient side");
    fit->add_option("--out", f_out, "Output surface JSON path (default: stdout)");

    // trajectory-cluster
    auto* tc = app.add_subcommand("trajectory-cluster", "Cluster physician sentiment trajectories");
    std::string c_corpus, c_out, c_k = "2:10", c_lex;
    std::size_t c_segments = 8;
    std::uint64_t c_seed = 0;
    tc->add_option("--corpus", c_corpus, "Directory of transcript JSON files or a JSONL file")->required();
    tc->add_option("--segments", c_segments, "Trajectory segments")->capture_default_str();
    tc->add_option("--k", c_k, "Candidate cluster counts lo:hi")->capture_default_str();
    tc->add_option("--seed", c_seed, "k-means seed")->capture_default_str();
    tc->add_option("--lexicon", c_lex, "Sentiment lexicon TSV (default: bundled demo lexicon)");
    tc->add_option("--out", c_out, "Output clusters JSON path (default: stdout)");

    // stats
    auto* st = app.add_subcommand("stats", "Outcome tests, logit model and per-cluster predicted misunderstanding");
    std::string s_corpus, s_clusters, s_surface, s_report, s_lex;
    double s_tau = 103.0;
    int s_window = 20;
    std::uint64_t s_seed = 0;
    st->add_option("--corpus", s_corpus, "Directory of transcript JSON files or a JSONL file")->required();
    st->add_option("--clusters", s_clusters, "clusters.json from trajectory-cluster")->required();
    st->add_option("--surface", s_surface, "surface.json from lectur-fit; its argmax overrides --tau/--window");
    st->add_option("--tau", s_tau, "LECT-UR word threshold")->capture_default_str();
    st->add_option("--window", s_window, "LECT-UR window length")->capture_default_str();
    st->add_option("--seed", s_seed, "Cross-validation fold seed")->capture_default_str();
    st->add_option("--lexicon", s_lex, "Sentiment lexicon TSV (default: bundled demo lexicon)");
    st->add_option("--report", s_report, "Output stats JSON path (default: stdout)");

    // pipeline
    auto* pl = app.add_subcommand("pipeline", "Run lectur-fit, trajectory-cluster and stats end to end");
    pipeline::PipelineConfig pc;
    std::string p_corpus, p_out = "out", p_tau = "10:300:5", p_window = "5:50:1", p_k = "2:10", p_lex;
    pl->add_option("--corpus", p_corpus, "Directory of transcript JSON files or a JSONL file")->required();
    pl->add_option("--out-dir", p_out, "Directory for surface.json, clusters.json, stats.json, manifest.json")
        ->capture_default_str();
    pl->add_option("--tau", p_tau, "tau grid lo:hi:step")->capture_default_str();
    pl->add_option("--window", p_window, "window grid lo:hi:step")->capture_default_str();
    pl->add_option("--k", p_k, "Candidate cluster counts lo:hi")->capture_default_str();
    pl->add_option("--segments", pc.segments, "Trajectory segments")->capture_default_str();
    pl->add_option("--seed", pc.seed, "Seed for k-means and CV folds")->capture_default_str();
    pl->add_option("--lexicon", p_lex, "Sentiment lexicon TSV (default: bundled demo lexicon)");

    // synth
    auto* sy = app.add_subcommand("synth", "Generate a synthetic corpus with known styles and outcomes");
    synth::SynthSpec spec;
    std::string y_out, y_families = "three";
    sy->add_option("--out", y_out, "Output directory")->required();
    sy->add_option("--n", spec.n_transcripts, "Number of transcripts")->capture_default_str();
    sy->add_option("--families", y_families, "Family mixture: three or single")
        ->check(CLI::IsMember({"three", "single"}))
        ->capture_default_str();
    sy->add_option("--noise", spec.noise, "Per-turn noise on the target positive score")->capture_default_str();
    sy->add_option("--seed", spec.seed, "Generator seed")->capture_default_str();

    // serve
    auto* sv = app.add_subcommand("serve", "Run the session HTTP service");
    std::string v_data = env_or("BEDSIDE_SESSION_DIR", "sessions-data");
    std::string v_packs = env_or("BEDSIDE_PACKS_DIR", (std::filesystem::path(BEDSIDE_DATA_DIR) / "packs").string());
    service::HttpOptions http;
    http.host = env_or("BEDSIDE_HOST", http.host);
    http.port = std::atoi(env_or("BEDSIDE_PORT", std::to_string(http.port)).c_str());
    bool v_strip = false;
    sv->add_option("--data-dir", v_data, "Session event logs directory [env BEDSIDE_SESSION_DIR]")->capture_default_str();
    sv->add_option("--packs-dir", v_packs, "Directory of content packs [env BEDSIDE_PACKS_DIR]")->capture_default_str();
    sv->add_option("--host", http.host, "Bind address [env BEDSIDE_HOST]")->capture_default_str();
    sv->add_option("--port", http.port, "Port [env BEDSIDE_PORT]")->capture_default_str();
    sv->add_option("--cors-origin", http.cors_origin, "Access-Control-Allow-Origin value")->capture_default_str();
    sv->add_flag("--strip-punctuation", v_strip, "Drop user punctuation before interpretation");

    // content-check
    auto* cc = app.add_subcommand("content-check", "Validate a content pack");
    std::string k_pack;
    cc->add_option("pack", k_pack, "Content pack directory")->required();

    // converse
    auto* cv = app.add_subcommand("converse", "Run a scripted conversation through the dialogue engine");
    std::string r_pack = dialogue::default_pack_dir().string(), r_script, r_out;
    bool r_strip = false, r_report = false;
    cv->add_option("--pack", r_pack, "Content pack directory")->capture_default_str();
    cv->add_option("--script", r_script, "One utterance per line, optionally prefixed [start-end] in seconds; '#' lines skipped")->required();
    cv->add_flag("--strip-punctuation", r_strip, "Drop user punctuation before interpretation");
    cv->add_flag("--report", r_report, "Include the feedback report");
    cv->add_option("--out", r_out, "Output JSON path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (report_schema) {
            std::cout << feedback::report_schema().dump(2) << '\n';
            return 0;
        }
        if (*analyze) {
            std::optional<sentiment::SentimentLexicon> slot;
            const auto& lex = lexicon_for(a_lex, slot);
            auto corpus = load_corpus(a_corpus);
            if (corpus.empty()) throw ValidationError("no transcripts");
            lectur::LectUrParams p{a_window, a_tau, 1};
            auto j = pipeline::analyze(corpus, p, a_segments, lex);
            json cfg{{"command", "analyze"}, {"tau", a_tau}, {"window", a_window}, {"segments", a_segments},
                     {"lexicon", a_lex.empty() ? "demo" : a_lex}};
            j["provenance"] = pipeline::provenance(cfg, corpus, 0);
            emit(j, a_out);
        } else if (*fit) {
            auto corpus = load_corpus(f_corpus);
            auto tau = lectur::GridRange::parse(f_tau);
            auto window = lectur::GridRange::parse(f_window);
            lectur::FitOptions opts;
            opts.n_grid = f_grid;
            opts.include_other_as_patient = f_other;
            auto s = pipeline::lectur_stage(corpus, tau, window, opts);
            auto j = s.to_json(corpus);
            json cfg{{"command", "lectur-fit"}, {"tau", f_tau}, {"window", f_window}, {"kde_grid", f_grid},
                     {"other_as_patient", f_other}};
            j["provenance"] = pipeline::provenance(cfg, corpus, 0);
            emit(j, f_out);
        } else if (*tc) {
            std::optional<sentiment::SentimentLexicon> slot;
            const auto& lex = lexicon_for(c_lex, slot);
            auto corpus = load_corpus(c_corpus);
            auto [lo, hi] = parse_k_range(c_k);
            auto j = pipeline::cluster_stage(corpus, c_segments, lo, hi, c_seed, lex);
            json cfg{{"command", "trajectory-cluster"}, {"segments", c_segments}, {"k", c_k},
                     {"lexicon", c_lex.empty() ? "demo" : c_lex}};
            j["provenance"] = pipeline::provenance(cfg, corpus, c_seed);
            emit(j, c_out);
        } else if (*st) {
            std::optional<sentiment::SentimentLexicon> slot;
            const auto& lex = lexicon_for(s_lex, slot);
            auto corpus = load_corpus(s_corpus);
            std::ifstream cf(s_clusters);
            if (!cf) throw NotFoundError("cannot open " + s_clusters);
            auto clusters = json::parse(cf);
            lectur::LectUrParams p{s_window, s_tau, 1};
            if (!s_surface.empty()) {
                std::ifstream sf(s_surface);
                if (!sf) throw NotFoundError("cannot open " + s_surface);
                auto surface = json::parse(sf);
                p.window = surface.at("params").at("window").get<int>();
                p.tau = surface.at("params").at("tau").get<double>();
            }
            auto j = pipeline::stats_stage(corpus, clusters, p, s_seed, lex);
            json cfg{{"command", "stats"}, {"tau", p.tau}, {"window", p.window},
                     {"lexicon", s_lex.empty() ? "demo" : s_lex}};
            j["provenance"] = pipeline::provenance(cfg, corpus, s_seed);
            emit(j, s_report);
        } else if (*pl) {
            pc.corpus = p_corpus;
            pc.out_dir = p_out;
            pc.lexicon = p_lex;
            pc.tau = lectur::GridRange::parse(p_tau);
            pc.window = lectur::GridRange::parse(p_window);
            std::tie(pc.k_lo, pc.k_hi) = parse_k_range(p_k);
            auto result = pipeline::run_pipeline(pc);
            if (!result.ok()) {
                std::cerr << "error: stage " << result.failed_stage << ": " << result.error << '\n';
                return 1;
            }
            std::cout << "wrote surface.json, clusters.json, stats.json to " << p_out << '\n';
        } else if (*sy) {
            spec.families = y_families == "single" ? synth::single_family() : synth::three_families();
            auto corpus = synth::generate(spec);
            synth::write_corpus_dir(corpus, spec, y_out);
            std::cout << "wrote " << corpus.transcripts.size() << " transcripts to " << y_out << '\n';
        } else if (*sv) {
            service::ServiceConfig cfg;
            cfg.data_dir = v_data;
            cfg.packs_dir = v_packs;
            cfg.engine.strip_punctuation = v_strip;
            service::SessionManager sessions(cfg);
            std::cerr << "listening on " << http.host << ":" << http.port << '\n';
            service::serve(sessions, http);
        } else if (*cc) {
            auto pack = dialogue::ContentPack::load_unchecked(k_pack);
            auto problems = pack.validate();
            json j{{"pack", pack.id}, {"ok", problems.empty()}, {"problems", problems},
                   {"schemas", pack.schemas.size()}, {"trees", pack.trees.size()}};
            std::cout << j.dump(2) << '\n';
            return problems.empty() ? 0 : 1;
        } else if (*cv) {
            auto pack = dialogue::ContentPack::load(r_pack);
            dialogue::DialogueEngine engine(pack, {r_strip});
            auto j = dialogue::run_script(engine, dialogue::load_script(r_script), r_report);
            emit(j, r_out);
        } else {
            std::cout << app.help() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
