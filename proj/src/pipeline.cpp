#include "bedside/pipeline.hpp"

#include "bedside/cluster.hpp"
#include "bedside/error.hpp"
#include "bedside/logit.hpp"
#include "bedside/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

namespace bedside::pipeline {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string corpus_hash(const std::vector<Transcript>& corpus) {
    std::string all;
    for (const auto& t : corpus) all += serialize_transcript(t) + "\n";
    return hex64(fnv1a(all));
}

json provenance(const json& config, const std::vector<Transcript>& corpus, std::uint64_t seed) {
    return {{"config_hash", hex64(fnv1a(config.dump()))}, {"corpus_hash", corpus_hash(corpus)}, {"seed", seed}};
}

namespace {

json outcome_json(const stats::MisunderstandingOutcome& o) {
    if (o.excluded) return {{"excluded", true}};
    return {{"excluded", false}, {"level", *o.level}, {"misunderstood", o.misunderstood}, {"severe", o.severe}};
}

json group_json(std::size_t n, std::size_t x) {
    return {{"n", n}, {"misunderstood", x}, {"proportion", n ? static_cast<double>(x) / static_cast<double>(n) : 0.0}};
}

json ztest_json(const stats::ZTest& z) { return {{"z", z.z}, {"p", z.p}, {"p1", z.p1}, {"p2", z.p2}}; }

std::string cluster_label(std::size_t rank) {
    if (rank < 26) return std::string(1, static_cast<char>('A' + rank));
    return "K" + std::to_string(rank + 1);
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write " + path.string());
}

} // namespace

json analyze(const std::vector<Transcript>& corpus, const lectur::LectUrParams& params, std::size_t segments,
             const sentiment::SentimentLexicon& lex) {
    params.validate();
    json rows = json::array();
    for (const auto& t : corpus) {
        auto l = lectur::lecturing_windows(t, params);
        json row{{"id", t.id},
                 {"turns", t.turns.size()},
                 {"physician_words", t.role_words(Role::physician)},
                 {"patient_words", t.role_words(Role::patient)},
                 {"lectur", {{"score", l.score}, {"windows", l.windows}, {"n_windows", l.n_windows_total}}},
                 {"outcome", outcome_json(stats::derive_outcome(t.meta))}};
        for (Role r : {Role::physician, Role::patient}) {
            std::string key(to_string(r));
            try {
                row["average_sentiment"][key] = sentiment::average_sentiment(t, r, lex);
            } catch (const ValidationError&) {
                row["average_sentiment"][key] = nullptr;
            }
            if (t.turns.size() >= segments) {
                auto tr = sentiment::trajectory(t, r, segments, lex);
                row["trajectory"][key] = tr.segments;
                if (tr.any_empty()) row["trajectory_empty_segments"][key] = tr.empty_segment;
            }
        }
        if (t.turns.size() < segments) row["trajectory_omitted"] = "fewer turns than segments";
        rows.push_back(std::move(row));
    }
    return {{"params", {{"window", params.window}, {"tau", params.tau}, {"step", params.step}}},
            {"segments", segments},
            {"transcripts", rows}};
}

json LecturStage::to_json(const std::vector<Transcript>& corpus) const {
    json j = surface.to_json();
    j["params"] = {{"window", params.window}, {"tau", params.tau}, {"step", params.step}};
    json scored = json::array();
    for (std::size_t i = 0; i < corpus.size(); ++i) scored.push_back({{"id", corpus[i].id}, {"score", scores[i]}});
    j["scores"] = scored;
    json high = json::array(), low = json::array();
    for (auto i : split.high) high.push_back(corpus[i].id);
    for (auto i : split.low) low.push_back(corpus[i].id);
    j["median_split"] = {{"median", split.median}, {"high", high}, {"low", low}, {"degenerate", split.degenerate}};
    return j;
}

LecturStage lectur_stage(const std::vector<Transcript>& corpus, const lectur::GridRange& tau,
                         const lectur::GridRange& window, const lectur::FitOptions& opts) {
    if (corpus.empty()) throw ValidationError("no transcripts");
    LecturStage s;
    s.surface = lectur::fit_params(corpus, tau, window, opts);
    s.params.tau = s.surface.best_tau;
    s.params.window = s.surface.best_window;
    for (const auto& t : corpus) {
        const auto& scored = opts.include_other_as_patient ? other_as_patient(t) : t;
        s.scores.push_back(static_cast<double>(lectur::lecturing_windows(scored, s.params).score));
    }
    s.split = lectur::split_by_median(s.scores);
    return s;
}

json cluster_stage(const std::vector<Transcript>& corpus, std::size_t segments, std::size_t k_lo, std::size_t k_hi,
                   std::uint64_t seed, const sentiment::SentimentLexicon& lex) {
    if (corpus.empty()) throw ValidationError("no transcripts");
    std::vector<cluster::Point> points;
    std::vector<std::string> ids;
    json skipped = json::array();
    std::size_t empty_segments = 0;
    for (const auto& t : corpus) {
        if (t.turns.size() < segments) {
            skipped.push_back(t.id);
            continue;
        }
        auto tr = sentiment::trajectory(t, Role::physician, segments, lex);
        empty_segments += static_cast<std::size_t>(std::count(tr.empty_segment.begin(), tr.empty_segment.end(), true));
        points.push_back(tr.segments);
        ids.push_back(t.id);
    }
    const std::size_t distinct = cluster::distinct_points(points);
    json notes = json::array();
    // silhouette needs at least one cluster with two members
    const std::size_t k_cap = std::min(distinct, points.size() > 0 ? points.size() - 1 : 0);
    if (k_hi > k_cap) {
        notes.push_back("k range capped at " + std::to_string(k_cap) + " by the number of distinct trajectories");
        k_hi = k_cap;
    }
    if (k_lo < 2 || k_hi < k_lo) throw ValidationError("too few distinct trajectories for the requested k range");

    cluster::KMeansOptions opts;
    opts.seed = seed;
    auto sel = cluster::select_k(points, k_lo, k_hi, opts);
    auto gmm = cluster::gmm_bic(points, 1, k_hi, seed);

    const auto& best = sel.best;
    std::vector<std::size_t> order(best.k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto mean = [](const cluster::Point& p) { return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size()); };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mean(best.centroids[a]) > mean(best.centroids[b]); });
    std::vector<std::string> label(best.k);
    for (std::size_t r = 0; r < order.size(); ++r) label[order[r]] = cluster_label(r);

    json clusters = json::array();
    for (std::size_t r = 0; r < order.size(); ++r) {
        auto c = order[r];
        auto size = std::count(best.assignment.begin(), best.assignment.end(), c);
        clusters.push_back({{"label", label[c]}, {"centroid", best.centroids[c]}, {"mean", mean(best.centroids[c])},
                            {"size", size}});
    }
    json assignments = json::object();
    json trajectories = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        assignments[ids[i]] = label[best.assignment[i]];
        trajectories[ids[i]] = points[i];
    }
    return {{"role", "physician"},
            {"segments", segments},
            {"n", points.size()},
            {"skipped", skipped},
            {"empty_segments", empty_segments},
            {"notes", notes},
            {"kmeans", sel.to_json("silhouette")},
            {"gmm", gmm.to_json("bic")},
            {"inertia", best.inertia},
            {"clusters", clusters},
            {"assignments", assignments},
            {"trajectories", trajectories}};
}

json stats_stage(const std::vector<Transcript>& corpus, const json& clusters, const lectur::LectUrParams& params,
                 std::uint64_t seed, const sentiment::SentimentLexicon& lex) {
    params.validate();
    if (corpus.empty()) throw ValidationError("no transcripts");
    const auto& assignments = clusters.at("assignments");
    std::vector<std::string> labels;
    for (const auto& c : clusters.at("clusters")) labels.push_back(c.at("label").get<std::string>());

    struct Record {
        const Transcript* t;
        double score;
        stats::MisunderstandingOutcome outcome;
        std::string label;
    };
    std::vector<Record> records;
    std::size_t excluded = 0;
    for (const auto& t : corpus) {
        auto o = stats::derive_outcome(t.meta);
        if (o.excluded) {
            ++excluded;
            continue;
        }
        std::string label = assignments.contains(t.id) ? assignments.at(t.id).get<std::string>() : "";
        records.push_back({&t, static_cast<double>(lectur::lecturing_windows(t, params).score), o, label});
    }
    if (records.empty()) throw ValidationError("no transcripts with usable survey responses");

    json out;
    out["n_transcripts"] = corpus.size();
    out["n_excluded"] = excluded;
    out["n_analyzed"] = records.size();
    out["lectur_params"] = {{"window", params.window}, {"tau", params.tau}, {"step", params.step}};

    // lecturing groups by median LECT-UR
    std::vector<double> scores;
    for (const auto& r : records) scores.push_back(r.score);
    auto split = lectur::split_by_median(scores);
    auto count = [&](const std::vector<std::size_t>& idx, bool severe) {
        std::size_t x = 0;
        for (auto i : idx) x += severe ? records[i].outcome.severe : records[i].outcome.misunderstood;
        return x;
    };
    json groups{{"median", split.median}, {"degenerate", split.degenerate}};
    groups["high"] = group_json(split.high.size(), count(split.high, false));
    groups["low"] = group_json(split.low.size(), count(split.low, false));
    groups["high"]["severe"] = count(split.high, true);
    groups["low"]["severe"] = count(split.low, true);
    if (!split.degenerate) {
        groups["misunderstood_ztest"] =
            ztest_json(stats::two_prop_ztest(count(split.high, false), split.high.size(), count(split.low, false),
                                             split.low.size()));
        groups["severe_ztest"] = ztest_json(stats::two_prop_ztest(count(split.high, true), split.high.size(),
                                                                  count(split.low, true), split.low.size()));
        std::vector<double> lh, ll;
        for (auto i : split.high) lh.push_back(*records[i].outcome.level);
        for (auto i : split.low) ll.push_back(*records[i].outcome.level);
        groups["cliffs_d_level"] = stats::cliffs_d(lh, ll);
    } else {
        groups["note"] = "median split left one group empty; tests skipped";
    }
    out["lecturing_groups"] = groups;

    // misunderstood vs understood LECT-UR scores
    std::vector<double> mis, und;
    for (const auto& r : records) (r.outcome.misunderstood ? mis : und).push_back(r.score);
    if (!mis.empty() && !und.empty()) out["cliffs_d_lectur"] = stats::cliffs_d(mis, und);

    json by_cluster = json::array();
    for (const auto& label : labels) {
        std::size_t n = 0, x = 0, sev = 0;
        for (const auto& r : records) {
            if (r.label != label) continue;
            ++n;
            x += r.outcome.misunderstood;
            sev += r.outcome.severe;
        }
        auto g = group_json(n, x);
        g["label"] = label;
        g["severe"] = sev;
        by_cluster.push_back(g);
    }
    out["cluster_groups"] = by_cluster;

    // confounder-adjusted logit
    std::vector<const Record*> rows;
    for (const auto& r : records)
        if (!r.label.empty()) rows.push_back(&r);
    std::set<std::string> sites, arms;
    double age_sum = 0.0, sev_sum = 0.0;
    std::size_t age_n = 0, sev_n = 0;
    for (const auto* r : rows) {
        sites.insert(r->t->meta.study_site);
        arms.insert(r->t->meta.study_arm);
        if (r->t->meta.patient_age) age_sum += *r->t->meta.patient_age, ++age_n;
        if (r->t->meta.disease_severity) sev_sum += *r->t->meta.disease_severity, ++sev_n;
    }
    const double age_mean = age_n ? age_sum / static_cast<double>(age_n) : 0.0;
    const double sev_mean = sev_n ? sev_sum / static_cast<double>(sev_n) : 0.0;

    std::vector<stats::FeatureSpec> features{{"female"}, {"age"}, {"severity"}, {"average_sentiment"}};
    for (const auto& s : sites) features.push_back({"site_" + s});
    for (const auto& a : arms) features.push_back({"arm_" + a});
    for (const auto& l : labels) features.push_back({"cluster_" + l, false});

    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(features.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    std::size_t imputed = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& m = rows[i]->t->meta;
        std::vector<double> x;
        x.push_back(m.patient_gender == Gender::female ? 1.0 : 0.0);
        x.push_back(m.patient_age.value_or(age_mean));
        x.push_back(m.disease_severity ? static_cast<double>(*m.disease_severity) : sev_mean);
        imputed += !m.patient_age + !m.disease_severity;
        x.push_back(sentiment::average_sentiment(*rows[i]->t, Role::physician, lex));
        for (const auto& s : sites) x.push_back(m.study_site == s ? 1.0 : 0.0);
        for (const auto& a : arms) x.push_back(m.study_arm == a ? 1.0 : 0.0);
        for (const auto& l : labels) x.push_back(rows[i]->label == l ? 1.0 : 0.0);
        for (std::size_t j = 0; j < x.size(); ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x[j];
        y(static_cast<Eigen::Index>(i)) = rows[i]->outcome.misunderstood ? 1.0 : 0.0;
    }
    stats::LogitConfig cfg;
    cfg.seed = seed;
    auto model = stats::logit_fit(X, y, features, cfg);
    out["logit"] = model.to_json();
    out["logit"]["n"] = rows.size();
    out["logit"]["imputed_values"] = imputed;

    json pmu = json::array(), summary_rows = json::array();
    for (const auto& l : labels) {
        const auto* c = model.find("cluster_" + l);
        if (!c) continue;
        double p = 100.0 * stats::predict_cluster_pmu(model, l);
        pmu.push_back({{"cluster", l}, {"pmu_percent", p}, {"beta", c->weight}, {"p_value", c->wald_p}});
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s %.2f %.3f %.3f", l.c_str(), p, c->weight, c->wald_p);
        summary_rows.push_back(buf);
    }
    out["predicted_pmu"] = pmu;
    out["cluster_summary_rows"] = summary_rows;
    return out;
}

json PipelineConfig::to_json() const {
    return {{"lexicon", lexicon.empty() ? std::string("demo") : lexicon.generic_string()},
            {"segments", segments},
            {"tau", {tau.lo, tau.hi, tau.step}},
            {"window", {window.lo, window.hi, window.step}},
            {"k", {k_lo, k_hi}},
            {"seed", seed}};
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    PipelineResult result;
    const json cfg = config.to_json();
    json prov{{"config_hash", hex64(fnv1a(cfg.dump()))}, {"seed", config.seed}};
    std::vector<Transcript> corpus;
    std::optional<sentiment::SentimentLexicon> custom;

    auto manifest = [&] {
        json m{{"provenance", prov}, {"config", cfg}, {"corpus", config.corpus.generic_string()},
               {"completed", result.completed}};
        if (!result.ok()) m["failed"] = {{"stage", result.failed_stage}, {"error", result.error}};
        write_json(config.out_dir / "manifest.json", m);
    };
    auto stage = [&](const std::string& name, auto&& body) {
        if (!result.ok()) return;
        try {
            body();
            result.completed.push_back(name);
        } catch (const std::exception& e) {
            result.failed_stage = name;
            result.error = e.what();
        }
        manifest();
    };

    std::filesystem::create_directories(config.out_dir);
    stage("load", [&] {
        corpus = load_corpus(config.corpus);
        if (corpus.empty()) throw ValidationError("no transcripts");
        if (!config.lexicon.empty()) custom = sentiment::SentimentLexicon::load(config.lexicon);
        prov = provenance(cfg, corpus, config.seed);
    });
    const auto& lex = [&]() -> const sentiment::SentimentLexicon& {
        return custom ? *custom : sentiment::SentimentLexicon::demo();
    };

    lectur::LectUrParams params;
    stage("lectur", [&] {
        auto s = lectur_stage(corpus, config.tau, config.window);
        params = s.params;
        auto j = s.to_json(corpus);
        j["provenance"] = prov;
        write_json(config.out_dir / "surface.json", j);
    });
    json clusters;
    stage("cluster", [&] {
        clusters = cluster_stage(corpus, config.segments, config.k_lo, config.k_hi, config.seed, lex());
        clusters["provenance"] = prov;
        write_json(config.out_dir / "clusters.json", clusters);
    });
    stage("stats", [&] {
        auto j = stats_stage(corpus, clusters, params, config.seed, lex());
        j["provenance"] = prov;
        write_json(config.out_dir / "stats.json", j);
    });
    return result;
}

} // namespace bedside::pipeline
