#include "bedside/lectur.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace bedside::lectur {

void LectUrParams::validate() const {
    if (window < 2) throw ValidationError("window must be at least 2 turns");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (step < 1) throw ValidationError("step must be at least 1");
}

std::size_t window_count(std::size_t n_turns, const LectUrParams& p) {
    auto w = static_cast<std::size_t>(p.window);
    if (n_turns < w) return 0;
    return (n_turns - w) / static_cast<std::size_t>(p.step) + 1;
}

LectUrResult lecturing_windows(const Transcript& t, const LectUrParams& p) {
    p.validate();
    const std::size_t n = t.turns.size();
    // prefix sums of physician and patient words
    std::vector<double> doc(n + 1, 0.0), pat(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& turn = t.turns[i];
        auto w = static_cast<double>(turn.words());
        doc[i + 1] = doc[i] + (turn.speaker() == Role::physician ? w : 0.0);
        pat[i + 1] = pat[i] + (turn.speaker() == Role::patient ? w : 0.0);
    }
    LectUrResult r;
    r.n_windows_total = window_count(n, p);
    const auto w = static_cast<std::size_t>(p.window);
    for (std::size_t i = 0; i < r.n_windows_total; ++i) {
        std::size_t k = i * static_cast<std::size_t>(p.step);
        double d = doc[k + w] - doc[k];
        double q = pat[k + w] - pat[k];
        if (d - p.tau >= 0.0 && p.tau - q >= 0.0) r.windows.push_back(k);
    }
    r.score = r.windows.size();
    return r;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
    double pos = q * static_cast<double>(v.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

} // namespace

double silverman_bandwidth(std::span<const double> scores) {
    const auto n = scores.size();
    if (n < 2) return 1.0;
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) return 1.0;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

Pmf kde_pmf(std::span<const double> scores, std::size_t n_grid, std::optional<double> bandwidth) {
    if (scores.empty()) throw ValidationError("no scores");
    if (n_grid < 2) throw ValidationError("kde grid needs at least 2 cells");
    if (bandwidth && !(*bandwidth > 0.0)) throw ValidationError("bandwidth must be positive");
    Pmf out;
    out.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(scores);
    const double h = out.bandwidth;
    auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *mn - 3.0 * h;
    const double hi = *mx + 3.0 * h;
    const double dx = (hi - lo) / static_cast<double>(n_grid - 1);
    out.grid.resize(n_grid);
    out.mass.assign(n_grid, 0.0);
    for (std::size_t i = 0; i < n_grid; ++i) {
        // fill symmetrically so mirrored samples give mirrored grids
        out.grid[i] = i < n_grid / 2 ? lo + dx * static_cast<double>(i)
                                     : hi - dx * static_cast<double>(n_grid - 1 - i);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n_grid; ++i) {
        double acc = 0.0;
        for (double s : scores) {
            double u = (out.grid[i] - s) / h;
            acc += std::exp(-0.5 * u * u);
        }
        out.mass[i] = acc;
        total += acc;
    }
    for (auto& m : out.mass) m /= total;
    return out;
}

double entropy(std::span<const double> pmf) {
    double sum = 0.0;
    for (double p : pmf) {
        if (p < 0.0 || std::isnan(p)) throw ValidationError("pmf has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("pmf does not sum to 1");
    double h = 0.0;
    for (double p : pmf)
        if (p > 0.0) h -= p * std::log(p);
    return std::max(h, 0.0);
}

std::vector<double> GridRange::values() const {
    if (!(step > 0.0)) throw ValidationError("grid step must be positive");
    if (hi < lo) throw ValidationError("grid range is empty");
    std::vector<double> v;
    auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) v.push_back(lo + step * static_cast<double>(i));
    return v;
}

GridRange GridRange::parse(const std::string& spec) {
    GridRange r;
    auto c1 = spec.find(':');
    try {
        if (c1 == std::string::npos) {
            r.lo = r.hi = std::stod(spec);
            return r;
        }
        auto c2 = spec.find(':', c1 + 1);
        r.lo = std::stod(spec.substr(0, c1));
        if (c2 == std::string::npos) {
            r.hi = std::stod(spec.substr(c1 + 1));
        } else {
            r.hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
            r.step = std::stod(spec.substr(c2 + 1));
        }
    } catch (const std::logic_error&) {
        throw ParseError("bad range '" + spec + "', expected lo:hi:step");
    }
    r.values();
    return r;
}

nlohmann::json EntropySurface::to_json() const {
    return {
        {"taus", taus},
        {"windows", windows},
        {"entropy", entropy},
        {"argmax", {{"tau", best_tau}, {"window", best_window}, {"entropy", best_entropy}}},
        {"degenerate_points", degenerate_points},
        {"degenerate", degenerate},
    };
}

EntropySurface fit_params(const std::vector<Transcript>& corpus, const GridRange& tau_range,
                          const GridRange& window_range, const FitOptions& opts) {
    if (corpus.size() < 2) throw ValidationError("fit_params needs at least 2 transcripts");
    EntropySurface s;
    s.taus = tau_range.values();
    for (double w : window_range.values()) s.windows.push_back(static_cast<int>(std::lround(w)));
    for (double t : s.taus)
        if (!(t > 0.0)) throw ValidationError("tau values must be positive");
    for (int w : s.windows)
        if (w < 2) throw ValidationError("window values must be at least 2");

    std::vector<Transcript> mapped;
    const std::vector<Transcript>* source = &corpus;
    if (opts.include_other_as_patient) {
        for (const auto& t : corpus) mapped.push_back(other_as_patient(t));
        source = &mapped;
    }

    const std::size_t nt = s.taus.size();
    const std::size_t n_points = s.windows.size() * nt;
    std::vector<double> flat(n_points, 0.0);
    std::vector<char> degenerate(n_points, 0);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        std::vector<double> scores(source->size());
        for (std::size_t idx = next++; idx < n_points; idx = next++) {
            LectUrParams p{s.windows[idx / nt], s.taus[idx % nt], 1};
            for (std::size_t i = 0; i < source->size(); ++i)
                scores[i] = static_cast<double>(lecturing_windows((*source)[i], p).score);
            if (std::all_of(scores.begin(), scores.end(), [&](double v) { return v == scores.front(); })) {
                degenerate[idx] = 1;
                flat[idx] = 0.0;
            } else {
                flat[idx] = entropy(kde_pmf(scores, opts.n_grid).mass);
            }
        }
    };
    unsigned n_threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 8u));
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
        worker();
    }

    s.entropy.assign(s.windows.size(), std::vector<double>(nt, 0.0));
    bool have_best = false;
    // windows ascending, then taus ascending, keep the first strict maximum
    std::vector<std::size_t> w_order(s.windows.size()), t_order(nt);
    for (std::size_t i = 0; i < w_order.size(); ++i) w_order[i] = i;
    for (std::size_t i = 0; i < nt; ++i) t_order[i] = i;
    std::stable_sort(w_order.begin(), w_order.end(), [&](auto a, auto b) { return s.windows[a] < s.windows[b]; });
    std::stable_sort(t_order.begin(), t_order.end(), [&](auto a, auto b) { return s.taus[a] < s.taus[b]; });
    for (std::size_t wi = 0; wi < s.windows.size(); ++wi)
        for (std::size_t ti = 0; ti < nt; ++ti) {
            s.entropy[wi][ti] = flat[wi * nt + ti];
            s.degenerate_points += degenerate[wi * nt + ti] ? 1 : 0;
        }
    for (auto wi : w_order)
        for (auto ti : t_order) {
            double h = s.entropy[wi][ti];
            if (!have_best || h > s.best_entropy) {
                have_best = true;
                s.best_entropy = h;
                s.best_tau = s.taus[ti];
                s.best_window = s.windows[wi];
            }
        }
    s.degenerate = s.degenerate_points == n_points;
    return s;
}

MedianSplit split_by_median(std::span<const double> scores) {
    if (scores.size() < 2) throw ValidationError("median split needs at least 2 items");
    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());
    MedianSplit out;
    out.median = quantile_sorted(sorted, 0.5);
    for (std::size_t i = 0; i < scores.size(); ++i)
        (scores[i] > out.median ? out.high : out.low).push_back(i);
    out.degenerate = out.high.empty() || out.low.empty();
    return out;
}

} // namespace bedside::lectur
