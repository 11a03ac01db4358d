#pragma once

#include "bedside/transcript.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bedside::lectur {

struct LectUrParams {
    int window = 20;
    double tau = 103.0;
    int step = 1;

    /// Throws ValidationError unless window >= 2, tau > 0 and step >= 1.
    void validate() const;
};

struct LectUrResult {
    std::size_t score = 0;
    /// Start indices of the windows classified as lecturing.
    std::vector<std::size_t> windows;
    std::size_t n_windows_total = 0;
};

/// Number of windows a transcript of `n_turns` turns yields.
std::size_t window_count(std::size_t n_turns, const LectUrParams& p);

/// Slides a window of `p.window` turns over the transcript. A window is
/// lecturing when the physician's word sum is at least tau and the patient's
/// word sum is at most tau. Other-role turns occupy positions but add no words.
LectUrResult lecturing_windows(const Transcript& t, const LectUrParams& p);

/// Discretized Gaussian kernel density on an even grid over
/// [min - 3h, max + 3h], normalized to sum to one.
struct Pmf {
    std::vector<double> grid;
    std::vector<double> mass;
    double bandwidth = 0.0;
};

/// Silverman's rule of thumb; falls back to 1.0 when the sample has no spread.
double silverman_bandwidth(std::span<const double> scores);

Pmf kde_pmf(std::span<const double> scores, std::size_t n_grid = 256,
            std::optional<double> bandwidth = std::nullopt);

/// Shannon entropy in nats. Zero-mass cells contribute nothing.
double entropy(std::span<const double> pmf);

/// Inclusive arithmetic range parsed from "lo:hi:step", "lo:hi" (step 1) or a
/// single value.
struct GridRange {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
    static GridRange parse(const std::string& spec);
};

struct FitOptions {
    std::size_t n_grid = 256;
    /// Count other-role words on the patient side.
    bool include_other_as_patient = false;
};

struct EntropySurface {
    std::vector<double> taus;
    std::vector<int> windows;
    /// entropy[w][t] for windows[w], taus[t].
    std::vector<std::vector<double>> entropy;
    double best_tau = 0.0;
    int best_window = 0;
    double best_entropy = 0.0;
    /// Number of grid points where every transcript got the same score.
    std::size_t degenerate_points = 0;
    /// Set when every grid point was degenerate.
    bool degenerate = false;

    nlohmann::json to_json() const;
};

/// Grid search for the (tau, window) maximizing the entropy of the corpus'
/// score distribution. A grid point where all transcripts score the same is a
/// point mass and gets entropy 0. Ties go to the smaller window, then the
/// smaller tau.
EntropySurface fit_params(const std::vector<Transcript>& corpus, const GridRange& tau_range,
                          const GridRange& window_range, const FitOptions& opts = {});

struct MedianSplit {
    double median = 0.0;
    std::vector<std::size_t> high;
    std::vector<std::size_t> low;
    /// True when one of the groups came out empty.
    bool degenerate = false;
};

/// Partitions indices by score around the median; scores equal to the
/// median go to the low group.
MedianSplit split_by_median(std::span<const double> scores);

} // namespace bedside::lectur
