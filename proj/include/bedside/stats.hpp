#pragma once

#include "bedside/transcript.hpp"

#include <cstddef>
#include <optional>
#include <span>

namespace bedside::stats {

/// Physician/patient disagreement on the prognosis survey. `level` is the
/// absolute difference of the two answers; excluded when either side
/// did not answer.
struct MisunderstandingOutcome {
    std::optional<int> level;
    bool misunderstood = false;
    bool severe = false;
    bool excluded = false;
};

inline constexpr int kMisunderstoodAbove = 1;
inline constexpr int kSevereFrom = 5;

MisunderstandingOutcome derive_outcome(const PrognosisResponse& physician, const PrognosisResponse& patient);
/// Uses the survey answers stored in the transcript meta; missing answers exclude.
MisunderstandingOutcome derive_outcome(const ConversationMeta& meta);

/// Standard normal CDF.
double normal_cdf(double x);
/// P(|Z| >= |z|), computed without cancellation in the far tail.
double two_tailed_p(double z);

struct ZTest {
    double z = 0.0;
    double p = 1.0;
    double p1 = 0.0;
    double p2 = 0.0;
};

/// Pooled-proportion two-sample z-test. When the pooled proportion is 0 or 1
/// the proportions are equal, z = 0 and p = 1.
ZTest two_prop_ztest(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2);

/// (#{a > b} - #{a < b}) / (|a| |b|) over all pairs.
double cliffs_d(std::span<const double> a, std::span<const double> b);

} // namespace bedside::stats
