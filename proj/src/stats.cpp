#include "bedside/stats.hpp"

#include "bedside/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace bedside::stats {

MisunderstandingOutcome derive_outcome(const PrognosisResponse& physician, const PrognosisResponse& patient) {
    MisunderstandingOutcome out;
    if (!physician.answered() || !patient.answered()) {
        out.excluded = true;
        return out;
    }
    int level = std::abs(physician.value() - patient.value());
    out.level = level;
    out.misunderstood = level > kMisunderstoodAbove;
    out.severe = level >= kSevereFrom;
    return out;
}

MisunderstandingOutcome derive_outcome(const ConversationMeta& meta) {
    if (!meta.physician_prognosis_response || !meta.patient_prognosis_response) {
        MisunderstandingOutcome out;
        out.excluded = true;
        return out;
    }
    return derive_outcome(*meta.physician_prognosis_response, *meta.patient_prognosis_response);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double two_tailed_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

ZTest two_prop_ztest(std::size_t x1, std::size_t n1, std::size_t x2, std::size_t n2) {
    if (n1 == 0 || n2 == 0) throw ValidationError("two_prop_ztest: empty group");
    if (x1 > n1 || x2 > n2) throw ValidationError("two_prop_ztest: successes exceed group size");
    ZTest t;
    const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
    t.p1 = static_cast<double>(x1) / dn1;
    t.p2 = static_cast<double>(x2) / dn2;
    const double pooled = static_cast<double>(x1 + x2) / (dn1 + dn2);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / dn1 + 1.0 / dn2));
    if (se == 0.0) return t;
    t.z = (t.p1 - t.p2) / se;
    t.p = two_tailed_p(t.z);
    return t;
}

double cliffs_d(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("cliffs_d: empty sample");
    std::vector<double> sorted(b.begin(), b.end());
    std::sort(sorted.begin(), sorted.end());
    // counts via binary search: #{b < x} and #{b > x} for each x in a
    long double greater = 0, less = 0;
    for (double x : a) {
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), x);
        auto hi = std::upper_bound(sorted.begin(), sorted.end(), x);
        greater += static_cast<long double>(lo - sorted.begin());
        less += static_cast<long double>(sorted.end() - hi);
    }
    return static_cast<double>((greater - less) /
                               (static_cast<long double>(a.size()) * static_cast<long double>(b.size())));
}

} // namespace bedside::stats
