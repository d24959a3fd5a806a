#include "responder/adjustment.hpp"

#include <algorithm>
#include <cmath>

namespace responder {

MaxAdjusted max_adjusted_from_grid(const NuisanceGrid& grid) {
    MaxAdjusted out;
    out.set_nonempty = grid.nonempty;
    if (!grid.nonempty) return out;
    out.sup_p = grid.sup_p;
    out.p_value = std::min(1.0, grid.sup_p + grid.config.alpha);
    return out;
}

MaxAdjusted max_adjusted_p(const AssayCounts& counts, const SetConfig& cfg) {
    return max_adjusted_from_grid(build_grid(counts, cfg));
}

MinAdjusted min_adjusted_from_grid(const NuisanceGrid& grid, double p_star) {
    MinAdjusted out;
    out.set_nonempty = grid.nonempty;
    if (!grid.nonempty) {
        out.diagnostic = kEmptySetDiagnostic;
        return out;
    }
    out.inf_p = grid.inf_p;
    out.sup_p = grid.sup_p;
    if (p_star >= grid.inf_p && p_star <= grid.sup_p) {
        out.bracketed = true;
        out.p_value = p_star;
        return out;
    }
    double best = 0.0;
    double best_dist = INFINITY;
    for (const auto& pt : grid.points) {
        if (!pt.in_set) continue;
        const double dist = std::abs(p_star - pt.p_theta);
        if (dist < best_dist || (dist == best_dist && pt.p_theta < best)) {
            best = pt.p_theta;
            best_dist = dist;
        }
    }
    out.p_value = best;
    return out;
}

MinAdjusted min_adjusted_p(const AssayCounts& counts, const SetConfig& cfg) {
    return min_adjusted_from_grid(build_grid(counts, cfg), unadjusted_p(counts));
}

ResponderResult analyze_participant(const AssayCounts& counts, const SetConfig& cfg_max, const SetConfig& cfg_min) {
    counts.validate();
    ResponderResult r;
    r.p_unadjusted = unadjusted_p(counts);
    r.alpha_prime = cfg_max.alpha;
    r.alpha = cfg_min.alpha;

    const MaxAdjusted mx = max_adjusted_p(counts, cfg_max);
    r.p_max_adjusted = mx.p_value;
    r.set_nonempty = mx.set_nonempty;

    const MinAdjusted mn = min_adjusted_from_grid(build_grid(counts, cfg_min), r.p_unadjusted);
    r.p_min_adjusted = mn.p_value;
    if (mn.set_nonempty) r.p_range = std::make_pair(mn.inf_p, mn.sup_p);
    r.unadjusted_in_set = mn.bracketed;
    r.diagnostic = mn.diagnostic;
    return r;
}

}  // namespace responder
