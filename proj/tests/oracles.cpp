#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace oracle {

double upper_tail(double z) {
    if (z == std::numeric_limits<double>::infinity()) return 0.0;
    if (z == -std::numeric_limits<double>::infinity()) return 1.0;
    return static_cast<double>(0.5L * std::erfc(static_cast<long double>(z) / std::sqrt(2.0L)));
}

double normal_quantile(double prob) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (1.0 - upper_tail(mid) < prob) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double pooled_two_proportion_p(std::int64_t n0, std::int64_t N0, std::int64_t n1, std::int64_t N1) {
    const long double p0 = static_cast<long double>(n0) / N0;
    const long double p1 = static_cast<long double>(n1) / N1;
    const long double pooled = static_cast<long double>(n0 + n1) / (N0 + N1);
    const long double se = std::sqrt(pooled * (1 - pooled) * (1.0L / N0 + 1.0L / N1));
    if (se == 0) {
        if (p1 == p0) return 0.5;
        return p1 > p0 ? 0.0 : 1.0;
    }
    return upper_tail(static_cast<double>((p1 - p0) / se));
}

double corrected_z(std::int64_t k0, std::int64_t n0, std::int64_t k1, std::int64_t n1,
                   double fp0, double fn0, double fp1, double fn1) {
    const long double r0 = (static_cast<long double>(k0) / n0 - fp0) / (1.0L - fp0 - fn0);
    const long double r1 = (static_cast<long double>(k1) / n1 - fp1) / (1.0L - fp1 - fn1);
    const long double pooled = (r0 * n0 + r1 * n1) / (n0 + n1);
    const long double v = pooled * (1 - pooled) * (1.0L / n0 + 1.0L / n1);
    const long double d = r1 - r0;
    if (v <= 0) {
        if (d == 0) return 0.0;
        return d > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(d / std::sqrt(v));
}

Range enumerate_range(const Counts& c, double alpha, double fp_max, int fp_points, double fn_max, int fn_points) {
    Range r;
    const double crit = normal_quantile(1.0 - alpha / 2.0);
    for (int i = 0; i < fp_points; ++i) {
        const double fp0 = fp_max * i / (fp_points - 1);
        for (int j = 0; j < fp_points; ++j) {
            const double fp1 = fp_max * j / (fp_points - 1);
            for (int k = 0; k < fn_points; ++k) {
                const double fn = fn_points == 1 ? 0.0 : fn_max * k / (fn_points - 1);
                if (fp0 + fn > 1.0 - 1e-6 || fp1 + fn > 1.0 - 1e-6) continue;
                if (std::abs(corrected_z(c.c0, c.C0, c.c1, c.C1, fp0, fn, fp1, fn)) > crit) continue;
                const double p = upper_tail(corrected_z(c.n0, c.N0, c.n1, c.N1, fp0, fn, fp1, fn));
                if (!r.nonempty) {
                    r.nonempty = true;
                    r.inf = r.sup = p;
                }
                r.inf = std::min(r.inf, p);
                r.sup = std::max(r.sup, p);
                r.in_set_p.push_back(p);
            }
        }
    }
    return r;
}

double nearest_to(const Range& r, double p_star) {
    if (p_star >= r.inf && p_star <= r.sup) return p_star;
    return p_star < r.inf ? r.inf : r.sup;
}

}  // namespace oracle
