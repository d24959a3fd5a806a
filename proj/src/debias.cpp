#include "responder/debias.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace responder {

namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

bool AssayCounts::valid() const noexcept {
    return N0 > 0 && N1 > 0 && C0 > 0 && C1 > 0 &&
           n0 >= 0 && n0 <= N0 && n1 >= 0 && n1 <= N1 &&
           c0 >= 0 && c0 <= C0 && c1 >= 0 && c1 <= C1;
}

void AssayCounts::validate() const {
    auto check_pair = [](const char* pos, std::int64_t n, const char* tot, std::int64_t N) {
        if (N <= 0) {
            throw InvalidCountsError(std::string(tot) + " must be positive, got " + std::to_string(N));
        }
        if (n < 0 || n > N) {
            std::ostringstream os;
            os << pos << " must lie in [0, " << tot << "], got " << pos << "=" << n << " " << tot << "=" << N;
            throw InvalidCountsError(os.str());
        }
    };
    check_pair("n0", n0, "N0", N0);
    check_pair("n1", n1, "N1", N1);
    check_pair("c0", c0, "C0", C0);
    check_pair("c1", c1, "C1", C1);
}

bool MisclassRates::valid() const noexcept {
    return is_probability(fp0) && is_probability(fn0) && is_probability(fp1) && is_probability(fn1) &&
           fp0 + fn0 <= 1.0 - kRateEpsilon && fp1 + fn1 <= 1.0 - kRateEpsilon;
}

void MisclassRates::validate() const {
    if (!valid()) {
        std::ostringstream os;
        os << "misclassification rates out of range: fp0=" << fp0 << " fn0=" << fn0 << " fp1=" << fp1
           << " fn1=" << fn1;
        throw DegenerateRatesError(os.str());
    }
}

double debias_proportion(double p_obs, double fp, double fn) {
    const double denom = 1.0 - fn - fp;
    if (!(denom >= kRateEpsilon)) {
        throw DegenerateRatesError("1 - fp - fn below epsilon: fp=" + std::to_string(fp) +
                                   " fn=" + std::to_string(fn));
    }
    return (p_obs - fp) / denom;
}

double pooled_debiased_z(double rate0, std::int64_t total0, double rate1, std::int64_t total1,
                         const MisclassRates& theta) {
    const double a = debias_proportion(rate0, theta.fp0, theta.fn0);
    const double b = debias_proportion(rate1, theta.fp1, theta.fn1);
    const double w0 = static_cast<double>(total0);
    const double w1 = static_cast<double>(total1);
    const double pooled = (w1 * b + w0 * a) / (w0 + w1);
    const double diff = b - a;
    const double var = pooled * (1.0 - pooled) * (1.0 / w1 + 1.0 / w0);
    if (!(var > 0.0)) {
        if (diff == 0.0) return 0.0;
        return diff > 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    }
    return diff / std::sqrt(var);
}

double control_z(const AssayCounts& counts, const MisclassRates& theta) {
    return pooled_debiased_z(counts.control_rate0(), counts.C0, counts.control_rate1(), counts.C1, theta);
}

double responder_z(const AssayCounts& counts, const MisclassRates& theta) {
    return pooled_debiased_z(counts.primary_rate0(), counts.N0, counts.primary_rate1(), counts.N1, theta);
}

double upper_tail_p(double z) {
    if (std::isnan(z)) return 1.0;
    if (z == std::numeric_limits<double>::infinity()) return 0.0;
    if (z == -std::numeric_limits<double>::infinity()) return 1.0;
    return std::clamp(0.5 * std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

double p_value_at(const AssayCounts& counts, const MisclassRates& theta) {
    return upper_tail_p(responder_z(counts, theta));
}

double unadjusted_p(const AssayCounts& counts) {
    counts.validate();
    return p_value_at(counts, MisclassRates::zero());
}

double normal_quantile(double prob) {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, prob);
}

}  // namespace responder
