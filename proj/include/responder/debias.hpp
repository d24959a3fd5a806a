#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace responder {

/// Lower bound on 1 - fp - fn for any admissible set of misclassification rates.
inline constexpr double kRateEpsilon = 1e-6;

class DegenerateRatesError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class InvalidCountsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Observed counts for one participant: the primary sample and the paired
// control sample, each measured at baseline (T0) and post-vaccination (T1).
struct AssayCounts {
    std::int64_t n0 = 0;  // primary positives, T0
    std::int64_t N0 = 1;  // primary total, T0
    std::int64_t n1 = 0;
    std::int64_t N1 = 1;
    std::int64_t c0 = 0;  // control positives, T0
    std::int64_t C0 = 1;  // control total, T0
    std::int64_t c1 = 0;
    std::int64_t C1 = 1;

    bool valid() const noexcept;
    /// Throws InvalidCountsError describing the first violated invariant.
    void validate() const;

    double primary_rate0() const noexcept { return static_cast<double>(n0) / static_cast<double>(N0); }
    double primary_rate1() const noexcept { return static_cast<double>(n1) / static_cast<double>(N1); }
    double control_rate0() const noexcept { return static_cast<double>(c0) / static_cast<double>(C0); }
    double control_rate1() const noexcept { return static_cast<double>(c1) / static_cast<double>(C1); }

    bool operator==(const AssayCounts&) const = default;
};

// theta: false-positive (1|0) and false-negative (0|1) rates at each timepoint.
struct MisclassRates {
    double fp0 = 0.0;
    double fn0 = 0.0;
    double fp1 = 0.0;
    double fn1 = 0.0;

    static constexpr MisclassRates zero() noexcept { return {}; }

    bool valid() const noexcept;
    void validate() const;

    bool operator==(const MisclassRates&) const = default;
};

/// (p_obs - fp) / (1 - fn - fp). Not clipped to [0, 1].
double debias_proportion(double p_obs, double fp, double fn);

/// Standardized difference of two debiased proportions with the pooled,
/// sample-size-weighted variance. Returns +/-inf when the pooled proportion
/// falls outside (0, 1), and 0 when both the difference and the variance vanish.
double pooled_debiased_z(double rate0, std::int64_t total0, double rate1, std::int64_t total1,
                         const MisclassRates& theta);

/// Standardized T1 - T0 difference of the debiased control proportions.
double control_z(const AssayCounts& counts, const MisclassRates& theta);

/// Standardized T1 - T0 difference of the debiased primary proportions.
double responder_z(const AssayCounts& counts, const MisclassRates& theta);

/// One-sided p-value 1 - Phi(z) for a standard normal z, clamped to [0, 1].
double upper_tail_p(double z);

/// Responder p-value under fixed misclassification rates.
double p_value_at(const AssayCounts& counts, const MisclassRates& theta);

/// p-value ignoring misclassification (theta = 0): the pooled two-proportion z-test.
double unadjusted_p(const AssayCounts& counts);

/// Standard normal quantile.
double normal_quantile(double prob);

}  // namespace responder
