#pragma once

#include "responder/debias.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace responder {

enum class ControlKind { Generic, Negative };
enum class IntervalKind { Wilson, ClopperPearson };

std::string to_string(ControlKind kind);
ControlKind parse_control_kind(const std::string& text);

// Configuration of the confidence set A(alpha) for theta and of the finite
// grid used to represent it.
struct SetConfig {
    double alpha = 0.05;
    ControlKind control_kind = ControlKind::Generic;
    double delta0 = 0.0;             // max |fn0 - fn1|
    std::optional<double> fp_max;    // unset: derived from the control counts
    double fn_max = 0.5;
    int grid_fp = 101;
    int grid_fn = 21;
    int refine_levels = 2;
    bool assume_equal_fn = true;     // single shared false-negative axis
    IntervalKind interval = IntervalKind::Wilson;  // negative-control mode only

    void validate() const;
};

/// min(0.5, 5 * max control rate + 10 / min control total).
double default_fp_max(const AssayCounts& counts);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// Two-sided binomial confidence interval for k successes out of n trials.
Interval binomial_interval(std::int64_t k, std::int64_t n, double confidence, IntervalKind kind);

// Membership predicate for A(alpha) with the critical value and intervals
// computed once.
class MembershipTest {
public:
    MembershipTest(const AssayCounts& counts, const SetConfig& cfg);

    bool operator()(const MisclassRates& theta) const;

    double critical_value() const noexcept { return critical_; }

private:
    AssayCounts counts_;
    ControlKind kind_;
    double delta0_;
    double critical_ = 0.0;
    Interval fp0_interval_;
    Interval fp1_interval_;
};

bool in_confidence_set(const AssayCounts& counts, const MisclassRates& theta, const SetConfig& cfg);

struct GridPoint {
    MisclassRates theta;
    bool in_set = false;
    double p_theta = 1.0;
};

struct NuisanceGrid {
    std::vector<GridPoint> points;   // base lattice first, then refinements in generation order
    SetConfig config;                // echo, with fp_max resolved
    std::size_t base_point_count = 0;
    bool nonempty = false;
    double sup_p = 0.0;              // meaningful only when nonempty
    double inf_p = 0.0;
    std::size_t argmax_index = 0;
    std::size_t argmin_index = 0;
};

/// Enumerates theta over a rectangular lattice, flags membership in A(alpha),
/// evaluates p_theta everywhere, then refines locally around the in-set
/// argmax and argmin of p_theta, halving the spacing each round.
NuisanceGrid build_grid(const AssayCounts& counts, const SetConfig& cfg);
NuisanceGrid build_grid(const AssayCounts& counts, const SetConfig& cfg, bool assume_equal_fn);

}  // namespace responder
