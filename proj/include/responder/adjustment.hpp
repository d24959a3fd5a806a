#pragma once

#include "responder/debias.hpp"
#include "responder/nuisance_set.hpp"

#include <optional>
#include <string>
#include <utility>

namespace responder {

struct MaxAdjusted {
    double p_value = 1.0;       // min(1, sup_p + alpha'), or 1 for an empty set
    bool set_nonempty = false;
    double sup_p = 0.0;         // meaningful only when set_nonempty
};

struct MinAdjusted {
    std::optional<double> p_value;  // absent when the confidence set is empty
    bool set_nonempty = false;
    bool bracketed = false;         // p* lies within [inf_p, sup_p]
    double inf_p = 0.0;
    double sup_p = 0.0;
    std::string diagnostic;
};

inline constexpr const char* kEmptySetDiagnostic =
    "confidence set for misclassification rates is empty; shared-misclassification assumption suspect";

/// Worst-case p-value over A(alpha') plus alpha'. An empty set yields 1.
MaxAdjusted max_adjusted_from_grid(const NuisanceGrid& grid);
MaxAdjusted max_adjusted_p(const AssayCounts& counts, const SetConfig& cfg);

/// In-set p-value closest to p_star; p_star itself when [inf_p, sup_p]
/// brackets it. Exact ties go to the smaller p-value.
MinAdjusted min_adjusted_from_grid(const NuisanceGrid& grid, double p_star);
MinAdjusted min_adjusted_p(const AssayCounts& counts, const SetConfig& cfg);

struct ResponderResult {
    double p_unadjusted = 1.0;
    double p_max_adjusted = 1.0;
    std::optional<double> p_min_adjusted;
    double alpha_prime = 0.0;       // level of the set behind p_max_adjusted
    double alpha = 0.0;             // level of the set behind p_min_adjusted
    bool set_nonempty = false;      // A(alpha') nonempty
    std::optional<std::pair<double, double>> p_range;  // (inf_p, sup_p) over A(alpha)
    bool unadjusted_in_set = false;
    std::string diagnostic;
};

ResponderResult analyze_participant(const AssayCounts& counts, const SetConfig& cfg_max, const SetConfig& cfg_min);

}  // namespace responder
