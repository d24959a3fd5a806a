#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace responder {

struct FdrDecision {
    std::size_t index = 0;  // position in the input
    double p = 0.0;
    double p_bh = 0.0;      // Benjamini-Hochberg adjusted p-value
    bool rejected = false;  // p_bh <= q
};

/// Benjamini-Hochberg step-up adjustment. Output is in input order.
std::vector<FdrDecision> bh_adjust(std::span<const double> pvalues, double q);

}  // namespace responder
