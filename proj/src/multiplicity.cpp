#include "responder/multiplicity.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace responder {

std::vector<FdrDecision> bh_adjust(std::span<const double> pvalues, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("FDR level q must lie in (0, 1)");
    const std::size_t m = pvalues.size();
    for (double p : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p-values must lie in [0, 1]");
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    std::vector<FdrDecision> out(m);
    double running = 1.0;
    for (std::size_t rank = m; rank-- > 0;) {
        const std::size_t i = order[rank];
        const double scaled = static_cast<double>(m) * pvalues[i] / static_cast<double>(rank + 1);
        running = std::min(running, std::min(1.0, scaled));
        out[i] = FdrDecision{i, pvalues[i], running, running <= q};
    }
    return out;
}

}  // namespace responder
