#include "responder/nuisance_set.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

namespace responder {

std::string to_string(ControlKind kind) {
    return kind == ControlKind::Generic ? "generic" : "negative";
}

ControlKind parse_control_kind(const std::string& text) {
    if (text == "generic") return ControlKind::Generic;
    if (text == "negative") return ControlKind::Negative;
    throw std::invalid_argument("unknown control kind '" + text + "' (expected generic|negative)");
}

void SetConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(delta0 >= 0.0 && delta0 <= 1.0)) throw std::invalid_argument("delta0 must lie in [0, 1]");
    if (fp_max && !(*fp_max >= 0.0 && *fp_max <= 1.0)) throw std::invalid_argument("fp_max must lie in [0, 1]");
    if (!(fn_max >= 0.0 && fn_max <= 1.0)) throw std::invalid_argument("fn_max must lie in [0, 1]");
    if (grid_fp < 2 || grid_fn < 2) throw std::invalid_argument("grid sizes must be at least 2");
    if (refine_levels < 0 || refine_levels > 20) throw std::invalid_argument("refine_levels must lie in [0, 20]");
}

double default_fp_max(const AssayCounts& counts) {
    const double rate = std::max(counts.control_rate0(), counts.control_rate1());
    const double smallest = static_cast<double>(std::min(counts.C0, counts.C1));
    return std::min(0.5, 5.0 * rate + 10.0 / smallest);
}

Interval binomial_interval(std::int64_t k, std::int64_t n, double confidence, IntervalKind kind) {
    if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("binomial_interval: need 0 <= k <= n, n > 0");
    const double tail = 1.0 - confidence;
    if (kind == IntervalKind::Wilson) {
        const double z = normal_quantile(1.0 - tail / 2.0);
        const double nn = static_cast<double>(n);
        const double kk = static_cast<double>(k);
        const double z2 = z * z;
        const double center = (kk + z2 / 2.0) / (nn + z2);
        const double half = z / (nn + z2) * std::sqrt(kk * (nn - kk) / nn + z2 / 4.0);
        return {std::max(0.0, center - half), std::min(1.0, center + half)};
    }
    // Clopper-Pearson
    Interval out;
    out.lo = k == 0 ? 0.0 : boost::math::ibeta_inv(static_cast<double>(k), static_cast<double>(n - k + 1), tail / 2.0);
    out.hi = k == n ? 1.0
                    : boost::math::ibeta_inv(static_cast<double>(k + 1), static_cast<double>(n - k), 1.0 - tail / 2.0);
    return out;
}

MembershipTest::MembershipTest(const AssayCounts& counts, const SetConfig& cfg)
    : counts_(counts), kind_(cfg.control_kind), delta0_(cfg.delta0) {
    cfg.validate();
    if (kind_ == ControlKind::Generic) {
        critical_ = normal_quantile(1.0 - cfg.alpha / 2.0);
    } else {
        // Bonferroni product of two level-(1 - alpha/2) intervals.
        const double confidence = 1.0 - cfg.alpha / 2.0;
        fp0_interval_ = binomial_interval(counts.c0, counts.C0, confidence, cfg.interval);
        fp1_interval_ = binomial_interval(counts.c1, counts.C1, confidence, cfg.interval);
        critical_ = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
    }
}

bool MembershipTest::operator()(const MisclassRates& theta) const {
    if (!theta.valid()) return false;
    if (std::abs(theta.fn0 - theta.fn1) > delta0_ + 1e-12) return false;
    if (kind_ == ControlKind::Negative) {
        return fp0_interval_.contains(theta.fp0) && fp1_interval_.contains(theta.fp1);
    }
    return std::abs(control_z(counts_, theta)) <= critical_;
}

bool in_confidence_set(const AssayCounts& counts, const MisclassRates& theta, const SetConfig& cfg) {
    return MembershipTest(counts, cfg)(theta);
}

namespace {

constexpr std::int64_t kRefineHalfWidth = 3;
constexpr int kMaxClimbMoves = 32;

// Lattice coordinates in units of the finest refinement spacing:
// fp0, fn0, fp1, fn1.
using Key = std::array<std::int64_t, 4>;

struct Axis {
    double upper = 0.0;
    std::int64_t base_steps = 0;  // 0 pins the axis at zero
    std::int64_t scale = 1;

    std::int64_t last() const { return base_steps * scale; }
    double at(std::int64_t idx) const {
        if (base_steps == 0) return 0.0;
        return upper * static_cast<double>(idx) / static_cast<double>(last());
    }
};

Axis make_axis(double upper, int count, std::int64_t scale) {
    Axis axis;
    axis.upper = upper;
    axis.base_steps = upper > 0.0 ? count - 1 : 0;
    axis.scale = scale;
    return axis;
}

class GridBuilder {
public:
    GridBuilder(const AssayCounts& counts, const SetConfig& cfg, bool equal_fn)
        : counts_(counts), cfg_(cfg), equal_fn_(equal_fn), member_(counts, cfg) {
        cfg_.fp_max = cfg.fp_max.value_or(default_fp_max(counts));
        cfg_.assume_equal_fn = equal_fn;
        const std::int64_t scale = std::int64_t{1} << cfg.refine_levels;
        fp_ = make_axis(*cfg_.fp_max, cfg.grid_fp, scale);
        fn_ = make_axis(cfg.fn_max, cfg.grid_fn, scale);
    }

    NuisanceGrid run() {
        grid_.config = cfg_;
        enumerate_base();
        grid_.base_point_count = grid_.points.size();
        for (int round = 1; round <= cfg_.refine_levels && grid_.nonempty; ++round) {
            const std::int64_t step = fp_.scale >> round;
            climb(step, [this] { return grid_.argmax_index; });
            climb(step, [this] { return grid_.argmin_index; });
        }
        return std::move(grid_);
    }

private:
    MisclassRates theta_of(const Key& k) const {
        return {fp_.at(k[0]), fn_.at(k[1]), fp_.at(k[2]), fn_.at(equal_fn_ ? k[1] : k[3])};
    }

    bool in_range(const Key& k) const {
        return k[0] >= 0 && k[0] <= fp_.last() && k[2] >= 0 && k[2] <= fp_.last() &&
               k[1] >= 0 && k[1] <= fn_.last() && k[3] >= 0 && k[3] <= fn_.last();
    }

    bool fn_pair_allowed(const Key& k) const {
        return equal_fn_ || std::abs(fn_.at(k[1]) - fn_.at(k[3])) <= cfg_.delta0 + 1e-12;
    }

    bool on_base_lattice(const Key& k) const {
        return std::all_of(k.begin(), k.end(), [&](std::int64_t v) { return v % fp_.scale == 0; });
    }

    void add(const Key& k) {
        const MisclassRates theta = theta_of(k);
        if (!theta.valid()) return;
        GridPoint pt;
        pt.theta = theta;
        pt.in_set = member_(theta);
        pt.p_theta = p_value_at(counts_, theta);
        const std::size_t index = grid_.points.size();
        grid_.points.push_back(pt);
        keys_.push_back(k);
        if (!pt.in_set) return;
        if (!grid_.nonempty) {
            grid_.nonempty = true;
            grid_.sup_p = grid_.inf_p = pt.p_theta;
            grid_.argmax_index = grid_.argmin_index = index;
            return;
        }
        if (pt.p_theta > grid_.sup_p) {
            grid_.sup_p = pt.p_theta;
            grid_.argmax_index = index;
        }
        if (pt.p_theta < grid_.inf_p) {
            grid_.inf_p = pt.p_theta;
            grid_.argmin_index = index;
        }
    }

    void enumerate_base() {
        const std::int64_t s = fp_.scale;
        const std::int64_t fn_count = fn_.base_steps + 1;
        for (std::int64_t a = 0; a <= fp_.base_steps; ++a) {
            for (std::int64_t b = 0; b <= fp_.base_steps; ++b) {
                for (std::int64_t f0 = 0; f0 < fn_count; ++f0) {
                    if (equal_fn_) {
                        add({a * s, f0 * s, b * s, f0 * s});
                        continue;
                    }
                    for (std::int64_t f1 = 0; f1 < fn_count; ++f1) {
                        const Key k{a * s, f0 * s, b * s, f1 * s};
                        if (fn_pair_allowed(k)) add(k);
                    }
                }
            }
        }
    }

    // Re-centres the local window until the extremum stops moving, so a
    // ridge along the set boundary is followed rather than sampled once.
    template <class Extremum>
    void climb(std::int64_t step, Extremum extremum) {
        for (int move = 0; move < kMaxClimbMoves; ++move) {
            const std::size_t before = extremum();
            const Key center = keys_[before];  // refine_around appends to keys_
            refine_around(center, step);
            if (extremum() == before) break;
        }
    }

    void refine_around(const Key& center, std::int64_t step) {
        // Offsets per free dimension; pinned axes only take offset 0.
        auto offsets_for = [&](const Axis& axis) {
            std::vector<std::int64_t> out;
            if (axis.base_steps == 0) return std::vector<std::int64_t>{0};
            for (std::int64_t k = -kRefineHalfWidth; k <= kRefineHalfWidth; ++k) out.push_back(k * step);
            return out;
        };
        const auto fp_off = offsets_for(fp_);
        const auto fn_off = offsets_for(fn_);
        const std::vector<std::int64_t> fn1_off = equal_fn_ ? std::vector<std::int64_t>{0} : fn_off;

        for (auto d0 : fp_off) {
            for (auto d2 : fp_off) {
                for (auto d1 : fn_off) {
                    for (auto d3 : fn1_off) {
                        Key k{center[0] + d0, center[1] + d1, center[2] + d2, center[3] + (equal_fn_ ? d1 : d3)};
                        if (!in_range(k) || !fn_pair_allowed(k)) continue;
                        if (on_base_lattice(k)) continue;
                        if (!refined_.insert(k).second) continue;
                        add(k);
                    }
                }
            }
        }
    }

    AssayCounts counts_;
    SetConfig cfg_;
    bool equal_fn_;
    MembershipTest member_;
    Axis fp_;
    Axis fn_;
    NuisanceGrid grid_;
    std::vector<Key> keys_;
    std::set<Key> refined_;
};

}  // namespace

NuisanceGrid build_grid(const AssayCounts& counts, const SetConfig& cfg, bool assume_equal_fn) {
    counts.validate();
    return GridBuilder(counts, cfg, assume_equal_fn).run();
}

NuisanceGrid build_grid(const AssayCounts& counts, const SetConfig& cfg) {
    return build_grid(counts, cfg, cfg.assume_equal_fn);
}

}  // namespace responder
