#include "oracles.hpp"
#include "responder/nuisance_set.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace responder;

namespace {

AssayCounts participant(std::int64_t c1) { return {31, 69540, 85, 93562, 8, 93883, c1, 212650}; }

// False negatives pinned at zero, fp axes on [0, 0.002].
SetConfig fp_only_config(double alpha = 0.05) {
    SetConfig cfg;
    cfg.alpha = alpha;
    cfg.fp_max = 0.002;
    cfg.grid_fp = 201;
    cfg.fn_max = 0.0;
    cfg.refine_levels = 2;
    return cfg;
}

double round_1sf(double x) {
    const double mag = std::pow(10.0, std::floor(std::log10(x)));
    return std::round(x / mag) * mag;
}

}  // namespace

TEST_CASE("membership of theta = 0 for the worked participants") {
    const SetConfig cfg;
    CHECK_FALSE(in_confidence_set(participant(43), MisclassRates::zero(), cfg));
    CHECK(in_confidence_set(participant(15), MisclassRates::zero(), cfg));
    CHECK_FALSE(in_confidence_set(participant(2), MisclassRates::zero(), cfg));
}

TEST_CASE("negative-control mode") {
    SetConfig cfg;
    cfg.control_kind = ControlKind::Negative;
    const AssayCounts clean{10, 50000, 30, 50000, 0, 20000, 0, 20000};
    CHECK(in_confidence_set(clean, MisclassRates::zero(), cfg));
    CHECK(in_confidence_set(clean, MisclassRates{0.0, 0.3, 0.0, 0.3}, cfg));
    CHECK_FALSE(in_confidence_set(clean, MisclassRates{0.0, 0.1, 0.0, 0.3}, cfg));  // delta0 = 0
    CHECK_FALSE(in_confidence_set(clean, MisclassRates{0.01, 0.0, 0.0, 0.0}, cfg));

    const NuisanceGrid grid = build_grid(clean, cfg);
    REQUIRE(grid.nonempty);
    CHECK(grid.points.front().theta == MisclassRates::zero());
    CHECK(grid.points.front().in_set);

    SetConfig loose = cfg;
    loose.delta0 = 0.2;
    CHECK(in_confidence_set(clean, MisclassRates{0.0, 0.1, 0.0, 0.3}, loose));
}

TEST_CASE("binomial intervals") {
    const Interval w = binomial_interval(0, 100, 0.95, IntervalKind::Wilson);
    CHECK(w.lo == 0.0);
    CHECK(w.hi == doctest::Approx(0.0369948).epsilon(1e-5));
    const Interval cp = binomial_interval(0, 100, 0.95, IntervalKind::ClopperPearson);
    CHECK(cp.hi == doctest::Approx(1.0 - std::pow(0.025, 0.01)).epsilon(1e-9));
    const Interval mid = binomial_interval(50, 100, 0.95, IntervalKind::Wilson);
    CHECK(mid.lo == doctest::Approx(0.40383).epsilon(1e-4));
    CHECK(mid.hi == doctest::Approx(0.59617).epsilon(1e-4));
    CHECK_THROWS(binomial_interval(5, 4, 0.95, IntervalKind::Wilson));
}

TEST_CASE("default fp_max") {
    const AssayCounts c = participant(43);
    CHECK(default_fp_max(c) == doctest::Approx(5.0 * 43.0 / 212650.0 + 10.0 / 93883.0));
    const AssayCounts heavy{1, 10, 1, 10, 500, 1000, 500, 1000};
    CHECK(default_fp_max(heavy) == 0.5);
}

TEST_CASE("config validation") {
    SetConfig cfg;
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SetConfig{};
    cfg.grid_fp = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SetConfig{};
    cfg.fn_max = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("p-value ranges over A(0.05) for the worked participants") {
    const NuisanceGrid g1 = build_grid(participant(43), fp_only_config());
    REQUIRE(g1.nonempty);
    CHECK(g1.inf_p == doctest::Approx(4e-4).epsilon(0.15));
    CHECK(g1.sup_p == doctest::Approx(8.9e-3).epsilon(0.15));

    const NuisanceGrid g2 = build_grid(participant(15), fp_only_config());
    REQUIRE(g2.nonempty);
    CHECK(round_1sf(g2.inf_p) == doctest::Approx(2e-5));
    CHECK(round_1sf(g2.sup_p) == doctest::Approx(6e-4));

    const NuisanceGrid g3 = build_grid(participant(2), fp_only_config());
    REQUIRE(g3.nonempty);
    CHECK(round_1sf(g3.inf_p) == doctest::Approx(1e-5));
    CHECK(round_1sf(g3.sup_p) == doctest::Approx(6e-5));

    for (const auto& pt : g1.points) CHECK(pt.theta.fn0 == 0.0);
}

TEST_CASE("grid invariants") {
    const AssayCounts c = participant(43);
    SetConfig cfg;
    cfg.grid_fp = 41;
    cfg.grid_fn = 6;
    const NuisanceGrid g = build_grid(c, cfg);
    REQUIRE(g.nonempty);
    CHECK(g.config.fp_max.has_value());
    CHECK(*g.config.fp_max == doctest::Approx(default_fp_max(c)));

    const MembershipTest member(c, cfg);
    double sup = 0.0, inf = 1.0;
    for (const auto& pt : g.points) {
        CHECK(pt.theta.fn0 == pt.theta.fn1);
        CHECK(member(pt.theta) == pt.in_set);
        CHECK(in_confidence_set(c, pt.theta, cfg) == pt.in_set);
        if (!pt.in_set) continue;
        CHECK(std::abs(control_z(c, pt.theta)) <= member.critical_value());
        sup = std::max(sup, pt.p_theta);
        inf = std::min(inf, pt.p_theta);
    }
    CHECK(g.sup_p == sup);
    CHECK(g.inf_p == inf);
    CHECK(g.points[g.argmax_index].p_theta == sup);
    CHECK(g.points[g.argmin_index].p_theta == inf);

    const NuisanceGrid again = build_grid(c, cfg);
    REQUIRE(again.points.size() == g.points.size());
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        CHECK(again.points[i].theta == g.points[i].theta);
        CHECK(again.points[i].p_theta == g.points[i].p_theta);
    }
}

TEST_CASE("confidence sets nest as alpha grows") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const AssayCounts c{std::uniform_int_distribution<std::int64_t>(10, 100)(rng), 40000,
                            std::uniform_int_distribution<std::int64_t>(10, 100)(rng), 40000,
                            std::uniform_int_distribution<std::int64_t>(5, 60)(rng), 30000,
                            std::uniform_int_distribution<std::int64_t>(5, 60)(rng), 30000};
        SetConfig wide;
        wide.grid_fp = 31;
        wide.grid_fn = 5;
        wide.refine_levels = 0;
        wide.alpha = 0.01;
        SetConfig narrow = wide;
        narrow.alpha = 0.2;
        const NuisanceGrid a = build_grid(c, wide);
        const NuisanceGrid b = build_grid(c, narrow);
        REQUIRE(a.points.size() == b.points.size());
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            if (b.points[i].in_set) CHECK(a.points[i].in_set);
        }
    }
}

TEST_CASE("refinement only widens the bracketing") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const AssayCounts c{std::uniform_int_distribution<std::int64_t>(10, 100)(rng), 40000,
                            std::uniform_int_distribution<std::int64_t>(10, 200)(rng), 40000,
                            std::uniform_int_distribution<std::int64_t>(5, 60)(rng), 30000,
                            std::uniform_int_distribution<std::int64_t>(5, 60)(rng), 30000};
        SetConfig coarse;
        coarse.grid_fp = 21;
        coarse.grid_fn = 5;
        coarse.refine_levels = 0;
        SetConfig refined = coarse;
        refined.refine_levels = 3;
        const NuisanceGrid a = build_grid(c, coarse);
        const NuisanceGrid b = build_grid(c, refined);
        REQUIRE(a.nonempty == b.nonempty);
        if (!a.nonempty) continue;
        CHECK(b.points.size() > a.points.size());
        CHECK(b.base_point_count == a.points.size());
        CHECK(b.sup_p >= a.sup_p);
        CHECK(b.inf_p <= a.inf_p);
    }
}

TEST_CASE("two false-negative axes honour delta0") {
    SetConfig cfg;
    cfg.grid_fp = 11;
    cfg.grid_fn = 6;
    cfg.refine_levels = 1;
    cfg.delta0 = 0.1;
    const NuisanceGrid g = build_grid(participant(15), cfg, /*assume_equal_fn=*/false);
    bool saw_unequal = false;
    for (const auto& pt : g.points) {
        CHECK(std::abs(pt.theta.fn0 - pt.theta.fn1) <= 0.1 + 1e-12);
        saw_unequal |= pt.theta.fn0 != pt.theta.fn1;
    }
    CHECK(saw_unequal);
    CHECK_FALSE(g.config.assume_equal_fn);
}

TEST_CASE("an incompatible control pair yields an empty set") {
    const AssayCounts c{10, 50000, 20, 50000, 0, 100000, 600, 100000};
    SetConfig cfg;
    cfg.fp_max = 1e-5;
    cfg.grid_fp = 5;
    cfg.grid_fn = 3;
    const NuisanceGrid g = build_grid(c, cfg);
    CHECK_FALSE(g.nonempty);
    CHECK(g.points.size() == g.base_point_count);
}

TEST_CASE("deep refinement keeps extending the bracketing") {
    const AssayCounts c{13, 5000, 21, 5000, 22, 5000, 39, 5000};
    SetConfig cfg;
    cfg.grid_fp = 101;
    cfg.grid_fn = 3;
    double prev_sup = 0.0, prev_inf = 1.0;
    std::size_t prev_points = 0;
    for (int levels = 0; levels <= 8; ++levels) {
        cfg.refine_levels = levels;
        const NuisanceGrid g = build_grid(c, cfg);
        REQUIRE(g.nonempty);
        CHECK(g.sup_p >= prev_sup);
        CHECK(g.inf_p <= prev_inf);
        CHECK(g.points.size() >= prev_points);
        prev_sup = g.sup_p;
        prev_inf = g.inf_p;
        prev_points = g.points.size();
    }
}
