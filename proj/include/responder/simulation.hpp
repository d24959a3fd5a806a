#pragma once

#include "responder/adjustment.hpp"
#include "responder/debias.hpp"
#include "responder/nuisance_set.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace responder::sim {

enum class Scenario { I, II, III, IV };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& text);

inline constexpr std::uint64_t kDefaultSeed = 20240101;

/// Control-sample true positive proportion paired with each control size:
/// 1000 -> 0.03, 10000 -> 0.005, 50000 -> 0.002, 100000 -> 0.001.
std::optional<double> paired_control_proportion(std::int64_t n_control);

/// Grid used inside the simulation: shared false-negative axis, coarser
/// than the interactive default.
SetConfig default_simulation_grid();

struct SimulationConfig {
    Scenario scenario = Scenario::I;
    double gamma = 4.0;
    std::int64_t n_primary = 50000;
    std::int64_t n_control = 100000;
    std::optional<double> p_control;  // unset: paired_control_proportion(n_control)
    std::size_t reps = 2000;
    std::uint64_t seed = kDefaultSeed;
    double alpha = 0.05;
    double alpha_prime = 0.005;
    double responder_share = 0.5;  // P(R = 1); 0 generates null participants only
    SetConfig grid = default_simulation_grid();

    double control_proportion() const;
    void validate() const;
};

struct InstanceTruth {
    bool responder = false;
    MisclassRates theta;
    double p_t0 = 0.0;
    double p_t1 = 0.0;
};

struct Instance {
    AssayCounts counts;
    InstanceTruth truth;
};

using Rng = std::mt19937_64;

/// Independent substream for one replication.
Rng replication_rng(std::uint64_t seed, std::uint64_t replication);

double sample_beta(Rng& rng, double a, double b);

Instance draw_instance(const SimulationConfig& cfg, Rng& rng);

/// p-value evaluated at the generating misclassification rates.
double true_oracle_p(const AssayCounts& counts, const MisclassRates& theta_true);

struct ReplicationOutcome {
    Instance instance;
    double p_unadjusted = 1.0;
    double p_max_adjusted = 1.0;
    std::optional<double> p_min_adjusted;
    double p_truth = 1.0;
};

ReplicationOutcome run_replication(const SimulationConfig& cfg, std::uint64_t replication);

/// All replications, in replication order.
std::vector<ReplicationOutcome> run_replications(const SimulationConfig& cfg, std::size_t workers);

struct MethodSummary {
    std::size_t null_rejections = 0;
    std::size_t responder_rejections = 0;
    std::size_t undefined = 0;        // replications without a p-value (min-adjusted only)
    // Percentage of all (defined) replications, not of the truth class.
    double type1_rate = 0.0;
    double power = 0.0;
    // Percentage among realized non-responders / responders.
    double type1_conditional = 0.0;
    double power_conditional = 0.0;
};

struct SimulationSummary {
    SimulationConfig config;
    std::size_t reps_done = 0;
    std::size_t n_null = 0;
    std::size_t n_responder = 0;
    MethodSummary unadjusted;
    MethodSummary max_adjusted;
    MethodSummary min_adjusted;
    MethodSummary true_oracle;
};

SimulationSummary summarize(const SimulationConfig& cfg, std::span<const ReplicationOutcome> outcomes);

SimulationSummary run_cell(const SimulationConfig& cfg, std::size_t workers);

/// Summary CSV: one row per cell, percentages.
void write_summary_csv_header(std::ostream& os);
void write_summary_csv_row(std::ostream& os, const SimulationSummary& s);

}  // namespace responder::sim
