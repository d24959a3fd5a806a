#include "responder/simulation.hpp"

#include "responder/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace responder::sim {

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::I: return "I";
        case Scenario::II: return "II";
        case Scenario::III: return "III";
        case Scenario::IV: return "IV";
    }
    return "?";
}

Scenario parse_scenario(const std::string& text) {
    if (text == "I" || text == "1") return Scenario::I;
    if (text == "II" || text == "2") return Scenario::II;
    if (text == "III" || text == "3") return Scenario::III;
    if (text == "IV" || text == "4") return Scenario::IV;
    throw std::invalid_argument("unknown scenario '" + text + "' (expected I|II|III|IV)");
}

std::optional<double> paired_control_proportion(std::int64_t n_control) {
    switch (n_control) {
        case 1000: return 0.03;
        case 10000: return 0.005;
        case 50000: return 0.002;
        case 100000: return 0.001;
        default: return std::nullopt;
    }
}

SetConfig default_simulation_grid() {
    SetConfig g;
    g.grid_fp = 51;
    g.grid_fn = 21;
    g.refine_levels = 1;
    g.assume_equal_fn = true;
    g.delta0 = 0.0;
    return g;
}

double SimulationConfig::control_proportion() const {
    if (p_control) return *p_control;
    if (auto paired = paired_control_proportion(n_control)) return *paired;
    throw std::invalid_argument("no paired control proportion for n_control=" + std::to_string(n_control) +
                                "; set p_control explicitly");
}

void SimulationConfig::validate() const {
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
    if (n_primary < 1 || n_control < 1) throw std::invalid_argument("sample sizes must be positive");
    const double pc = control_proportion();
    if (!(pc >= 0.0 && pc <= 1.0)) throw std::invalid_argument("p_control must lie in [0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(alpha_prime > 0.0 && alpha_prime < alpha)) throw std::invalid_argument("alpha_prime must lie in (0, alpha)");
    if (!(responder_share >= 0.0 && responder_share <= 1.0)) throw std::invalid_argument("responder_share must lie in [0, 1]");
    grid.validate();
}

Rng replication_rng(std::uint64_t seed, std::uint64_t replication) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32),
                      0x5eedu};
    return Rng(seq);
}

double sample_beta(Rng& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

namespace {

std::int64_t sample_binomial(Rng& rng, std::int64_t n, double p) {
    std::binomial_distribution<std::int64_t> dist(n, std::clamp(p, 0.0, 1.0));
    return dist(rng);
}

// Expected observed-positive rate under misclassification.
double contaminated(double p_true, double fp, double fn) { return p_true * (1.0 - fn) + (1.0 - p_true) * fp; }

}  // namespace

Instance draw_instance(const SimulationConfig& cfg, Rng& rng) {
    Instance inst;
    InstanceTruth& t = inst.truth;

    std::bernoulli_distribution responder(cfg.responder_share);
    t.responder = responder(rng);
    t.p_t0 = sample_beta(rng, 1.0, 500.0);
    t.p_t1 = t.responder ? std::min(cfg.gamma * t.p_t0, 1.0) : t.p_t0;

    const double fn = sample_beta(rng, 1.0, 5.0);
    t.theta.fn0 = fn;
    t.theta.fn1 = fn;
    switch (cfg.scenario) {
        case Scenario::I:
            t.theta.fp0 = sample_beta(rng, 1.0, 2000.0);
            t.theta.fp1 = t.theta.fp0;
            break;
        case Scenario::II:
            t.theta.fp0 = sample_beta(rng, 1.0, 2000.0);
            t.theta.fp1 = sample_beta(rng, 2.0, 2000.0);
            break;
        case Scenario::III:
            t.theta.fp0 = sample_beta(rng, 3.0, 2000.0);
            t.theta.fp1 = sample_beta(rng, 6.0, 2000.0);
            break;
        case Scenario::IV:
            t.theta.fp0 = sample_beta(rng, 1.0, 2000.0);
            t.theta.fp1 = sample_beta(rng, 5.0, 2000.0);
            break;
    }

    const double pc = cfg.control_proportion();
    AssayCounts& c = inst.counts;
    c.N0 = c.N1 = cfg.n_primary;
    c.C0 = c.C1 = cfg.n_control;
    c.n0 = sample_binomial(rng, c.N0, contaminated(t.p_t0, t.theta.fp0, t.theta.fn0));
    c.n1 = sample_binomial(rng, c.N1, contaminated(t.p_t1, t.theta.fp1, t.theta.fn1));
    c.c0 = sample_binomial(rng, c.C0, contaminated(pc, t.theta.fp0, t.theta.fn0));
    c.c1 = sample_binomial(rng, c.C1, contaminated(pc, t.theta.fp1, t.theta.fn1));
    return inst;
}

double true_oracle_p(const AssayCounts& counts, const MisclassRates& theta_true) {
    return p_value_at(counts, theta_true);
}

ReplicationOutcome run_replication(const SimulationConfig& cfg, std::uint64_t replication) {
    Rng rng = replication_rng(cfg.seed, replication);
    ReplicationOutcome out;
    out.instance = draw_instance(cfg, rng);
    const AssayCounts& counts = out.instance.counts;

    out.p_unadjusted = unadjusted_p(counts);
    out.p_truth = true_oracle_p(counts, out.instance.truth.theta);

    SetConfig max_cfg = cfg.grid;
    max_cfg.alpha = cfg.alpha_prime;
    out.p_max_adjusted = max_adjusted_p(counts, max_cfg).p_value;

    SetConfig min_cfg = cfg.grid;
    min_cfg.alpha = cfg.alpha;
    out.p_min_adjusted = min_adjusted_from_grid(build_grid(counts, min_cfg), out.p_unadjusted).p_value;
    return out;
}

std::vector<ReplicationOutcome> run_replications(const SimulationConfig& cfg, std::size_t workers) {
    cfg.validate();
    std::vector<ReplicationOutcome> outcomes(cfg.reps);
    parallel_for(
        cfg.reps, [&](std::size_t i) { outcomes[i] = run_replication(cfg, i); }, workers);
    return outcomes;
}

namespace {

void finish(MethodSummary& m, std::size_t reps, std::size_t n_null, std::size_t n_responder) {
    auto pct = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
    };
    const std::size_t defined = reps - m.undefined;
    m.type1_rate = pct(m.null_rejections, defined);
    m.power = pct(m.responder_rejections, defined);
    m.type1_conditional = pct(m.null_rejections, n_null);
    m.power_conditional = pct(m.responder_rejections, n_responder);
}

}  // namespace

SimulationSummary summarize(const SimulationConfig& cfg, std::span<const ReplicationOutcome> outcomes) {
    SimulationSummary s;
    s.config = cfg;
    s.reps_done = outcomes.size();
    std::size_t min_undef_null = 0;
    std::size_t min_undef_resp = 0;

    auto tally = [&](MethodSummary& m, bool responder, double p) {
        if (p <= cfg.alpha) (responder ? m.responder_rejections : m.null_rejections)++;
    };
    for (const auto& o : outcomes) {
        const bool r = o.instance.truth.responder;
        (r ? s.n_responder : s.n_null)++;
        tally(s.unadjusted, r, o.p_unadjusted);
        tally(s.max_adjusted, r, o.p_max_adjusted);
        tally(s.true_oracle, r, o.p_truth);
        if (o.p_min_adjusted) {
            tally(s.min_adjusted, r, *o.p_min_adjusted);
        } else {
            s.min_adjusted.undefined++;
            (r ? min_undef_resp : min_undef_null)++;
        }
    }
    finish(s.unadjusted, s.reps_done, s.n_null, s.n_responder);
    finish(s.max_adjusted, s.reps_done, s.n_null, s.n_responder);
    finish(s.true_oracle, s.reps_done, s.n_null, s.n_responder);
    finish(s.min_adjusted, s.reps_done, s.n_null - min_undef_null, s.n_responder - min_undef_resp);
    return s;
}

SimulationSummary run_cell(const SimulationConfig& cfg, std::size_t workers) {
    const auto outcomes = run_replications(cfg, workers);
    return summarize(cfg, outcomes);
}

void write_summary_csv_header(std::ostream& os) {
    os << "scenario,n_control,gamma,reps,seed,alpha,alpha_prime,"
          "unadj_type1,unadj_power,max_type1,max_power,min_type1,min_power,true_power,"
          "true_type1,min_undefined,n_null,n_responder\n";
}

void write_summary_csv_row(std::ostream& os, const SimulationSummary& s) {
    char buf[512];
    const auto& c = s.config;
    std::snprintf(buf, sizeof buf,
                  "%s,%lld,%g,%zu,%llu,%g,%g,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%zu,%zu,%zu\n",
                  to_string(c.scenario).c_str(), static_cast<long long>(c.n_control), c.gamma, s.reps_done,
                  static_cast<unsigned long long>(c.seed), c.alpha, c.alpha_prime, s.unadjusted.type1_rate,
                  s.unadjusted.power, s.max_adjusted.type1_rate, s.max_adjusted.power, s.min_adjusted.type1_rate,
                  s.min_adjusted.power, s.true_oracle.power, s.true_oracle.type1_rate, s.min_adjusted.undefined,
                  s.n_null, s.n_responder);
    os << buf;
}

}  // namespace responder::sim
