// Batch front-end: analyze study count tables, run Monte Carlo cells, and
// export p-value surfaces over the misclassification-rate grid.

#include "responder/parallel.hpp"
#include "responder/simulation.hpp"
#include "responder/study_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitEmptyCohort = 3;

// Writes to `path`, or standard output for "" / "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string extension_of(const std::string& path) {
    return std::filesystem::path(path).extension().string();
}

struct AnalyzeOptions {
    std::string input;
    std::string out;
    std::string format;
    std::string control_kind = "generic";
    std::string grid_spec;
    responder::io::AnalysisConfig cfg;
};

int run_analyze(const AnalyzeOptions& opt) {
    using namespace responder;
    io::AnalysisConfig cfg = opt.cfg;
    cfg.control_kind = parse_control_kind(opt.control_kind);
    if (!opt.grid_spec.empty()) cfg.grid = io::parse_grid_spec(opt.grid_spec, cfg.grid);

    const auto records = io::load_study(opt.input);
    const auto filtered = io::per_protocol_filter(records, cfg.min_total);
    for (const auto& r : filtered.excluded) {
        std::cerr << "warning: excluding '" << r.participant_id << "' (min(N0, N1) < " << cfg.min_total << ")\n";
    }
    if (filtered.kept.empty()) {
        std::cerr << "error: no participants pass the per-protocol filter\n";
        return kExitEmptyCohort;
    }

    const auto report = io::analyze_study(records, cfg, default_worker_count());
    std::string format = opt.format;
    if (format.empty()) format = extension_of(opt.out) == ".csv" ? "csv" : "json";
    Output out(opt.out);
    if (format == "csv") {
        io::write_report_csv(out.stream(), report);
    } else {
        io::write_report_json(out.stream(), report);
    }
    std::cerr << "participants analyzed: " << report.participants.size()
              << "; responders at FDR " << cfg.fdr << " (unadjusted/max/min): " << report.responders_unadjusted << '/'
              << report.responders_max_adjusted << '/' << report.responders_min_adjusted << '\n';
    return 0;
}

struct SimulateOptions {
    std::string scenario = "I";
    std::string out;
    std::string grid_spec;
    responder::sim::SimulationConfig cfg;
};

int run_simulate(const SimulateOptions& opt) {
    using namespace responder;
    sim::SimulationConfig cfg = opt.cfg;
    cfg.scenario = sim::parse_scenario(opt.scenario);
    if (!opt.grid_spec.empty()) cfg.grid = io::parse_grid_spec(opt.grid_spec, cfg.grid);
    const auto summary = sim::run_cell(cfg, default_worker_count());
    Output out(opt.out);
    sim::write_summary_csv_header(out.stream());
    sim::write_summary_csv_row(out.stream(), summary);
    return 0;
}

struct SurfaceOptions {
    std::string input;
    std::string participant;
    std::string grid_spec;
    std::string control_kind = "generic";
    std::string out;
    double alpha = 0.05;
};

int run_surface(const SurfaceOptions& opt) {
    using namespace responder;
    const auto records = io::load_study(opt.input);
    const auto it = std::find_if(records.begin(), records.end(),
                                 [&](const io::StudyRecord& r) { return r.participant_id == opt.participant; });
    if (it == records.end()) {
        std::cerr << "error: participant '" << opt.participant << "' not found in " << opt.input << '\n';
        return kExitSchema;
    }
    SetConfig cfg;
    cfg.alpha = opt.alpha;
    cfg.control_kind = it->control_kind.value_or(parse_control_kind(opt.control_kind));
    if (!opt.grid_spec.empty()) cfg = io::parse_grid_spec(opt.grid_spec, cfg);
    const auto grid = build_grid(it->counts, cfg);
    Output out(opt.out);
    io::write_surface_csv(out.stream(), grid);
    if (grid.nonempty) {
        std::cerr << "points: " << grid.points.size() << "; in-set p range [" << grid.inf_p << ", " << grid.sup_p
                  << "]\n";
    } else {
        std::cerr << "points: " << grid.points.size() << "; confidence set is empty\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vaccine responder calls from paired pre/post single-cell counts with control-sample adjustment"};
    app.require_subcommand(1);

    AnalyzeOptions an;
    auto* analyze = app.add_subcommand("analyze", "Per-participant unadjusted, max- and min-adjusted p-values with BH");
    analyze->add_option("--input", an.input, "Study CSV")->required()->check(CLI::ExistingFile);
    analyze->add_option("--alpha", an.cfg.alpha, "Decision level (min-adjusted set level)")->capture_default_str();
    analyze->add_option("--alpha-prime", an.cfg.alpha_prime, "Set level for the max-adjusted p-value")
        ->capture_default_str();
    analyze->add_option("--fdr", an.cfg.fdr, "Benjamini-Hochberg FDR level")->capture_default_str();
    analyze->add_option("--min-total", an.cfg.min_total, "Per-protocol minimum of N0 and N1")->capture_default_str();
    analyze->add_option("--control-kind", an.control_kind, "generic|negative")
        ->check(CLI::IsMember({"generic", "negative"}))
        ->capture_default_str();
    analyze->add_option("--grid", an.grid_spec, "Grid spec, e.g. fp=101,fn=21:0.5,refine=2");
    analyze->add_option("--out", an.out, "Report path (.json or .csv); '-' for stdout");
    analyze->add_option("--format", an.format, "json|csv (default from --out extension)")
        ->check(CLI::IsMember({"json", "csv"}));

    SimulateOptions sm;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo type-I error and power for one parameter cell");
    simulate->add_option("--scenario", sm.scenario, "I|II|III|IV")->capture_default_str();
    simulate->add_option("--gamma", sm.cfg.gamma, "Responder effect multiplier")->capture_default_str();
    simulate->add_option("--n-control", sm.cfg.n_control, "Control sample size N'0 = N'1")->capture_default_str();
    simulate->add_option("--n-primary", sm.cfg.n_primary, "Primary sample size N0 = N1")->capture_default_str();
    simulate->add_option("--p-control", sm.cfg.p_control, "Control true positive proportion (default: paired)");
    simulate->add_option("--reps", sm.cfg.reps, "Replications")->capture_default_str();
    simulate->add_option("--seed", sm.cfg.seed, "RNG seed")->capture_default_str();
    simulate->add_option("--alpha", sm.cfg.alpha, "Decision level")->capture_default_str();
    simulate->add_option("--alpha-prime", sm.cfg.alpha_prime, "Set level for the max-adjusted p-value")
        ->capture_default_str();
    simulate->add_option("--grid", sm.grid_spec, "Grid spec override");
    simulate->add_option("--out", sm.out, "Output CSV; '-' for stdout");

    SurfaceOptions sf;
    auto* surface = app.add_subcommand("surface", "Export p_theta and set membership over the grid for one participant");
    surface->add_option("--input", sf.input, "Study CSV")->required()->check(CLI::ExistingFile);
    surface->add_option("--participant", sf.participant, "participant_id")->required();
    surface->add_option("--grid", sf.grid_spec, "Grid spec, e.g. fp=201:0.002,fn=2:0,refine=2");
    surface->add_option("--alpha", sf.alpha, "Set level")->capture_default_str();
    surface->add_option("--control-kind", sf.control_kind, "generic|negative")
        ->check(CLI::IsMember({"generic", "negative"}))
        ->capture_default_str();
    surface->add_option("--out", sf.out, "Output CSV; '-' for stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return run_analyze(an);
        if (*simulate) return run_simulate(sm);
        if (*surface) return run_surface(sf);
    } catch (const responder::io::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const responder::io::EmptyCohortError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitEmptyCohort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
