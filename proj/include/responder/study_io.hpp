#pragma once

#include "responder/adjustment.hpp"
#include "responder/debias.hpp"
#include "responder/multiplicity.hpp"
#include "responder/nuisance_set.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace responder::io {

// Malformed study or report input. row() is 1-based counting the header as
// row 1; 0 when the problem is not tied to a row.
class SchemaError : public std::runtime_error {
public:
    SchemaError(const std::string& what, std::size_t row = 0);
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

struct StudyRecord {
    std::string participant_id;
    AssayCounts counts;
    std::optional<ControlKind> control_kind;  // per-row override
    std::string marker;
};

/// Header (exact names, any order): participant_id,n0,N0,n1,N1,c0,C0,c1,C1
/// with optional control_kind and marker columns.
std::vector<StudyRecord> parse_study(std::istream& in, const std::string& source = "<input>");
std::vector<StudyRecord> load_study(const std::string& path);

struct FilterResult {
    std::vector<StudyRecord> kept;
    std::vector<StudyRecord> excluded;
};

inline constexpr std::int64_t kDefaultMinTotal = 10000;

/// Keeps records with min(N0, N1) >= min_total.
FilterResult per_protocol_filter(const std::vector<StudyRecord>& records, std::int64_t min_total = kDefaultMinTotal);

/// Percentage points: 100 * [max(n1/N1 - c1/C1, 0) - max(n0/N0 - c0/C0, 0)].
double background_subtracted_magnitude(const AssayCounts& counts);

struct AnalysisConfig {
    double alpha = 0.05;
    double alpha_prime = 0.005;
    double fdr = 0.05;
    std::int64_t min_total = kDefaultMinTotal;
    ControlKind control_kind = ControlKind::Generic;
    SetConfig grid;  // template; alpha and control kind are overwritten per call

    void validate() const;
};

struct ParticipantReport {
    StudyRecord record;
    ResponderResult result;
    FdrDecision fdr_unadjusted;
    FdrDecision fdr_max_adjusted;
    std::optional<FdrDecision> fdr_min_adjusted;  // absent when p_min is undefined
    double magnitude = 0.0;
};

struct AnalysisReport {
    std::vector<ParticipantReport> participants;  // input order
    std::vector<std::string> excluded_ids;        // failed the per-protocol filter
    std::size_t responders_unadjusted = 0;
    std::size_t responders_max_adjusted = 0;
    std::size_t responders_min_adjusted = 0;
};

class EmptyCohortError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filter, per-participant analysis, then BH separately on each p-value column.
AnalysisReport analyze_study(const std::vector<StudyRecord>& records, const AnalysisConfig& cfg, std::size_t workers);

void write_report_json(std::ostream& os, const AnalysisReport& report);
void write_report_csv(std::ostream& os, const AnalysisReport& report);

struct ReportRow {
    std::string participant_id;
    double p_unadjusted = 1.0;
    double p_max_adjusted = 1.0;
    std::optional<double> p_min_adjusted;
};

std::vector<ReportRow> parse_report_csv(std::istream& in);

/// Grid export: fp0,fn0,fp1,fn1,in_set,p_theta per point.
void write_surface_csv(std::ostream& os, const NuisanceGrid& grid);

/// Comma-separated key=value settings applied onto `cfg`:
/// fp=<points>[:<max>], fn=<points>[:<max>], refine=<n>, alpha=<a>,
/// delta0=<d>, equal_fn=<0|1>. A max of 0 pins that axis at zero.
SetConfig parse_grid_spec(const std::string& spec, SetConfig cfg);

std::string format_double(double x);

}  // namespace responder::io
