#include "responder/study_io.hpp"

#include "responder/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace responder::io {

namespace {

std::string with_row(const std::string& what, std::size_t row) {
    return row == 0 ? what : "row " + std::to_string(row) + ": " + what;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                             : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::int64_t parse_count(const std::string& text, const std::string& column, std::size_t row) {
    std::int64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw SchemaError("column '" + column + "' is not an integer: '" + text + "'", row);
    }
    return value;
}

double parse_real(const std::string& text, const std::string& column, std::size_t row) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw SchemaError("column '" + column + "' is not a number: '" + text + "'", row);
    }
}

const std::vector<std::string> kCountColumns = {"n0", "N0", "n1", "N1", "c0", "C0", "c1", "C1"};

}  // namespace

SchemaError::SchemaError(const std::string& what, std::size_t row)
    : std::runtime_error(with_row(what, row)), row_(row) {}

std::vector<StudyRecord> parse_study(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw SchemaError(source + ": missing header");

    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!col.emplace(header[i], i).second) throw SchemaError("duplicate column '" + header[i] + "'", row);
    }
    for (const auto& required : {std::string("participant_id")}) {
        if (!col.count(required)) throw SchemaError(source + ": missing column '" + required + "'", row);
    }
    for (const auto& name : kCountColumns) {
        if (!col.count(name)) throw SchemaError(source + ": missing column '" + name + "'", row);
    }
    const auto kind_col = col.find("control_kind");
    const auto marker_col = col.find("marker");

    std::vector<StudyRecord> records;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw SchemaError("expected " + std::to_string(header.size()) + " fields, found " +
                                  std::to_string(fields.size()),
                              row);
        }
        StudyRecord rec;
        rec.participant_id = fields[col.at("participant_id")];
        if (rec.participant_id.empty()) throw SchemaError("empty participant_id", row);
        if (!seen.insert(rec.participant_id).second) {
            throw SchemaError("duplicate participant_id '" + rec.participant_id + "'", row);
        }
        std::int64_t v[8];
        for (std::size_t i = 0; i < kCountColumns.size(); ++i) {
            v[i] = parse_count(fields[col.at(kCountColumns[i])], kCountColumns[i], row);
        }
        rec.counts = AssayCounts{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
        try {
            rec.counts.validate();
        } catch (const InvalidCountsError& e) {
            throw SchemaError(e.what(), row);
        }
        if (kind_col != col.end() && !fields[kind_col->second].empty()) {
            try {
                rec.control_kind = parse_control_kind(fields[kind_col->second]);
            } catch (const std::invalid_argument& e) {
                throw SchemaError(e.what(), row);
            }
        }
        if (marker_col != col.end()) rec.marker = fields[marker_col->second];
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<StudyRecord> load_study(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open '" + path + "'");
    return parse_study(in, path);
}

FilterResult per_protocol_filter(const std::vector<StudyRecord>& records, std::int64_t min_total) {
    if (min_total < 0) throw std::invalid_argument("min_total must be non-negative");
    FilterResult out;
    for (const auto& r : records) {
        (std::min(r.counts.N0, r.counts.N1) >= min_total ? out.kept : out.excluded).push_back(r);
    }
    return out;
}

double background_subtracted_magnitude(const AssayCounts& counts) {
    const double t0 = std::max(counts.primary_rate0() - counts.control_rate0(), 0.0);
    const double t1 = std::max(counts.primary_rate1() - counts.control_rate1(), 0.0);
    return 100.0 * (t1 - t0);
}

void AnalysisConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(alpha_prime > 0.0 && alpha_prime < alpha)) throw std::invalid_argument("alpha_prime must lie in (0, alpha)");
    if (!(fdr > 0.0 && fdr < 1.0)) throw std::invalid_argument("fdr must lie in (0, 1)");
    if (min_total < 0) throw std::invalid_argument("min_total must be non-negative");
    grid.validate();
}

AnalysisReport analyze_study(const std::vector<StudyRecord>& records, const AnalysisConfig& cfg, std::size_t workers) {
    cfg.validate();
    const FilterResult filtered = per_protocol_filter(records, cfg.min_total);
    AnalysisReport report;
    for (const auto& r : filtered.excluded) report.excluded_ids.push_back(r.participant_id);
    if (filtered.kept.empty()) throw EmptyCohortError("no participants pass the per-protocol filter");

    const auto& kept = filtered.kept;
    report.participants.resize(kept.size());
    parallel_for(
        kept.size(),
        [&](std::size_t i) {
            const StudyRecord& rec = kept[i];
            SetConfig max_cfg = cfg.grid;
            max_cfg.control_kind = rec.control_kind.value_or(cfg.control_kind);
            max_cfg.alpha = cfg.alpha_prime;
            SetConfig min_cfg = max_cfg;
            min_cfg.alpha = cfg.alpha;
            ParticipantReport& out = report.participants[i];
            out.record = rec;
            out.result = analyze_participant(rec.counts, max_cfg, min_cfg);
            out.magnitude = background_subtracted_magnitude(rec.counts);
        },
        workers);

    std::vector<double> p_un, p_max, p_min;
    std::vector<std::size_t> min_owner;
    for (std::size_t i = 0; i < report.participants.size(); ++i) {
        const auto& res = report.participants[i].result;
        p_un.push_back(res.p_unadjusted);
        p_max.push_back(res.p_max_adjusted);
        if (res.p_min_adjusted) {
            p_min.push_back(*res.p_min_adjusted);
            min_owner.push_back(i);
        }
    }
    const auto bh_un = bh_adjust(p_un, cfg.fdr);
    const auto bh_max = bh_adjust(p_max, cfg.fdr);
    const auto bh_min = bh_adjust(p_min, cfg.fdr);
    for (std::size_t i = 0; i < report.participants.size(); ++i) {
        auto& p = report.participants[i];
        p.fdr_unadjusted = bh_un[i];
        p.fdr_max_adjusted = bh_max[i];
        report.responders_unadjusted += bh_un[i].rejected;
        report.responders_max_adjusted += bh_max[i].rejected;
    }
    for (std::size_t j = 0; j < bh_min.size(); ++j) {
        FdrDecision d = bh_min[j];
        d.index = min_owner[j];
        report.participants[min_owner[j]].fdr_min_adjusted = d;
        report.responders_min_adjusted += d.rejected;
    }
    return report;
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

void write_report_json(std::ostream& os, const AnalysisReport& report) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json rows = json::array();
    for (const auto& p : report.participants) {
        const auto& r = p.result;
        const auto& c = p.record.counts;
        json row;
        row["participant_id"] = p.record.participant_id;
        if (!p.record.marker.empty()) row["marker"] = p.record.marker;
        row["counts"] = {{"n0", c.n0}, {"N0", c.N0}, {"n1", c.n1}, {"N1", c.N1},
                         {"c0", c.c0}, {"C0", c.C0}, {"c1", c.c1}, {"C1", c.C1}};
        row["p_unadjusted"] = r.p_unadjusted;
        row["p_max_adjusted"] = r.p_max_adjusted;
        row["p_min_adjusted"] = opt(r.p_min_adjusted);
        row["alpha_prime"] = r.alpha_prime;
        row["alpha"] = r.alpha;
        row["set_nonempty"] = r.set_nonempty;
        row["p_range"] = r.p_range ? json::array({r.p_range->first, r.p_range->second}) : json(nullptr);
        row["unadjusted_in_set"] = r.unadjusted_in_set;
        if (!r.diagnostic.empty()) row["diagnostic"] = r.diagnostic;
        row["bh"] = {{"unadjusted", p.fdr_unadjusted.p_bh},
                     {"max_adjusted", p.fdr_max_adjusted.p_bh},
                     {"min_adjusted", p.fdr_min_adjusted ? json(p.fdr_min_adjusted->p_bh) : json(nullptr)}};
        row["responder"] = {{"unadjusted", p.fdr_unadjusted.rejected},
                            {"max_adjusted", p.fdr_max_adjusted.rejected},
                            {"min_adjusted", p.fdr_min_adjusted && p.fdr_min_adjusted->rejected}};
        row["background_subtracted_magnitude_pct"] = p.magnitude;
        rows.push_back(std::move(row));
    }
    os << rows.dump(2) << '\n';
}

void write_report_csv(std::ostream& os, const AnalysisReport& report) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
    os << "participant_id,marker,n0,N0,n1,N1,c0,C0,c1,C1,p_unadjusted,p_max_adjusted,p_min_adjusted,"
          "inf_p,sup_p,unadjusted_in_set,set_nonempty,bh_unadjusted,bh_max_adjusted,bh_min_adjusted,"
          "responder_unadjusted,responder_max_adjusted,responder_min_adjusted,magnitude_pct\n";
    for (const auto& p : report.participants) {
        const auto& r = p.result;
        const auto& c = p.record.counts;
        const std::optional<double> lo = r.p_range ? std::optional<double>(r.p_range->first) : std::nullopt;
        const std::optional<double> hi = r.p_range ? std::optional<double>(r.p_range->second) : std::nullopt;
        const std::optional<double> bh_min =
            p.fdr_min_adjusted ? std::optional<double>(p.fdr_min_adjusted->p_bh) : std::nullopt;
        os << p.record.participant_id << ',' << p.record.marker << ',' << c.n0 << ',' << c.N0 << ',' << c.n1 << ','
           << c.N1 << ',' << c.c0 << ',' << c.C0 << ',' << c.c1 << ',' << c.C1 << ',' << format_double(r.p_unadjusted)
           << ',' << format_double(r.p_max_adjusted) << ',' << opt(r.p_min_adjusted) << ',' << opt(lo) << ','
           << opt(hi) << ',' << int(r.unadjusted_in_set) << ',' << int(r.set_nonempty) << ','
           << format_double(p.fdr_unadjusted.p_bh) << ',' << format_double(p.fdr_max_adjusted.p_bh) << ','
           << opt(bh_min) << ',' << int(p.fdr_unadjusted.rejected) << ',' << int(p.fdr_max_adjusted.rejected) << ','
           << int(p.fdr_min_adjusted && p.fdr_min_adjusted->rejected) << ',' << format_double(p.magnitude) << '\n';
    }
}

std::vector<ReportRow> parse_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty report");
    const auto header = split_csv_line(line);
    auto index_of = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("report missing column '" + name + "'", 1);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t id = index_of("participant_id");
    const std::size_t pu = index_of("p_unadjusted");
    const std::size_t pmax = index_of("p_max_adjusted");
    const std::size_t pmin = index_of("p_min_adjusted");

    std::vector<ReportRow> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw SchemaError("field count mismatch", row);
        ReportRow r;
        r.participant_id = f[id];
        r.p_unadjusted = parse_real(f[pu], "p_unadjusted", row);
        r.p_max_adjusted = parse_real(f[pmax], "p_max_adjusted", row);
        if (f[pmin] != "NA") r.p_min_adjusted = parse_real(f[pmin], "p_min_adjusted", row);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_surface_csv(std::ostream& os, const NuisanceGrid& grid) {
    os << "fp0,fn0,fp1,fn1,in_set,p_theta\n";
    for (const auto& pt : grid.points) {
        const auto& t = pt.theta;
        os << format_double(t.fp0) << ',' << format_double(t.fn0) << ',' << format_double(t.fp1) << ','
           << format_double(t.fn1) << ',' << int(pt.in_set) << ',' << format_double(pt.p_theta) << '\n';
    }
}

SetConfig parse_grid_spec(const std::string& spec, SetConfig cfg) {
    std::stringstream ss(spec);
    std::string item;
    auto parse_axis = [](const std::string& value, int& points, double& upper) {
        const auto colon = value.find(':');
        points = std::stoi(value.substr(0, colon));
        if (colon != std::string::npos) upper = std::stod(value.substr(colon + 1));
    };
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("grid spec item '" + item + "' lacks '='");
        const std::string key = trim(item.substr(0, eq));
        const std::string value = trim(item.substr(eq + 1));
        static const std::set<std::string> known = {"fp", "fn", "refine", "alpha", "delta0", "equal_fn"};
        if (!known.count(key)) throw std::invalid_argument("unknown grid spec key '" + key + "'");
        try {
            if (key == "fp") {
                double upper = cfg.fp_max.value_or(-1.0);
                parse_axis(value, cfg.grid_fp, upper);
                if (upper >= 0.0) cfg.fp_max = upper;
            } else if (key == "fn") {
                parse_axis(value, cfg.grid_fn, cfg.fn_max);
            } else if (key == "refine") {
                cfg.refine_levels = std::stoi(value);
            } else if (key == "alpha") {
                cfg.alpha = std::stod(value);
            } else if (key == "delta0") {
                cfg.delta0 = std::stod(value);
            } else {
                cfg.assume_equal_fn = value != "0";
            }
        } catch (const std::logic_error&) {
            throw std::invalid_argument("bad grid spec value for '" + key + "': '" + value + "'");
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace responder::io
