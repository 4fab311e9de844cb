#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace profluct {

/// One (company, year) observation. Revenue and profit are in the panel's
/// declared currency unit; profit may be negative or zero, revenue must be
/// strictly positive.
struct CompanyYearRecord {
    std::string company_id;
    int year = 0;
    double revenue = 0.0;
    double profit = 0.0;
};

/// Immutable after construction; safe for concurrent reads.
struct Panel {
    std::vector<CompanyYearRecord> records;
    int year_min = 0;
    int year_max = 0;
    std::string unit_label = "B";
};

enum class RejectReason {
    malformed_row,
    bad_numeric,
    missing_field,
    nonpositive_revenue,
    duplicate_key,
    year_out_of_range,
};

const char* to_string(RejectReason reason);

struct RejectedRow {
    std::size_t line_number = 0;  // 1-based, header is line 1
    std::string content;
    RejectReason reason = RejectReason::malformed_row;
};

struct RejectionReport {
    std::vector<RejectedRow> rows;
    std::map<RejectReason, std::size_t> counts;

    std::size_t total() const { return rows.size(); }
};

struct IngestConfig {
    char delimiter = ',';
    std::string company_column = "company";
    std::string year_column = "year";
    std::string revenue_column = "revenue";
    std::string profit_column = "profit";
    std::string unit_label = "B";
    // When unset, the panel's year range is taken from the retained rows.
    std::optional<int> year_min;
    std::optional<int> year_max;
};

/// Parse delimiter-separated text with a header row. Throws
/// std::runtime_error on a malformed header (missing required column);
/// everything else degrades to per-row rejection.
std::pair<Panel, RejectionReport> ingest(std::istream& in, const IngestConfig& config);

struct YearlyMean {
    int year = 0;
    double mean_revenue = 0.0;  // R0
    double mean_profit = 0.0;   // P0
    std::size_t n = 0;
};

/// Per-year arithmetic means over all companies present in that year,
/// ascending by year. Throws std::invalid_argument on an empty panel.
std::vector<YearlyMean> yearly_means(const Panel& panel);

/// Canonical serialization: same tabular format ingest reads, rows sorted
/// by (company, year). Round-trips exactly through ingest.
void write_panel_csv(std::ostream& out, const Panel& panel);

/// Sidecar metadata block (unit label, year range, rejection counts) as JSON.
void write_panel_metadata(std::ostream& out, const Panel& panel,
                          const RejectionReport& report);

}  // namespace profluct
