#include "profluct/panel.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace profluct {

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::malformed_row: return "malformed_row";
        case RejectReason::bad_numeric: return "bad_numeric";
        case RejectReason::missing_field: return "missing_field";
        case RejectReason::nonpositive_revenue: return "nonpositive_revenue";
        case RejectReason::duplicate_key: return "duplicate_key";
        case RejectReason::year_out_of_range: return "year_out_of_range";
    }
    return "unknown";
}

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_int(const std::string& s, int& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

std::pair<Panel, RejectionReport> ingest(std::istream& in, const IngestConfig& config) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ingest: empty input");

    const auto header = split(line, config.delimiter);
    auto column_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return i;
        throw std::runtime_error("ingest: header missing column '" + name + "'");
    };
    const std::size_t col_company = column_of(config.company_column);
    const std::size_t col_year = column_of(config.year_column);
    const std::size_t col_revenue = column_of(config.revenue_column);
    const std::size_t col_profit = column_of(config.profit_column);

    Panel panel;
    panel.unit_label = config.unit_label;
    RejectionReport report;
    std::set<std::pair<std::string, int>> seen;

    auto reject = [&](std::size_t line_no, const std::string& content, RejectReason why) {
        report.rows.push_back({line_no, content, why});
        ++report.counts[why];
    };

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line, config.delimiter);
        if (fields.size() < header.size()) {
            reject(line_no, line, RejectReason::malformed_row);
            continue;
        }
        const std::string company = trim(fields[col_company]);
        if (company.empty() || trim(fields[col_profit]).empty()) {
            reject(line_no, line, RejectReason::missing_field);
            continue;
        }
        int year = 0;
        double revenue = 0.0, profit = 0.0;
        if (!parse_int(fields[col_year], year) ||
            !parse_double(fields[col_revenue], revenue) ||
            !parse_double(fields[col_profit], profit)) {
            reject(line_no, line, RejectReason::bad_numeric);
            continue;
        }
        if (revenue <= 0.0) {
            reject(line_no, line, RejectReason::nonpositive_revenue);
            continue;
        }
        if ((config.year_min && year < *config.year_min) ||
            (config.year_max && year > *config.year_max)) {
            reject(line_no, line, RejectReason::year_out_of_range);
            continue;
        }
        if (!seen.emplace(company, year).second) {
            reject(line_no, line, RejectReason::duplicate_key);
            continue;
        }
        panel.records.push_back({company, year, revenue, profit});
    }

    if (!panel.records.empty()) {
        auto [lo, hi] = std::minmax_element(
            panel.records.begin(), panel.records.end(),
            [](const auto& a, const auto& b) { return a.year < b.year; });
        panel.year_min = config.year_min.value_or(lo->year);
        panel.year_max = config.year_max.value_or(hi->year);
    } else {
        panel.year_min = config.year_min.value_or(0);
        panel.year_max = config.year_max.value_or(0);
    }
    return {std::move(panel), std::move(report)};
}

std::vector<YearlyMean> yearly_means(const Panel& panel) {
    if (panel.records.empty())
        throw std::invalid_argument("yearly_means: empty panel");
    std::map<int, YearlyMean> by_year;
    for (const auto& rec : panel.records) {
        auto& m = by_year[rec.year];
        m.year = rec.year;
        m.mean_revenue += rec.revenue;
        m.mean_profit += rec.profit;
        ++m.n;
    }
    std::vector<YearlyMean> out;
    out.reserve(by_year.size());
    for (auto& [year, m] : by_year) {
        m.mean_revenue /= static_cast<double>(m.n);
        m.mean_profit /= static_cast<double>(m.n);
        out.push_back(m);
    }
    return out;
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
    std::vector<CompanyYearRecord> sorted = panel.records;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return std::tie(a.company_id, a.year) < std::tie(b.company_id, b.year);
    });
    out << "company,year,revenue,profit\n";
    out.precision(17);
    for (const auto& rec : sorted) {
        out << rec.company_id << ',' << rec.year << ',' << rec.revenue << ','
            << rec.profit << '\n';
    }
}

void write_panel_metadata(std::ostream& out, const Panel& panel,
                          const RejectionReport& report) {
    nlohmann::json j;
    j["unit_label"] = panel.unit_label;
    j["year_min"] = panel.year_min;
    j["year_max"] = panel.year_max;
    j["record_count"] = panel.records.size();
    nlohmann::json rejections = nlohmann::json::object();
    for (const auto& [reason, count] : report.counts)
        rejections[to_string(reason)] = count;
    j["rejections"] = rejections;
    out << j.dump(2) << '\n';
}

}  // namespace profluct
