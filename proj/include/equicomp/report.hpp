#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "equicomp/errors.hpp"

namespace equicomp {

enum class ReportFormat { json, csv };

inline ReportFormat parse_report_format(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw validation_error("unknown report format '" + s + "' (expected json or csv)");
}

// Cell value of a report: absent, boolean, integer, real or string. Exact
// counts travel as decimal strings so no precision is lost.
using ReportValue = std::variant<std::monostate, bool, long long, double, std::string>;

// Tabular experiment report. Serialization is bit-stable: keys sorted, reals
// rendered at 12 significant digits, no volatile fields.
struct Report {
    std::vector<std::pair<std::string, ReportValue>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<ReportValue>> rows;

    void set(const std::string& key, ReportValue value) {
        for (auto& [k, v] : meta)
            if (k == key) {
                v = std::move(value);
                return;
            }
        meta.emplace_back(key, std::move(value));
    }

    std::vector<ReportValue>& add_row() {
        rows.emplace_back(columns.size());
        return rows.back();
    }
};

namespace detail {

inline std::string format_double(double v) {
    if (!std::isfinite(v)) {
        if (std::isnan(v)) return "nan";
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

inline std::string json_value(const ReportValue& v) {
    if (std::holds_alternative<std::monostate>(v)) return "null";
    if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (const long long* i = std::get_if<long long>(&v)) return std::to_string(*i);
    if (const double* d = std::get_if<double>(&v)) {
        if (!std::isfinite(*d)) return "null";
        return format_double(*d);
    }
    return "\"" + json_escape(std::get<std::string>(v)) + "\"";
}

inline std::string csv_value(const ReportValue& v) {
    std::string raw;
    if (std::holds_alternative<std::monostate>(v)) return "";
    else if (const bool* b = std::get_if<bool>(&v)) raw = *b ? "true" : "false";
    else if (const long long* i = std::get_if<long long>(&v)) raw = std::to_string(*i);
    else if (const double* d = std::get_if<double>(&v)) raw = format_double(*d);
    else raw = std::get<std::string>(v);
    if (raw.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : raw) {
            if (c == '"') quoted += "\"\"";
            else quoted += c;
        }
        quoted += "\"";
        return quoted;
    }
    return raw;
}

} // namespace detail

inline std::string render_report(const Report& report, ReportFormat format) {
    std::ostringstream os;
    if (format == ReportFormat::csv) {
        for (size_t c = 0; c < report.columns.size(); ++c)
            os << (c ? "," : "") << detail::csv_value(ReportValue(report.columns[c]));
        os << "\n";
        for (const auto& row : report.rows) {
            for (size_t c = 0; c < row.size(); ++c)
                os << (c ? "," : "") << detail::csv_value(row[c]);
            os << "\n";
        }
        return os.str();
    }

    // JSON: one object; meta keys at top level plus a "rows" array whose
    // objects carry the column values. All keys emitted in sorted order.
    std::vector<std::pair<std::string, std::string>> fields;
    for (const auto& [k, v] : report.meta) fields.emplace_back(k, detail::json_value(v));
    {
        std::ostringstream rows;
        rows << "[";
        for (size_t r = 0; r < report.rows.size(); ++r) {
            std::vector<std::pair<std::string, std::string>> cells;
            for (size_t c = 0; c < report.columns.size(); ++c)
                cells.emplace_back(report.columns[c], detail::json_value(report.rows[r][c]));
            std::sort(cells.begin(), cells.end());
            rows << (r ? "," : "") << "{";
            for (size_t c = 0; c < cells.size(); ++c)
                rows << (c ? "," : "") << "\"" << detail::json_escape(cells[c].first)
                     << "\":" << cells[c].second;
            rows << "}";
        }
        rows << "]";
        fields.emplace_back("rows", rows.str());
    }
    std::sort(fields.begin(), fields.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    os << "{";
    for (size_t i = 0; i < fields.size(); ++i)
        os << (i ? "," : "") << "\"" << detail::json_escape(fields[i].first)
           << "\":" << fields[i].second;
    os << "}\n";
    return os.str();
}

inline void emit_report(const Report& report, const std::string& path, ReportFormat format) {
    const std::string body = render_report(report, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open report file '" + path + "'");
    out << body;
    if (!out) throw io_error("write failed for report file '" + path + "'");
}

} // namespace equicomp
