#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pvkit/table.hpp"

namespace pvkit {

// Minimal RFC-4180-style CSV: comma separated, double quotes for fields
// containing commas/quotes/newlines, "" escapes a quote.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);
std::string csv_escape(const std::string& field);

// Formats a double with enough digits to round-trip exactly.
std::string format_double(double v);

// Report CSV: header `report_id,drug,ae`.
std::vector<ReportRecord> read_report_csv(std::istream& in);
std::vector<ReportRecord> read_report_csv_file(const std::string& path);

// Aggregate CSV: header `ae,drug,count`.
std::vector<AggregateRecord> read_aggregate_csv(std::istream& in);
std::vector<AggregateRecord> read_aggregate_csv_file(const std::string& path);

// Table CSV: first column `ae`, one column per drug, integer cells. The
// reference row/column are recognized by their literal labels.
ContingencyTable read_table_csv(std::istream& in);
ContingencyTable read_table_csv_file(const std::string& path);
void write_table_csv(std::ostream& out, const ContingencyTable& table);
void write_table_csv_file(const std::string& path, const ContingencyTable& table);

// Peeks at a CSV header to distinguish report/aggregate/table inputs.
enum class CsvKind { Report, Aggregate, Table };
CsvKind sniff_csv_kind(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// One non-empty trimmed line per entry; '#' starts a comment line.
std::vector<std::string> read_list_file(const std::string& path);

}  // namespace pvkit
