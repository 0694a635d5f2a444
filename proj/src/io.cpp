#include "pvkit/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pvkit/errors.hpp"

namespace pvkit {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::int64_t parse_count(const std::string& field, std::size_t line) {
  std::int64_t value = 0;
  const std::string t = trim(field);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError("line " + std::to_string(line) + ": invalid count '" +
                     field + "'");
  if (value < 0)
    throw ParseError("line " + std::to_string(line) + ": negative count");
  return value;
}

void check_header(const std::vector<std::string>& row,
                  const std::vector<std::string>& expected) {
  if (row.size() < expected.size())
    throw ParseError("line 1: expected header with " +
                     std::to_string(expected.size()) + " columns");
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (trim(row[i]) != expected[i])
      throw ParseError("line 1: expected header column '" + expected[i] +
                       "', found '" + row[i] + "'");
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  return in;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // Skip rows that are entirely empty (e.g. trailing newline).
    if (row.size() > 1 || !row[0].empty()) rows.push_back(row);
    row.clear();
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
        if (c == '\n') ++line;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !field_started) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
        break;
    }
  }
  if (in_quotes) throw ParseError("line " + std::to_string(line) +
                                  ": unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<ReportRecord> read_report_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  if (rows.empty()) throw ParseError("empty report CSV");
  check_header(rows[0], {"report_id", "drug", "ae"});
  std::vector<ReportRecord> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3)
      throw ParseError("line " + std::to_string(r + 1) +
                       ": expected 3 fields, found " +
                       std::to_string(rows[r].size()));
    out.push_back({rows[r][0], rows[r][1], rows[r][2]});
  }
  return out;
}

std::vector<AggregateRecord> read_aggregate_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  if (rows.empty()) throw ParseError("empty aggregate CSV");
  check_header(rows[0], {"ae", "drug", "count"});
  std::vector<AggregateRecord> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 3)
      throw ParseError("line " + std::to_string(r + 1) +
                       ": expected 3 fields, found " +
                       std::to_string(rows[r].size()));
    out.push_back({rows[r][0], rows[r][1], parse_count(rows[r][2], r + 1)});
  }
  return out;
}

ContingencyTable read_table_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  if (rows.size() < 2) throw ParseError("table CSV needs a header and rows");
  const auto& header = rows[0];
  if (header.size() < 2 || trim(header[0]) != "ae")
    throw ParseError("line 1: table CSV header must start with 'ae'");

  std::vector<std::string> drug_labels(header.begin() + 1, header.end());
  std::optional<std::size_t> ref_col;
  for (std::size_t j = 0; j < drug_labels.size(); ++j)
    if (drug_labels[j] == kOtherDrugsLabel) ref_col = j;

  std::vector<std::string> ae_labels;
  std::optional<std::size_t> ref_row;
  Grid<std::int64_t> counts(rows.size() - 1, drug_labels.size(), 0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw ParseError("line " + std::to_string(r + 1) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(rows[r].size()));
    if (rows[r][0] == kOtherAesLabel) ref_row = r - 1;
    ae_labels.push_back(rows[r][0]);
    for (std::size_t j = 1; j < rows[r].size(); ++j)
      counts(r - 1, j - 1) = parse_count(rows[r][j], r + 1);
  }
  return ContingencyTable(std::move(ae_labels), std::move(drug_labels),
                          std::move(counts), ref_row, ref_col);
}

void write_table_csv(std::ostream& out, const ContingencyTable& table) {
  out << "ae";
  for (std::size_t j = 0; j < table.n_drugs(); ++j)
    out << ',' << csv_escape(table.drug_label(j));
  out << '\n';
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    out << csv_escape(table.ae_label(i));
    for (std::size_t j = 0; j < table.n_drugs(); ++j)
      out << ',' << table.count(i, j);
    out << '\n';
  }
}

std::vector<ReportRecord> read_report_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_report_csv(in);
}

std::vector<AggregateRecord> read_aggregate_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_aggregate_csv(in);
}

ContingencyTable read_table_csv_file(const std::string& path) {
  auto in = open_or_throw(path);
  return read_table_csv(in);
}

void write_table_csv_file(const std::string& path,
                          const ContingencyTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  write_table_csv(out, table);
}

CsvKind sniff_csv_kind(const std::string& path) {
  auto in = open_or_throw(path);
  std::string first_line;
  if (!std::getline(in, first_line)) throw ParseError("empty file: " + path);
  std::istringstream hs(first_line);
  const auto rows = parse_csv(hs);
  if (rows.empty() || rows[0].empty()) throw ParseError("empty header: " + path);
  const auto& h = rows[0];
  if (h.size() >= 3 && trim(h[0]) == "report_id") return CsvKind::Report;
  if (h.size() >= 3 && trim(h[0]) == "ae" && trim(h[1]) == "drug" &&
      trim(h[2]) == "count")
    return CsvKind::Aggregate;
  if (h.size() >= 2 && trim(h[0]) == "ae") return CsvKind::Table;
  throw ParseError("unrecognized CSV header in " + path);
}

std::string read_text_file(const std::string& path) {
  auto in = open_or_throw(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << content;
}

std::vector<std::string> read_list_file(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace pvkit
