#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvkit/grid.hpp"

namespace pvkit {

// Canonical labels for collapsed reference categories.
inline constexpr const char* kOtherAesLabel = "other AEs";
inline constexpr const char* kOtherDrugsLabel = "other drugs";

// One (report, drug, AE) triple from report-level data.
struct ReportRecord {
  std::string report_id;
  std::string drug;
  std::string ae;
};

// One pre-aggregated AE-drug count, the granularity public databases expose.
struct AggregateRecord {
  std::string ae;
  std::string drug;
  std::int64_t count = 0;
};

// AE x drug count table with cached marginals. Immutable after construction;
// safe to share across threads.
class ContingencyTable {
public:
  ContingencyTable(std::vector<std::string> ae_labels,
                   std::vector<std::string> drug_labels,
                   Grid<std::int64_t> counts,
                   std::optional<std::size_t> reference_row = std::nullopt,
                   std::optional<std::size_t> reference_col = std::nullopt);

  std::size_t n_aes() const { return counts_.rows(); }
  std::size_t n_drugs() const { return counts_.cols(); }

  const std::string& ae_label(std::size_t i) const { return ae_labels_[i]; }
  const std::string& drug_label(std::size_t j) const { return drug_labels_[j]; }
  const std::vector<std::string>& ae_labels() const { return ae_labels_; }
  const std::vector<std::string>& drug_labels() const { return drug_labels_; }

  std::int64_t count(std::size_t i, std::size_t j) const {
    return counts_(i, j);
  }
  const Grid<std::int64_t>& counts() const { return counts_; }

  std::int64_t row_total(std::size_t i) const { return row_totals_[i]; }
  std::int64_t col_total(std::size_t j) const { return col_totals_[j]; }
  std::int64_t grand_total() const { return grand_total_; }
  std::span<const std::int64_t> row_totals() const { return row_totals_; }
  std::span<const std::int64_t> col_totals() const { return col_totals_; }

  std::optional<std::size_t> reference_row() const { return reference_row_; }
  std::optional<std::size_t> reference_col() const { return reference_col_; }

  std::optional<std::size_t> find_ae(const std::string& label) const;
  std::optional<std::size_t> find_drug(const std::string& label) const;

private:
  std::vector<std::string> ae_labels_;
  std::vector<std::string> drug_labels_;
  Grid<std::int64_t> counts_;
  std::vector<std::int64_t> row_totals_;
  std::vector<std::int64_t> col_totals_;
  std::int64_t grand_total_ = 0;
  std::optional<std::size_t> reference_row_;
  std::optional<std::size_t> reference_col_;
};

// The four cells of the collapsed 2x2 table for one AE-drug pair.
struct Collapsed2x2 {
  std::int64_t n11 = 0;  // AE i, drug j
  std::int64_t n12 = 0;  // AE i, other drugs
  std::int64_t n21 = 0;  // other AEs, drug j
  std::int64_t n22 = 0;  // other AEs, other drugs

  std::int64_t total() const { return n11 + n12 + n21 + n22; }
};

// Expected counts under row-column independence.
struct BaselineMatrix {
  Grid<double> expected;
};

// Builds a table from report-level records. One column per drug of interest
// plus a collapsed reference column over all remaining drugs; one row per
// distinct AE in order of first appearance. Identical (report_id, drug, ae)
// triples count once. Drugs of interest absent from the data keep a zero
// column and add a note to `warnings` when provided.
ContingencyTable build_from_reports(std::span<const ReportRecord> records,
                                    std::span<const std::string> drugs_of_interest,
                                    std::vector<std::string>* warnings = nullptr);

// Builds a table from aggregated counts. Columns are the drugs of interest
// followed by one reference column summing the reference drugs; rows are the
// union of AE labels in order of first appearance. Duplicate (ae, drug)
// entries are summed with a warning.
ContingencyTable build_from_aggregates(std::span<const AggregateRecord> aggs,
                                       std::span<const std::string> drugs_of_interest,
                                       std::span<const std::string> reference_drugs,
                                       std::vector<std::string>* warnings = nullptr);

// Keeps rows whose AE label contains any keyword (case-insensitive
// substring) and collapses all other rows into one "other AEs" reference
// row. Column marginals are preserved exactly.
ContingencyTable filter_aes_by_keywords(const ContingencyTable& table,
                                        std::span<const std::string> keywords);

Collapsed2x2 collapse_2x2(const ContingencyTable& table, std::size_t ae_index,
                          std::size_t drug_index);

// E_ij = N_i. * N_.j / N_.. for every cell. Throws DegenerateTable when the
// grand total is zero.
BaselineMatrix expected_baseline(const ContingencyTable& table);

}  // namespace pvkit
