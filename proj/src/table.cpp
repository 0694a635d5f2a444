#include "pvkit/table.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "pvkit/errors.hpp"

namespace pvkit {

namespace {

std::string to_lower(const std::string& s) {
  std::string out(s.size(), '\0');
  std::transform(s.begin(), s.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void require_unique(const std::vector<std::string>& labels, const char* axis) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw InvalidArgument(std::string(axis) + " label is empty");
    if (!seen.insert(l).second)
      throw InvalidArgument(std::string("duplicate ") + axis + " label: " + l);
  }
}

}  // namespace

ContingencyTable::ContingencyTable(std::vector<std::string> ae_labels,
                                   std::vector<std::string> drug_labels,
                                   Grid<std::int64_t> counts,
                                   std::optional<std::size_t> reference_row,
                                   std::optional<std::size_t> reference_col)
    : ae_labels_(std::move(ae_labels)),
      drug_labels_(std::move(drug_labels)),
      counts_(std::move(counts)),
      reference_row_(reference_row),
      reference_col_(reference_col) {
  if (counts_.rows() == 0 || counts_.cols() == 0)
    throw InvalidArgument("contingency table must have at least one row and column");
  if (ae_labels_.size() != counts_.rows() ||
      drug_labels_.size() != counts_.cols())
    throw InvalidArgument("label count does not match table dimensions");
  require_unique(ae_labels_, "AE");
  require_unique(drug_labels_, "drug");
  if (reference_row_ && *reference_row_ >= counts_.rows())
    throw InvalidArgument("reference row index out of range");
  if (reference_col_ && *reference_col_ >= counts_.cols())
    throw InvalidArgument("reference column index out of range");

  row_totals_.assign(counts_.rows(), 0);
  col_totals_.assign(counts_.cols(), 0);
  for (std::size_t i = 0; i < counts_.rows(); ++i) {
    for (std::size_t j = 0; j < counts_.cols(); ++j) {
      const std::int64_t c = counts_(i, j);
      if (c < 0) throw InvalidArgument("negative cell count");
      row_totals_[i] += c;
      col_totals_[j] += c;
      grand_total_ += c;
    }
  }
}

std::optional<std::size_t> ContingencyTable::find_ae(
    const std::string& label) const {
  const auto it = std::find(ae_labels_.begin(), ae_labels_.end(), label);
  if (it == ae_labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ae_labels_.begin());
}

std::optional<std::size_t> ContingencyTable::find_drug(
    const std::string& label) const {
  const auto it = std::find(drug_labels_.begin(), drug_labels_.end(), label);
  if (it == drug_labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - drug_labels_.begin());
}

ContingencyTable build_from_reports(std::span<const ReportRecord> records,
                                    std::span<const std::string> drugs_of_interest,
                                    std::vector<std::string>* warnings) {
  if (records.empty()) throw EmptyInput("no report records");
  if (drugs_of_interest.empty()) throw EmptyInput("no drugs of interest");

  std::unordered_map<std::string, std::size_t> drug_col;
  std::vector<std::string> drug_labels;
  for (const auto& d : drugs_of_interest) {
    if (d.empty()) throw InvalidArgument("empty drug label");
    if (drug_col.count(d)) throw InvalidArgument("duplicate drug of interest: " + d);
    drug_col.emplace(d, drug_labels.size());
    drug_labels.push_back(d);
  }
  const std::size_t ref_col = drug_labels.size();
  drug_labels.push_back(kOtherDrugsLabel);

  std::unordered_map<std::string, std::size_t> ae_row;
  std::vector<std::string> ae_labels;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::unordered_set<std::string> drugs_seen;

  // First pass: fix the row order and deduplicate triples.
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  cells.reserve(records.size());
  for (const auto& r : records) {
    if (r.report_id.empty() || r.drug.empty() || r.ae.empty())
      throw InvalidArgument("report record with empty field");
    if (!seen.emplace(r.report_id, r.drug, r.ae).second) continue;
    drugs_seen.insert(r.drug);
    auto [it, inserted] = ae_row.try_emplace(r.ae, ae_labels.size());
    if (inserted) ae_labels.push_back(r.ae);
    const auto col_it = drug_col.find(r.drug);
    const std::size_t j = col_it == drug_col.end() ? ref_col : col_it->second;
    cells.emplace_back(it->second, j);
  }

  if (warnings) {
    for (const auto& d : drugs_of_interest)
      if (!drugs_seen.count(d))
        warnings->push_back("drug of interest not present in records: " + d);
  }

  Grid<std::int64_t> counts(ae_labels.size(), drug_labels.size(), 0);
  for (const auto& [i, j] : cells) ++counts(i, j);

  return ContingencyTable(std::move(ae_labels), std::move(drug_labels),
                          std::move(counts), std::nullopt, ref_col);
}

ContingencyTable build_from_aggregates(std::span<const AggregateRecord> aggs,
                                       std::span<const std::string> drugs_of_interest,
                                       std::span<const std::string> reference_drugs,
                                       std::vector<std::string>* warnings) {
  if (aggs.empty()) throw EmptyInput("no aggregate records");
  if (drugs_of_interest.empty()) throw EmptyInput("no drugs of interest");

  std::unordered_set<std::string> interest(drugs_of_interest.begin(),
                                           drugs_of_interest.end());
  for (const auto& d : reference_drugs) {
    if (interest.count(d))
      throw DisjointnessViolation("drug appears in both interest and reference sets: " + d);
  }
  std::unordered_set<std::string> reference(reference_drugs.begin(),
                                            reference_drugs.end());

  std::unordered_map<std::string, std::size_t> drug_col;
  std::vector<std::string> drug_labels;
  for (const auto& d : drugs_of_interest) {
    if (drug_col.count(d)) throw InvalidArgument("duplicate drug of interest: " + d);
    drug_col.emplace(d, drug_labels.size());
    drug_labels.push_back(d);
  }
  const std::size_t ref_col = drug_labels.size();
  drug_labels.push_back(kOtherDrugsLabel);

  // Rows are the union of AE labels over the whole input, in order of first
  // appearance; AEs seen only for omitted drugs keep an all-zero row.
  std::unordered_map<std::string, std::size_t> ae_row;
  std::vector<std::string> ae_labels;
  for (const auto& a : aggs) {
    if (a.ae.empty() || a.drug.empty())
      throw InvalidArgument("aggregate record with empty field");
    if (a.count < 0) throw InvalidArgument("negative aggregate count");
    auto [it, inserted] = ae_row.try_emplace(a.ae, ae_labels.size());
    if (inserted) ae_labels.push_back(a.ae);
  }

  Grid<std::int64_t> counts(ae_labels.size(), drug_labels.size(), 0);
  std::set<std::pair<std::string, std::string>> entry_seen;
  for (const auto& a : aggs) {
    const auto col_it = drug_col.find(a.drug);
    std::size_t j;
    if (col_it != drug_col.end()) {
      j = col_it->second;
    } else if (reference.empty() || reference.count(a.drug)) {
      // With no explicit reference list every non-interest drug collapses
      // into the reference column.
      j = ref_col;
    } else {
      continue;  // not of interest, not a reference drug
    }
    if (!entry_seen.emplace(a.ae, a.drug).second && warnings)
      warnings->push_back("duplicate aggregate entry summed: (" + a.ae + ", " +
                          a.drug + ")");
    counts(ae_row.at(a.ae), j) += a.count;
  }

  return ContingencyTable(std::move(ae_labels), std::move(drug_labels),
                          std::move(counts), std::nullopt, ref_col);
}

ContingencyTable filter_aes_by_keywords(const ContingencyTable& table,
                                        std::span<const std::string> keywords) {
  if (keywords.empty()) throw EmptyInput("no keywords");
  std::vector<std::string> lowered;
  lowered.reserve(keywords.size());
  for (const auto& k : keywords) lowered.push_back(to_lower(k));

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    const std::string label = to_lower(table.ae_label(i));
    const bool match = std::any_of(lowered.begin(), lowered.end(),
                                   [&](const std::string& k) {
                                     return !k.empty() &&
                                            label.find(k) != std::string::npos;
                                   });
    if (match) kept.push_back(i);
  }
  if (kept.empty()) throw NoMatchingRows("no AE label matches any keyword");

  std::vector<std::string> ae_labels;
  ae_labels.reserve(kept.size() + 1);
  for (std::size_t i : kept) ae_labels.push_back(table.ae_label(i));
  const std::size_t ref_row = ae_labels.size();
  ae_labels.push_back(kOtherAesLabel);

  Grid<std::int64_t> counts(ae_labels.size(), table.n_drugs(), 0);
  std::vector<bool> is_kept(table.n_aes(), false);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    is_kept[kept[r]] = true;
    for (std::size_t j = 0; j < table.n_drugs(); ++j)
      counts(r, j) = table.count(kept[r], j);
  }
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    if (is_kept[i]) continue;
    for (std::size_t j = 0; j < table.n_drugs(); ++j)
      counts(ref_row, j) += table.count(i, j);
  }

  return ContingencyTable(std::move(ae_labels),
                          table.drug_labels(), std::move(counts), ref_row,
                          table.reference_col());
}

Collapsed2x2 collapse_2x2(const ContingencyTable& table, std::size_t ae_index,
                          std::size_t drug_index) {
  if (ae_index >= table.n_aes() || drug_index >= table.n_drugs())
    throw InvalidArgument("collapse index out of range");
  const std::int64_t n11 = table.count(ae_index, drug_index);
  const std::int64_t ni = table.row_total(ae_index);
  const std::int64_t nj = table.col_total(drug_index);
  const std::int64_t n = table.grand_total();
  return Collapsed2x2{n11, ni - n11, nj - n11, n - ni - nj + n11};
}

BaselineMatrix expected_baseline(const ContingencyTable& table) {
  const std::int64_t n = table.grand_total();
  if (n == 0) throw DegenerateTable("grand total is zero");
  Grid<double> expected(table.n_aes(), table.n_drugs(), 0.0);
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    const double ni = static_cast<double>(table.row_total(i));
    for (std::size_t j = 0; j < table.n_drugs(); ++j) {
      expected(i, j) =
          ni * static_cast<double>(table.col_total(j)) / static_cast<double>(n);
    }
  }
  return BaselineMatrix{std::move(expected)};
}

}  // namespace pvkit
