#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "pvkit/errors.hpp"
#include "pvkit/io.hpp"
#include "pvkit/rng.hpp"
#include "pvkit/table.hpp"

using namespace pvkit;

TEST_CASE("build_from_reports basic example") {
  const std::vector<ReportRecord> records = {
      {"r1", "A", "Headache"}, {"r2", "A", "Nausea"}, {"r3", "B", "Headache"}};
  const std::vector<std::string> interest = {"A"};
  const auto table = build_from_reports(records, interest);
  REQUIRE(table.n_aes() == 2);
  REQUIRE(table.n_drugs() == 2);
  CHECK(table.drug_label(0) == "A");
  CHECK(table.drug_label(1) == kOtherDrugsLabel);
  CHECK(table.ae_label(0) == "Headache");
  CHECK(table.count(0, 0) == 1);
  CHECK(table.count(0, 1) == 1);
  CHECK(table.count(1, 0) == 1);
  CHECK(table.count(1, 1) == 0);
  REQUIRE(table.reference_col().has_value());
  CHECK(*table.reference_col() == 1);
}

TEST_CASE("duplicate triples count once") {
  const std::vector<ReportRecord> records = {{"r1", "A", "Headache"},
                                             {"r1", "A", "Headache"}};
  const std::vector<std::string> interest = {"A"};
  const auto table = build_from_reports(records, interest);
  CHECK(table.count(0, 0) == 1);
  CHECK(table.grand_total() == 1);
}

TEST_CASE("missing drug of interest keeps a zero column with a warning") {
  const std::vector<ReportRecord> records = {{"r1", "A", "Headache"}};
  const std::vector<std::string> interest = {"A", "Ghost"};
  std::vector<std::string> warnings;
  const auto table = build_from_reports(records, interest, &warnings);
  REQUIRE(table.n_drugs() == 3);
  CHECK(table.col_total(1) == 0);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("Ghost") != std::string::npos);
}

TEST_CASE("build_from_reports rejects empty input") {
  CHECK_THROWS_AS(build_from_reports({}, std::vector<std::string>{"A"}),
                  EmptyInput);
  const std::vector<ReportRecord> records = {{"r1", "A", "H"}};
  CHECK_THROWS_AS(build_from_reports(records, std::vector<std::string>{}),
                  EmptyInput);
}

TEST_CASE("10k synthetic records equal an independent multiplicity oracle") {
  // Fixture: deterministic multiplicities per (drug, ae) pair, with unique
  // report ids so nothing deduplicates.
  std::vector<ReportRecord> records;
  std::map<std::pair<std::string, std::string>, std::int64_t> expected;
  SplitRng rng(101);
  int next_id = 0;
  for (int d = 0; d < 8; ++d) {
    for (int a = 0; a < 60; ++a) {
      const auto mult = static_cast<int>(rng.next_u64() % 45);
      const std::string drug = "D" + std::to_string(d);
      const std::string ae = "AE" + std::to_string(a);
      for (int k = 0; k < mult; ++k)
        records.push_back({"r" + std::to_string(next_id++), drug, ae});
      expected[{drug, ae}] += mult;
    }
  }
  REQUIRE(records.size() > 5000);

  const std::vector<std::string> interest = {"D0", "D3", "D7"};
  const auto table = build_from_reports(records, interest);

  // Oracle: hash-count over the fixture with the same interest split.
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    for (std::size_t j = 0; j + 1 < table.n_drugs(); ++j) {
      CHECK(table.count(i, j) ==
            expected[{table.drug_label(j), table.ae_label(i)}]);
    }
    std::int64_t other = 0;
    for (int d = 0; d < 8; ++d) {
      const std::string drug = "D" + std::to_string(d);
      if (drug == "D0" || drug == "D3" || drug == "D7") continue;
      other += expected[{drug, table.ae_label(i)}];
    }
    CHECK(table.count(i, table.n_drugs() - 1) == other);
  }
}

TEST_CASE("build_from_aggregates sums the reference columns") {
  const std::vector<AggregateRecord> aggs = {
      {"AE1", "X", 2}, {"AE1", "Y", 3}, {"AE1", "Z", 5}};
  const std::vector<std::string> interest = {"X"};
  const std::vector<std::string> reference = {"Y", "Z"};
  const auto table = build_from_aggregates(aggs, interest, reference);
  REQUIRE(table.n_aes() == 1);
  REQUIRE(table.n_drugs() == 2);
  CHECK(table.count(0, 0) == 2);
  CHECK(table.count(0, 1) == 8);
}

TEST_CASE("interest and reference sets must be disjoint") {
  const std::vector<AggregateRecord> aggs = {{"AE1", "X", 2}};
  CHECK_THROWS_AS(build_from_aggregates(aggs, std::vector<std::string>{"X"},
                                        std::vector<std::string>{"X", "Y"}),
                  DisjointnessViolation);
}

TEST_CASE("duplicate aggregate entries are summed with a warning") {
  const std::vector<AggregateRecord> aggs = {
      {"AE1", "X", 2}, {"AE1", "X", 3}, {"AE1", "Y", 1}};
  std::vector<std::string> warnings;
  const auto table = build_from_aggregates(aggs, std::vector<std::string>{"X"},
                                           std::vector<std::string>{"Y"},
                                           &warnings);
  CHECK(table.count(0, 0) == 5);
  CHECK(warnings.size() == 1);
}

TEST_CASE("column sums of a built table equal per-drug totals of the fixture") {
  std::vector<AggregateRecord> aggs;
  std::map<std::string, std::int64_t> drug_totals;
  SplitRng rng(103);
  for (int a = 0; a < 30; ++a) {
    for (const char* drug : {"Alpha", "Beta", "RefA", "RefB", "RefC"}) {
      const auto count = static_cast<std::int64_t>(rng.next_u64() % 1000);
      aggs.push_back({"AE" + std::to_string(a), drug, count});
      drug_totals[drug] += count;
    }
  }
  const auto table = build_from_aggregates(
      aggs, std::vector<std::string>{"Alpha", "Beta"},
      std::vector<std::string>{"RefA", "RefB", "RefC"});
  CHECK(table.col_total(0) == drug_totals["Alpha"]);
  CHECK(table.col_total(1) == drug_totals["Beta"]);
  CHECK(table.col_total(2) ==
        drug_totals["RefA"] + drug_totals["RefB"] + drug_totals["RefC"]);
}

TEST_CASE("keyword filter keeps matches and collapses the rest") {
  const auto table = build_from_aggregates(
      std::vector<AggregateRecord>{{"Anxiety", "X", 4},
                                   {"Anxiety", "Y", 1},
                                   {"Rash", "X", 7},
                                   {"Rash", "Y", 2}},
      std::vector<std::string>{"X"}, std::vector<std::string>{"Y"});
  const auto filtered =
      filter_aes_by_keywords(table, std::vector<std::string>{"anx"});
  REQUIRE(filtered.n_aes() == 2);
  CHECK(filtered.ae_label(0) == "Anxiety");
  CHECK(filtered.ae_label(1) == kOtherAesLabel);
  REQUIRE(filtered.reference_row().has_value());
  CHECK(*filtered.reference_row() == 1);
  CHECK(filtered.count(1, 0) == 7);
  CHECK(filtered.count(1, 1) == 2);
  CHECK(filtered.grand_total() == table.grand_total());
}

TEST_CASE("keywords matching all rows keep a zero reference row") {
  const auto table = build_from_aggregates(
      std::vector<AggregateRecord>{{"Anxiety", "X", 4}, {"Angst", "Y", 2}},
      std::vector<std::string>{"X"}, std::vector<std::string>{"Y"});
  const auto filtered =
      filter_aes_by_keywords(table, std::vector<std::string>{"an"});
  REQUIRE(filtered.n_aes() == 3);
  CHECK(filtered.ae_label(2) == kOtherAesLabel);
  CHECK(filtered.row_total(2) == 0);
}

TEST_CASE("no matching keyword throws") {
  const auto table = build_from_aggregates(
      std::vector<AggregateRecord>{{"Anxiety", "X", 4}},
      std::vector<std::string>{"X"}, std::vector<std::string>{});
  CHECK_THROWS_AS(
      filter_aes_by_keywords(table, std::vector<std::string>{"zzz"}),
      NoMatchingRows);
}

TEST_CASE("243-row fixture matches an independent substring scan") {
  std::vector<AggregateRecord> aggs;
  std::vector<std::string> labels;
  for (int a = 0; a < 243; ++a) {
    std::string label = "Event" + std::to_string(a);
    if (a % 7 == 0) label += " anxiety";
    if (a % 11 == 0) label += " Depression";
    labels.push_back(label);
    aggs.push_back({label, "X", a + 1});
    aggs.push_back({label, "Y", 2 * a + 1});
  }
  const auto table =
      build_from_aggregates(aggs, std::vector<std::string>{"X"},
                            std::vector<std::string>{"Y"});
  const std::vector<std::string> keywords = {"anxiety", "depress"};
  const auto filtered = filter_aes_by_keywords(table, keywords);

  std::size_t oracle_count = 0;
  for (const auto& l : labels) {
    std::string lower = l;
    for (auto& c : lower) c = static_cast<char>(std::tolower(c));
    if (lower.find("anxiety") != std::string::npos ||
        lower.find("depress") != std::string::npos)
      ++oracle_count;
  }
  CHECK(filtered.n_aes() == oracle_count + 1);

  // Column marginals are preserved exactly.
  for (std::size_t j = 0; j < table.n_drugs(); ++j)
    CHECK(filtered.col_total(j) == table.col_total(j));
}

TEST_CASE("collapse_2x2 small examples") {
  const ContingencyTable t1({"a", "b"}, {"x", "y"},
                            [] {
                              Grid<std::int64_t> g(2, 2);
                              g(0, 0) = 1;
                              g(0, 1) = 2;
                              g(1, 0) = 3;
                              g(1, 1) = 4;
                              return g;
                            }());
  const auto c1 = collapse_2x2(t1, 0, 0);
  CHECK(c1.n11 == 1);
  CHECK(c1.n12 == 2);
  CHECK(c1.n21 == 3);
  CHECK(c1.n22 == 4);

  const ContingencyTable t2({"a", "b"}, {"x", "y"},
                            [] {
                              Grid<std::int64_t> g(2, 2);
                              g(0, 0) = 5;
                              g(1, 1) = 5;
                              return g;
                            }());
  const auto c2 = collapse_2x2(t2, 0, 1);
  CHECK(c2.n11 == 0);
  CHECK(c2.n12 == 5);
  CHECK(c2.n21 == 5);
  CHECK(c2.n22 == 0);
}

TEST_CASE("every collapse preserves the grand total on a random fixture") {
  SplitRng rng(107);
  Grid<std::int64_t> counts(20, 6);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      counts(i, j) = static_cast<std::int64_t>(rng.next_u64() % 50);
  std::vector<std::string> aes, drugs;
  for (int i = 0; i < 20; ++i) aes.push_back("AE" + std::to_string(i));
  for (int j = 0; j < 6; ++j) drugs.push_back("D" + std::to_string(j));
  const ContingencyTable table(aes, drugs, counts);
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    for (std::size_t j = 0; j < table.n_drugs(); ++j) {
      const auto c = collapse_2x2(table, i, j);
      CHECK(c.n11 >= 0);
      CHECK(c.n12 >= 0);
      CHECK(c.n21 >= 0);
      CHECK(c.n22 >= 0);
      CHECK(c.total() == table.grand_total());
    }
  }
}

TEST_CASE("expected baseline on the all-ones table") {
  const ContingencyTable table({"a", "b"}, {"x", "y"},
                               Grid<std::int64_t>(2, 2, 1));
  const auto e = expected_baseline(table);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(e.expected(i, j) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("O/E ratio arithmetic") {
  // Marginals engineered so E(0,0) = 4206 * 100 / 10000 = 42.06 exactly.
  Grid<std::int64_t> counts(2, 2, 0);
  counts(0, 0) = 50;
  counts(0, 1) = 4156;
  counts(1, 0) = 50;
  counts(1, 1) = 5744;
  const ContingencyTable table({"a", "b"}, {"x", "y"}, counts);
  const auto e = expected_baseline(table);
  REQUIRE(e.expected(0, 0) == doctest::Approx(42.06).epsilon(1e-12));
  const double ratio = 3831.0 / e.expected(0, 0);
  CHECK(std::fabs(ratio - 91.08) < 0.01);
}

TEST_CASE("baseline row and column sums reproduce the marginals") {
  SplitRng rng(109);
  Grid<std::int64_t> counts(50, 7);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      counts(i, j) = static_cast<std::int64_t>(rng.next_u64() % 400);
  std::vector<std::string> aes, drugs;
  for (int i = 0; i < 50; ++i) aes.push_back("AE" + std::to_string(i));
  for (int j = 0; j < 7; ++j) drugs.push_back("D" + std::to_string(j));
  const ContingencyTable table(aes, drugs, counts);
  const auto e = expected_baseline(table);
  for (std::size_t i = 0; i < table.n_aes(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < table.n_drugs(); ++j) row += e.expected(i, j);
    CHECK(row == doctest::Approx(static_cast<double>(table.row_total(i)))
                     .epsilon(1e-9));
  }
  for (std::size_t j = 0; j < table.n_drugs(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < table.n_aes(); ++i) col += e.expected(i, j);
    CHECK(col == doctest::Approx(static_cast<double>(table.col_total(j)))
                     .epsilon(1e-9));
  }
}

TEST_CASE("zero grand total is degenerate") {
  const ContingencyTable table({"a"}, {"x"}, Grid<std::int64_t>(1, 1, 0));
  CHECK_THROWS_AS(expected_baseline(table), DegenerateTable);
}

TEST_CASE("baseline is invariant to the reference partition") {
  std::vector<AggregateRecord> aggs;
  SplitRng rng(113);
  for (int a = 0; a < 12; ++a)
    for (const char* d : {"X", "R1", "R2", "R3"})
      aggs.push_back({"AE" + std::to_string(a), d,
                      static_cast<std::int64_t>(rng.next_u64() % 90)});

  // Route 1: collapse R1..R3 during construction.
  const auto t1 = build_from_aggregates(aggs, std::vector<std::string>{"X"},
                                        std::vector<std::string>{"R1", "R2",
                                                                 "R3"});
  // Route 2: merge the reference drugs in the raw records first.
  std::vector<AggregateRecord> merged;
  for (const auto& a : aggs) {
    AggregateRecord r = a;
    if (r.drug != "X") r.drug = "Rmerged";
    merged.push_back(r);
  }
  const auto t2 = build_from_aggregates(merged, std::vector<std::string>{"X"},
                                        std::vector<std::string>{"Rmerged"});

  const auto e1 = expected_baseline(t1);
  const auto e2 = expected_baseline(t2);
  REQUIRE(e1.expected.rows() == e2.expected.rows());
  for (std::size_t i = 0; i < e1.expected.rows(); ++i)
    for (std::size_t j = 0; j < e1.expected.cols(); ++j)
      CHECK(e1.expected(i, j) == doctest::Approx(e2.expected(i, j))
                                     .epsilon(1e-15));
}

TEST_CASE("table CSV round trip is bit exact") {
  SplitRng rng(117);
  Grid<std::int64_t> counts(9, 4);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      counts(i, j) = static_cast<std::int64_t>(rng.next_u64() % 100000);
  std::vector<std::string> aes = {"plain",   "with,comma", "with \"quote\"",
                                  "ws  pad", "Anxiety",    "Rash",
                                  "Nausea",  "Tremor",     kOtherAesLabel};
  std::vector<std::string> drugs = {"A", "B,b", kOtherDrugsLabel, "D"};
  const ContingencyTable table(aes, drugs, counts, 8, 2);

  std::ostringstream out;
  write_table_csv(out, table);
  std::istringstream in(out.str());
  const auto back = read_table_csv(in);

  REQUIRE(back.n_aes() == table.n_aes());
  REQUIRE(back.n_drugs() == table.n_drugs());
  CHECK(back.ae_labels() == table.ae_labels());
  CHECK(back.drug_labels() == table.drug_labels());
  for (std::size_t i = 0; i < table.n_aes(); ++i)
    for (std::size_t j = 0; j < table.n_drugs(); ++j)
      CHECK(back.count(i, j) == table.count(i, j));
  REQUIRE(back.reference_row().has_value());
  REQUIRE(back.reference_col().has_value());
  CHECK(*back.reference_row() == 8);
  CHECK(*back.reference_col() == 2);

  // A second write emits identical bytes.
  std::ostringstream out2;
  write_table_csv(out2, back);
  CHECK(out.str() == out2.str());
}

TEST_CASE("report and aggregate CSV parsing") {
  std::istringstream report("report_id,drug,ae\nr1,A,\"Head,ache\"\nr2,B,Rash\n");
  const auto records = read_report_csv(report);
  REQUIRE(records.size() == 2);
  CHECK(records[0].ae == "Head,ache");

  std::istringstream agg("ae,drug,count\nRash,A,12\n");
  const auto aggs = read_aggregate_csv(agg);
  REQUIRE(aggs.size() == 1);
  CHECK(aggs[0].count == 12);

  std::istringstream bad("ae,drug,count\nRash,A,notanumber\n");
  CHECK_THROWS_AS(read_aggregate_csv(bad), ParseError);
}
