#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "chemclip/csv.hpp"
#include "chemclip/dataset.hpp"
#include "chemclip/error.hpp"
#include "chemclip/fingerprint.hpp"
#include "chemclip/rng.hpp"
#include "chemclip/smiles.hpp"
#include "temp_dir.hpp"

using namespace chemclip;
using chemclip::test_support::TempDir;

namespace {

ActivityRecord rec(std::string compound, std::string line, bool active, Domain domain = Domain::kOrganic) {
  ActivityRecord r;
  r.record_id = compound + "@" + line;
  r.compound_id = std::move(compound);
  r.cell_line = std::move(line);
  r.active = active;
  r.domain = domain;
  r.smiles = "CCO";
  return r;
}

std::vector<ActivityRecord> corpus(std::size_t n_compounds, std::size_t lines_per_compound, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<ActivityRecord> out;
  for (std::size_t c = 0; c < n_compounds; ++c) {
    const std::size_t k = 1 + rng.below(lines_per_compound);
    for (std::size_t l = 0; l < k; ++l) out.push_back(rec("C" + std::to_string(c), "L" + std::to_string(l), rng.bernoulli(0.3)));
  }
  return out;
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kIoError;
}

}  // namespace

TEST(Labels, StrictThresholds) {
  EXPECT_TRUE(organic_active(30));
  EXPECT_FALSE(organic_active(50));
  EXPECT_FALSE(organic_active(75));
  EXPECT_TRUE(organic_active(std::nextafter(50.0, 0.0)));
  EXPECT_TRUE(inorganic_active(5));
  EXPECT_FALSE(inorganic_active(10));
  EXPECT_FALSE(inorganic_active(50));
  EXPECT_TRUE(inorganic_active(std::nextafter(10.0, 0.0)));
}

TEST(Loaders, OrganicSchemaAndLabelFlip) {
  TempDir dir;
  const auto path = dir.write("o.csv",
                              "compound_id,smiles,cell_line,gi_mean\n"
                              "N1,CCO,MCF7,30\n"
                              "N1,CCO,HT29,50\n"
                              "N2,C1CC,MCF7,10\n"
                              "N3,\"c1ccccc1\",MCF7,49.999\n");
  const LoadResult r = load_organic_csv(path);
  EXPECT_EQ(r.report.rows, 4u);
  EXPECT_EQ(r.report.kept, 3u);
  EXPECT_EQ(r.report.dropped_unparseable, 1u);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_TRUE(r.records[0].active);
  EXPECT_FALSE(r.records[1].active);
  EXPECT_TRUE(r.records[2].active);
  EXPECT_EQ(r.records[0].record_id, "O2");  // synthesised from the line number

  // Only the label moves when the readout crosses the boundary.
  ActivityRecord a = r.records[0], b = r.records[0];
  b.raw_value = 50.0;
  b.active = organic_active(b.raw_value);
  EXPECT_NE(a.active, b.active);
  EXPECT_EQ(a.compound_id, b.compound_id);
  EXPECT_EQ(a.smiles, b.smiles);
}

TEST(Loaders, InorganicSchemaAndErrors) {
  TempDir dir;
  const auto ok = dir.write("i.csv",
                            "record_id,compound_id,ligand_smiles,metal,oxidation_state,cell_line,ic50_um\n"
                            "r1,M1,NCCN,Pt,2,A549,5\n"
                            "r2,M1,NCCN,Pt,,A549,10\n");
  const LoadResult r = load_inorganic_csv(ok);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].metal, "Pt");
  EXPECT_EQ(r.records[0].oxidation_state, 2);
  EXPECT_EQ(r.records[1].oxidation_state, 0);
  EXPECT_TRUE(r.records[0].active);
  EXPECT_FALSE(r.records[1].active);

  const auto fe = dir.write("fe.csv",
                            "compound_id,ligand_smiles,metal,oxidation_state,cell_line,ic50_um\n"
                            "M1,NCCN,Fe,3,A549,5\n");
  EXPECT_EQ(code_of([&] { load_inorganic_csv(fe); }), ErrorCode::kUnknownMetal);

  const auto missing = dir.write("m.csv", "compound_id,ligand_smiles,metal,cell_line,ic50_um\n");
  EXPECT_EQ(code_of([&] { load_inorganic_csv(missing); }), ErrorCode::kMissingColumn);

  const auto bad = dir.write("b.csv",
                             "compound_id,smiles,cell_line,gi_mean\n"
                             "N1,CCO,MCF7,30\n"
                             "N2,CCO,MCF7,abc\n");
  try {
    load_organic_csv(bad);
    FAIL();
  } catch (const RowError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRow);
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(CellLines, NormaliseAndLookup) {
  const CellLineMap map({{"MDAMB231", "MDA-MB-231"}, {"A549", "A549/ATCC"}});
  EXPECT_EQ(map.lookup("mda-mb-231"), "MDA-MB-231");
  EXPECT_EQ(map.lookup("MDA-MB-231"), "MDA-MB-231");
  EXPECT_EQ(map.lookup("a549"), "A549/ATCC");
  EXPECT_EQ(map.lookup("A549/ATCC"), "A549/ATCC");
  EXPECT_FALSE(map.lookup("XYZ-1"));
}

TEST(CellLines, StandardiseDropsUnmappedAndIsIdempotent) {
  const CellLineMap map({{"MDAMB231", "MDA-MB-231"}, {"HCT116", "HCT-116"}});
  std::vector<ActivityRecord> recs = {rec("a", "mda-mb-231", true), rec("b", "XYZ-1", false), rec("c", "hct 116", false)};
  const StandardizeResult once = standardize_cell_lines(recs, map);
  EXPECT_EQ(once.dropped, 1u);
  ASSERT_EQ(once.records.size(), 2u);
  EXPECT_EQ(once.records[0].cell_line, "MDA-MB-231");
  EXPECT_EQ(once.records[1].cell_line, "HCT-116");
  const StandardizeResult twice = standardize_cell_lines(once.records, map);
  EXPECT_EQ(twice.dropped, 0u);
  ASSERT_EQ(twice.records.size(), once.records.size());
  for (std::size_t i = 0; i < once.records.size(); ++i) EXPECT_EQ(twice.records[i].cell_line, once.records[i].cell_line);
}

TEST(CellLines, SharedIntersection) {
  const SharedCellLines s = filter_shared_cell_lines({rec("o1", "A", 1), rec("o2", "B", 0), rec("o3", "C", 0)},
                                                     {rec("i1", "B", 1), rec("i2", "C", 0), rec("i3", "D", 0)});
  EXPECT_EQ(s.shared, (std::vector<std::string>{"B", "C"}));
  EXPECT_EQ(s.organic.size(), 2u);
  EXPECT_EQ(s.inorganic.size(), 2u);
  EXPECT_EQ(s.dropped_organic, 1u);
  EXPECT_EQ(s.dropped_inorganic, 1u);

  const SharedCellLines none = filter_shared_cell_lines({rec("o1", "A", 1)}, {rec("i1", "B", 1)});
  EXPECT_TRUE(none.shared.empty());
  EXPECT_TRUE(none.organic.empty());
  EXPECT_TRUE(none.inorganic.empty());

  const SharedCellLines same = filter_shared_cell_lines({rec("o1", "A", 1), rec("o2", "B", 0)}, {rec("i1", "A", 1), rec("i2", "B", 1)});
  EXPECT_EQ(same.organic.size(), 2u);
  EXPECT_EQ(same.inorganic.size(), 2u);
}

TEST(MetalTransfer, MovesMetalRecords) {
  ActivityRecord pt = rec("N1", "A", true);
  pt.smiles = "[Pt+2].NCCN";
  ActivityRecord plain = rec("N2", "A", false);
  ActivityRecord two = rec("N3", "A", false);
  two.smiles = "[Ru+2].[Pt+4].NCCN";
  ActivityRecord bare = rec("N4", "A", false);
  bare.smiles = "[Ti+4]";
  const MetalTransfer t = transfer_metal_records({pt, plain, two, bare});
  ASSERT_EQ(t.organic.size(), 1u);
  EXPECT_EQ(t.organic[0].compound_id, "N2");
  ASSERT_EQ(t.transferred.size(), 2u);
  EXPECT_EQ(t.transferred[0].domain, Domain::kInorganic);
  EXPECT_EQ(t.transferred[0].metal, "Pt");
  EXPECT_EQ(t.transferred[0].oxidation_state, 2);
  EXPECT_TRUE(t.transferred[0].active);
  EXPECT_EQ(morgan_fingerprint(parse_smiles(t.transferred[0].smiles)).bits,
            morgan_fingerprint(parse_smiles("NCCN")).bits);
  EXPECT_EQ(t.transferred[1].metal, "Ru");
  EXPECT_EQ(t.multi_metal, 1u);
  EXPECT_EQ(t.dropped_no_ligand, 1u);
}

TEST(Split, TenCompounds) {
  std::vector<ActivityRecord> recs;
  for (int c = 0; c < 10; ++c) recs.push_back(rec("C" + std::to_string(c), "L", false));
  const DatasetSplit s = compound_split(recs, 42);
  EXPECT_EQ(s.count(Split::kTrain), 7u);
  EXPECT_EQ(s.count(Split::kVal), 1u);
  EXPECT_EQ(s.count(Split::kTest), 2u);
  EXPECT_EQ(compound_split(recs, 42).assignment, s.assignment);
}

TEST(Split, SizesWithinOneOfFractions) {
  for (std::size_t n = 0; n <= 2000; ++n) {
    const auto sizes = split_sizes(n);
    EXPECT_EQ(sizes[0] + sizes[1] + sizes[2], n);
    EXPECT_LE(std::abs(static_cast<double>(sizes[0]) - 0.70 * n), 1.0) << n;
    EXPECT_LE(std::abs(static_cast<double>(sizes[1]) - 0.15 * n), 1.0) << n;
    EXPECT_LE(std::abs(static_cast<double>(sizes[2]) - 0.15 * n), 1.0) << n;
  }
}

TEST(Split, CompoundRecordsStayTogether) {
  std::vector<ActivityRecord> recs;
  for (int l = 0; l < 40; ++l) recs.push_back(rec("BIG", "L" + std::to_string(l), l % 2 == 0));
  for (int c = 0; c < 30; ++c) recs.push_back(rec("C" + std::to_string(c), "L0", false));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DatasetSplit s = compound_split(recs, seed);
    std::size_t found = 0;
    for (Split which : {Split::kTrain, Split::kVal, Split::kTest}) {
      std::size_t big = 0;
      for (const auto& r : select_split(recs, s, which)) big += r.compound_id == "BIG";
      EXPECT_TRUE(big == 0 || big == 40);
      found += big;
    }
    EXPECT_EQ(found, 40u);
  }
}

TEST(Split, NoLeakageAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto recs = corpus(50 + seed % 37, 5, seed);
    const DatasetSplit s = compound_split(recs, seed);
    std::map<std::string, std::set<Split>> seen;
    for (Split which : {Split::kTrain, Split::kVal, Split::kTest}) {
      for (const auto& r : select_split(recs, s, which)) seen[r.compound_id].insert(which);
    }
    for (const auto& [id, splits] : seen) EXPECT_EQ(splits.size(), 1u) << id;
  }
}

TEST(Split, InputOrderDoesNotMatter) {
  auto recs = corpus(60, 4, 5);
  const DatasetSplit a = compound_split(recs, 9);
  SplitMix64 rng(1);
  shuffle(std::span<ActivityRecord>(recs), rng);
  EXPECT_EQ(compound_split(recs, 9).assignment, a.assignment);
}

TEST(Split, PerDomain) {
  std::vector<ActivityRecord> org, inorg;
  for (int c = 0; c < 101; ++c) org.push_back(rec("O" + std::to_string(c), "L", false));
  for (int c = 0; c < 19; ++c) inorg.push_back(rec("I" + std::to_string(c), "L", false, Domain::kInorganic));
  const DatasetSplit s = domain_split(org, inorg, 4);
  const auto count = [&](const std::vector<ActivityRecord>& recs, Split which) { return select_split(recs, s, which).size(); };
  const auto osz = split_sizes(101), isz = split_sizes(19);
  EXPECT_EQ(count(org, Split::kTrain), osz[0]);
  EXPECT_EQ(count(org, Split::kTest), osz[2]);
  EXPECT_EQ(count(inorg, Split::kTrain), isz[0]);
  EXPECT_EQ(count(inorg, Split::kVal), isz[1]);
}

TEST(Split, FileRoundTrip) {
  TempDir dir;
  const DatasetSplit s = compound_split(corpus(40, 3, 2), 8);
  write_split_csv(dir / "split.csv", s);
  EXPECT_EQ(read_split_csv(dir / "split.csv").assignment, s.assignment);
}

TEST(Subsample, CapsInactiveCompounds) {
  std::vector<ActivityRecord> recs;
  for (int c = 0; c < 100; ++c) recs.push_back(rec("A" + std::to_string(c), "L", true));
  for (int c = 0; c < 1000; ++c) recs.push_back(rec("I" + std::to_string(c), "L", false));
  const auto kept = subsample_inactives(recs, 5.0, 1);
  std::size_t active = 0, inactive = 0;
  for (const auto& r : kept) (r.active ? active : inactive)++;
  EXPECT_EQ(active, 100u);
  EXPECT_EQ(inactive, 500u);

  std::vector<ActivityRecord> small(recs.begin(), recs.begin() + 400);
  EXPECT_EQ(subsample_inactives(small, 5.0, 1).size(), 400u);
}

TEST(Subsample, CountsCompoundsNotRecords) {
  std::vector<ActivityRecord> recs;
  for (int c = 0; c < 10; ++c) {
    recs.push_back(rec("A" + std::to_string(c), "L0", true));
    recs.push_back(rec("A" + std::to_string(c), "L1", false));  // same compound, inactive elsewhere
  }
  for (int c = 0; c < 100; ++c) {
    for (int l = 0; l < 3; ++l) recs.push_back(rec("I" + std::to_string(c), "L" + std::to_string(l), false));
  }
  const auto kept = subsample_inactives(recs, 5.0, 3);
  std::set<std::string> inactive_compounds;
  std::size_t active_compound_records = 0;
  for (const auto& r : kept) {
    if (r.compound_id[0] == 'I') inactive_compounds.insert(r.compound_id);
    if (r.compound_id[0] == 'A') ++active_compound_records;
  }
  EXPECT_EQ(inactive_compounds.size(), 50u);
  EXPECT_EQ(active_compound_records, 20u);
  EXPECT_EQ(kept.size(), 20u + 150u);
}

TEST(Records, CsvRoundTrip) {
  TempDir dir;
  ActivityRecord a = rec("M1", "A549/ATCC", true, Domain::kInorganic);
  a.smiles = "NCCN";
  a.metal = "Pt";
  a.oxidation_state = 2;
  a.raw_value = 0.1 + 0.2;
  ActivityRecord b = rec("N,1", "MCF7", false);
  b.raw_value = 73.25;
  write_records_csv(dir / "r.csv", std::vector<ActivityRecord>{a, b});
  const auto back = read_records_csv(dir / "r.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].metal, "Pt");
  EXPECT_EQ(back[0].oxidation_state, 2);
  EXPECT_EQ(back[0].raw_value, a.raw_value);
  EXPECT_EQ(back[0].domain, Domain::kInorganic);
  EXPECT_EQ(back[1].compound_id, "N,1");
  EXPECT_FALSE(back[1].metal);
  EXPECT_FALSE(back[1].active);
}

TEST(Ingest, EndToEnd) {
  TempDir dir;
  const auto org = dir.write("o.csv",
                             "compound_id,smiles,cell_line,gi_mean\n"
                             "N1,CCO,MCF7,30\n"
                             "N2,[Pt+2].NCCN,MCF7,20\n"
                             "N3,CCN,HT29,80\n"
                             "N4,CCC,XYZ,10\n");
  const auto inorg = dir.write("i.csv",
                               "compound_id,ligand_smiles,metal,oxidation_state,cell_line,ic50_um\n"
                               "M1,NCCN,Ru,2,mcf-7,5\n"
                               "M2,NCCN,Ir,3,K562,50\n");
  const auto map = dir.write("m.csv", "source_name,nci60_name\nMCF-7,MCF7\nHT29,HT29\nK562,K-562\n");
  const IngestResult r = ingest({org, inorg, map});
  EXPECT_EQ(r.shared_cell_lines, (std::vector<std::string>{"MCF7"}));
  ASSERT_EQ(r.organic.size(), 1u);
  EXPECT_EQ(r.organic[0].compound_id, "N1");
  ASSERT_EQ(r.inorganic.size(), 2u);
  EXPECT_NE(r.report_json.find("\"transferred\": 1"), std::string::npos);
  EXPECT_NE(r.report_json.find("not the 60-line"), std::string::npos);
}

TEST(Csv, QuotingAndNumbers) {
  std::ostringstream out;
  csv::write_row(out, {"a,b", "say \"hi\"", "plain", ""});
  std::istringstream in("h1,h2,h3,h4\n" + out.str());
  const csv::Table t = csv::Table::parse(in);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.row(0)[0], "a,b");
  EXPECT_EQ(t.row(0)[1], "say \"hi\"");
  EXPECT_EQ(t.row(0)[3], "");

  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) EXPECT_EQ(csv::to_double(csv::format_double(v)), v);
  EXPECT_FALSE(csv::to_double("1.5x"));
  EXPECT_FALSE(csv::to_double(""));
  EXPECT_EQ(csv::to_integer("-3"), -3);

  std::istringstream ragged("a,b\n1,2,3\n");
  try {
    csv::Table::parse(ragged);
    FAIL();
  } catch (const RowError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
