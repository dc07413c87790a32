#include "chemclip/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "chemclip/csv.hpp"
#include "chemclip/error.hpp"
#include "chemclip/log.hpp"
#include "chemclip/rng.hpp"

namespace chemclip {

bool organic_active(double gi_mean) { return gi_mean < kOrganicActiveThreshold; }
bool inorganic_active(double ic50_um) { return ic50_um < kInorganicActiveThreshold; }

namespace {

bool parses(const std::string& smiles) {
  try {
    parse_smiles(smiles);
    return true;
  } catch (const SmilesError&) {
    return false;
  }
}

std::string field_or(const csv::Table& table, std::size_t row, std::optional<std::size_t> col,
                     const std::string& fallback) {
  if (!col) return fallback;
  return table.row(row)[*col];
}

double require_double(const csv::Table& table, std::size_t row, std::size_t col) {
  const auto value = csv::to_double(table.row(row)[col]);
  if (!value || !std::isfinite(*value)) {
    throw RowError(ErrorCode::kMalformedRow, table.line(row),
                   "'" + table.header()[col] + "' is not a number: '" + table.row(row)[col] + "'");
  }
  return *value;
}

}  // namespace

LoadResult load_organic_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::Table::read(path);
  const std::size_t c_compound = table.column("compound_id");
  const std::size_t c_smiles = table.column("smiles");
  const std::size_t c_cell = table.column("cell_line");
  const std::size_t c_gi = table.column("gi_mean");
  const auto c_record = table.find_column("record_id");

  LoadResult result;
  result.report.rows = table.size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table.row(i);
    const double gi = require_double(table, i, c_gi);
    if (row[c_compound].empty()) throw RowError(ErrorCode::kMalformedRow, table.line(i), "empty compound_id");
    if (!parses(row[c_smiles])) {
      ++result.report.dropped_unparseable;
      continue;
    }
    ActivityRecord rec;
    rec.record_id = field_or(table, i, c_record, "O" + std::to_string(table.line(i)));
    rec.compound_id = row[c_compound];
    rec.domain = Domain::kOrganic;
    rec.smiles = row[c_smiles];
    rec.cell_line = row[c_cell];
    rec.raw_value = gi;
    rec.active = organic_active(gi);
    result.records.push_back(std::move(rec));
  }
  result.report.kept = result.records.size();
  if (result.report.dropped_unparseable > 0) {
    log_warning(path.string() + ": dropped " + std::to_string(result.report.dropped_unparseable) +
                " rows with unparseable SMILES");
  }
  return result;
}

LoadResult load_inorganic_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::Table::read(path);
  const std::size_t c_compound = table.column("compound_id");
  const std::size_t c_smiles = table.column("ligand_smiles");
  const std::size_t c_metal = table.column("metal");
  const std::size_t c_ox = table.column("oxidation_state");
  const std::size_t c_cell = table.column("cell_line");
  const std::size_t c_ic50 = table.column("ic50_um");
  const auto c_record = table.find_column("record_id");

  LoadResult result;
  result.report.rows = table.size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table.row(i);
    const double ic50 = require_double(table, i, c_ic50);
    if (row[c_compound].empty()) throw RowError(ErrorCode::kMalformedRow, table.line(i), "empty compound_id");
    try {
      metal_index(row[c_metal]);
    } catch (const Error&) {
      throw RowError(ErrorCode::kUnknownMetal, table.line(i), "unsupported metal '" + row[c_metal] + "'");
    }
    int ox = 0;
    if (!row[c_ox].empty()) {
      const auto parsed = csv::to_integer(row[c_ox]);
      if (!parsed) {
        throw RowError(ErrorCode::kMalformedRow, table.line(i), "oxidation_state is not an integer: '" + row[c_ox] + "'");
      }
      ox = static_cast<int>(*parsed);
    }
    if (!parses(row[c_smiles])) {
      ++result.report.dropped_unparseable;
      continue;
    }
    ActivityRecord rec;
    rec.record_id = field_or(table, i, c_record, "I" + std::to_string(table.line(i)));
    rec.compound_id = row[c_compound];
    rec.domain = Domain::kInorganic;
    rec.smiles = row[c_smiles];
    rec.metal = row[c_metal];
    rec.oxidation_state = ox;
    rec.cell_line = row[c_cell];
    rec.raw_value = ic50;
    rec.active = inorganic_active(ic50);
    result.records.push_back(std::move(rec));
  }
  result.report.kept = result.records.size();
  if (result.report.dropped_unparseable > 0) {
    log_warning(path.string() + ": dropped " + std::to_string(result.report.dropped_unparseable) +
                " rows with unparseable ligand SMILES");
  }
  return result;
}

CellLineMap::CellLineMap(std::vector<std::pair<std::string, std::string>> entries) : entries_(std::move(entries)) {
  for (const auto& [source, target] : entries_) index_.emplace(normalize(target), target);
  for (const auto& [source, target] : entries_) index_[normalize(source)] = target;
}

CellLineMap CellLineMap::load_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::Table::read(path);
  const std::size_t c_source = table.column("source_name");
  const std::size_t c_target = table.column("nci60_name");
  std::vector<std::pair<std::string, std::string>> entries;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.row(i)[c_target].empty()) throw RowError(ErrorCode::kMalformedRow, table.line(i), "empty nci60_name");
    entries.emplace_back(table.row(i)[c_source], table.row(i)[c_target]);
  }
  return CellLineMap(std::move(entries));
}

std::string CellLineMap::normalize(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (c == ' ' || c == '-' || c == '(' || c == ')') continue;
    out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::optional<std::string> CellLineMap::lookup(std::string_view name) const {
  const auto it = index_.find(normalize(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StandardizeResult standardize_cell_lines(std::vector<ActivityRecord> records, const CellLineMap& map) {
  StandardizeResult result;
  result.records.reserve(records.size());
  for (auto& rec : records) {
    if (auto standard = map.lookup(rec.cell_line)) {
      rec.cell_line = *standard;
      result.records.push_back(std::move(rec));
    } else {
      ++result.dropped;
    }
  }
  return result;
}

SharedCellLines filter_shared_cell_lines(std::vector<ActivityRecord> organic, std::vector<ActivityRecord> inorganic) {
  std::set<std::string> org_lines, inorg_lines;
  for (const auto& r : organic) org_lines.insert(r.cell_line);
  for (const auto& r : inorganic) inorg_lines.insert(r.cell_line);
  SharedCellLines out;
  std::set_intersection(org_lines.begin(), org_lines.end(), inorg_lines.begin(), inorg_lines.end(),
                        std::back_inserter(out.shared));
  if (out.shared.empty()) log_warning("organic and inorganic corpora share no cell lines");
  const std::set<std::string> shared(out.shared.begin(), out.shared.end());
  for (auto& r : organic) {
    if (shared.contains(r.cell_line)) {
      out.organic.push_back(std::move(r));
    } else {
      ++out.dropped_organic;
    }
  }
  for (auto& r : inorganic) {
    if (shared.contains(r.cell_line)) {
      out.inorganic.push_back(std::move(r));
    } else {
      ++out.dropped_inorganic;
    }
  }
  return out;
}

MetalTransfer transfer_metal_records(std::vector<ActivityRecord> organic) {
  MetalTransfer out;
  for (auto& rec : organic) {
    MolGraph graph;
    try {
      graph = parse_smiles(rec.smiles);
    } catch (const SmilesError&) {
      out.organic.push_back(std::move(rec));
      continue;
    }
    std::vector<int> metal_atoms;
    for (std::size_t a = 0; a < graph.atoms.size(); ++a) {
      const auto& el = graph.atoms[a].element;
      if (std::find(std::begin(kMetalSymbols), std::end(kMetalSymbols), el) != std::end(kMetalSymbols)) {
        metal_atoms.push_back(static_cast<int>(a));
      }
    }
    if (metal_atoms.empty()) {
      out.organic.push_back(std::move(rec));
      continue;
    }
    if (metal_atoms.size() > 1) {
      ++out.multi_metal;
      log_warning("record " + rec.record_id + " contains " + std::to_string(metal_atoms.size()) +
                  " metal atoms; using the first");
    }
    const Atom& first = graph.atoms[metal_atoms.front()];
    const MolGraph ligand = remove_atoms(graph, metal_atoms);
    if (ligand.atoms.empty()) {
      ++out.dropped_no_ligand;
      continue;
    }
    rec.domain = Domain::kInorganic;
    rec.metal = first.element;
    rec.oxidation_state = first.formal_charge;
    rec.smiles = ligand.source;
    out.transferred.push_back(std::move(rec));
  }
  return out;
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument, "unknown split '" + std::string(text) + "'");
}

std::optional<Split> DatasetSplit::find(const std::string& compound_id) const {
  const auto it = assignment.find(compound_id);
  if (it == assignment.end()) return std::nullopt;
  return it->second;
}

std::size_t DatasetSplit::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(assignment.begin(), assignment.end(), [&](const auto& kv) { return kv.second == split; }));
}

std::array<std::size_t, 3> split_sizes(std::size_t n, SplitFractions fractions) {
  const double total = fractions.train + fractions.val + fractions.test;
  if (!(total > 0.0) || fractions.train < 0 || fractions.val < 0 || fractions.test < 0) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must be non-negative with a positive sum");
  }
  const std::array<double, 3> quota = {fractions.train / total * static_cast<double>(n),
                                       fractions.val / total * static_cast<double>(n),
                                       fractions.test / total * static_cast<double>(n)};
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    sizes[k] = static_cast<std::size_t>(std::floor(quota[k] + 1e-9));
    remainder[k] = quota[k] - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  // Largest remainder first; ties go to the later partition.
  std::array<int, 3> order = {2, 1, 0};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b] + 1e-9; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[order[i % 3]];
  return sizes;
}

DatasetSplit compound_split(std::span<const ActivityRecord> records, std::uint64_t seed, SplitFractions fractions) {
  std::set<std::string> unique;
  for (const auto& r : records) unique.insert(r.compound_id);
  std::vector<std::string> ids(unique.begin(), unique.end());
  SplitMix64 rng(seed);
  shuffle(std::span<std::string>(ids), rng);

  const auto sizes = split_sizes(ids.size(), fractions);
  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Split s = i < sizes[0] ? Split::kTrain : i < sizes[0] + sizes[1] ? Split::kVal : Split::kTest;
    split.assignment.emplace(ids[i], s);
  }
  return split;
}

DatasetSplit domain_split(std::span<const ActivityRecord> organic, std::span<const ActivityRecord> inorganic,
                          std::uint64_t seed, SplitFractions fractions) {
  DatasetSplit split = compound_split(organic, seed, fractions);
  const DatasetSplit inorg = compound_split(inorganic, SplitMix64(seed).fork(0x49)(), fractions);
  for (const auto& [id, which] : inorg.assignment) split.assignment.emplace(id, which);
  split.seed = seed;
  return split;
}

std::vector<ActivityRecord> subsample_inactives(std::span<const ActivityRecord> records, double ratio,
                                                std::uint64_t seed) {
  std::map<std::string, bool> compound_active;
  for (const auto& r : records) {
    auto [it, inserted] = compound_active.emplace(r.compound_id, r.active);
    if (!inserted) it->second = it->second || r.active;
  }
  std::vector<std::string> inactive;
  std::size_t n_active = 0;
  for (const auto& [id, active] : compound_active) {
    if (active) {
      ++n_active;
    } else {
      inactive.push_back(id);
    }
  }
  const auto cap = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n_active) + 1e-9));
  std::set<std::string> keep_inactive;
  if (inactive.size() <= cap) {
    keep_inactive.insert(inactive.begin(), inactive.end());
  } else {
    SplitMix64 rng(seed);
    shuffle(std::span<std::string>(inactive), rng);
    keep_inactive.insert(inactive.begin(), inactive.begin() + static_cast<std::ptrdiff_t>(cap));
  }
  std::vector<ActivityRecord> out;
  for (const auto& r : records) {
    if (compound_active.at(r.compound_id) || keep_inactive.contains(r.compound_id)) out.push_back(r);
  }
  return out;
}

std::vector<ActivityRecord> select_split(std::span<const ActivityRecord> records, const DatasetSplit& split,
                                         Split which) {
  std::vector<ActivityRecord> out;
  for (const auto& r : records) {
    if (split.find(r.compound_id) == which) out.push_back(r);
  }
  return out;
}

void write_records_csv(const std::filesystem::path& path, std::span<const ActivityRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  csv::write_row(out, {"record_id", "compound_id", "domain", "smiles", "metal", "oxidation_state", "cell_line",
                       "raw_value", "active"});
  for (const auto& r : records) {
    csv::write_row(out, {r.record_id, r.compound_id, std::string(domain_name(r.domain)), r.smiles,
                         r.metal.value_or(""), r.oxidation_state ? std::to_string(*r.oxidation_state) : "",
                         r.cell_line, csv::format_double(r.raw_value), r.active ? "1" : "0"});
  }
}

std::vector<ActivityRecord> read_records_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::Table::read(path);
  const std::size_t c_rec = table.column("record_id"), c_cmp = table.column("compound_id"),
                    c_dom = table.column("domain"), c_smi = table.column("smiles"), c_met = table.column("metal"),
                    c_ox = table.column("oxidation_state"), c_cell = table.column("cell_line"),
                    c_raw = table.column("raw_value"), c_act = table.column("active");
  std::vector<ActivityRecord> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table.row(i);
    ActivityRecord r;
    r.record_id = row[c_rec];
    r.compound_id = row[c_cmp];
    try {
      r.domain = parse_domain(row[c_dom]);
    } catch (const Error&) {
      throw RowError(ErrorCode::kMalformedRow, table.line(i), "bad domain '" + row[c_dom] + "'");
    }
    r.smiles = row[c_smi];
    if (r.domain == Domain::kInorganic) {
      r.metal = row[c_met];
      const auto ox = csv::to_integer(row[c_ox]);
      if (!ox) throw RowError(ErrorCode::kMalformedRow, table.line(i), "bad oxidation_state");
      r.oxidation_state = static_cast<int>(*ox);
    }
    r.cell_line = row[c_cell];
    r.raw_value = require_double(table, i, c_raw);
    if (row[c_act] != "0" && row[c_act] != "1") {
      throw RowError(ErrorCode::kMalformedRow, table.line(i), "active must be 0 or 1");
    }
    r.active = row[c_act] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

void write_split_csv(const std::filesystem::path& path, const DatasetSplit& split) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  csv::write_row(out, {"compound_id", "split"});
  for (const auto& [compound, which] : split.assignment) csv::write_row(out, {compound, std::string(split_name(which))});
}

DatasetSplit read_split_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::Table::read(path);
  const std::size_t c_cmp = table.column("compound_id"), c_split = table.column("split");
  DatasetSplit split;
  for (std::size_t i = 0; i < table.size(); ++i) {
    try {
      split.assignment[table.row(i)[c_cmp]] = parse_split(table.row(i)[c_split]);
    } catch (const Error& e) {
      throw RowError(ErrorCode::kMalformedRow, table.line(i), e.what());
    }
  }
  return split;
}

IngestResult ingest(const IngestInputs& inputs) {
  nlohmann::json report;
  auto organic = load_organic_csv(inputs.organic_csv);
  auto inorganic = load_inorganic_csv(inputs.inorganic_csv);
  report["organic_load"] = {{"rows", organic.report.rows},
                            {"kept", organic.report.kept},
                            {"dropped_unparseable_smiles", organic.report.dropped_unparseable}};
  report["inorganic_load"] = {{"rows", inorganic.report.rows},
                              {"kept", inorganic.report.kept},
                              {"dropped_unparseable_smiles", inorganic.report.dropped_unparseable}};

  auto transfer = transfer_metal_records(std::move(organic.records));
  report["metal_transfer"] = {{"transferred", transfer.transferred.size()},
                              {"multi_metal_records", transfer.multi_metal},
                              {"dropped_without_ligand", transfer.dropped_no_ligand}};
  std::vector<ActivityRecord> inorg = std::move(inorganic.records);
  inorg.insert(inorg.end(), std::make_move_iterator(transfer.transferred.begin()),
               std::make_move_iterator(transfer.transferred.end()));

  const CellLineMap map = CellLineMap::load_csv(inputs.cell_map_csv);
  auto org_std = standardize_cell_lines(std::move(transfer.organic), map);
  auto inorg_std = standardize_cell_lines(std::move(inorg), map);
  report["cell_line_standardization"] = {{"organic_dropped_unmapped", org_std.dropped},
                                         {"inorganic_dropped_unmapped", inorg_std.dropped}};

  auto shared = filter_shared_cell_lines(std::move(org_std.records), std::move(inorg_std.records));
  report["shared_cell_lines"] = {{"count", shared.shared.size()},
                                 {"names", shared.shared},
                                 {"organic_dropped", shared.dropped_organic},
                                 {"inorganic_dropped", shared.dropped_inorganic}};
  if (shared.shared.size() != 60) {
    report["notes"].push_back("shared cell-line count is " + std::to_string(shared.shared.size()) +
                              ", not the 60-line NCI60 panel");
  }

  auto summarize = [](const std::vector<ActivityRecord>& recs) {
    std::set<std::string> compounds, active_compounds;
    std::size_t active = 0;
    for (const auto& r : recs) {
      compounds.insert(r.compound_id);
      if (r.active) {
        ++active;
        active_compounds.insert(r.compound_id);
      }
    }
    return nlohmann::json{{"records", recs.size()},
                          {"unique_compounds", compounds.size()},
                          {"active_records", active},
                          {"inactive_records", recs.size() - active},
                          {"active_fraction", recs.empty() ? 0.0 : double(active) / double(recs.size())}};
  };
  report["organic_final"] = summarize(shared.organic);
  report["inorganic_final"] = summarize(shared.inorganic);

  IngestResult result;
  result.organic = std::move(shared.organic);
  result.inorganic = std::move(shared.inorganic);
  result.shared_cell_lines = std::move(shared.shared);
  result.report_json = report.dump(2);
  return result;
}

}  // namespace chemclip
