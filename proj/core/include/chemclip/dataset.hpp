#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chemclip/fingerprint.hpp"

namespace chemclip {

inline constexpr double kOrganicActiveThreshold = 50.0;    // mean GI%, strictly below is active
inline constexpr double kInorganicActiveThreshold = 10.0;  // IC50 in uM, strictly below is active

struct ActivityRecord {
  std::string record_id;
  std::string compound_id;
  Domain domain = Domain::kOrganic;
  std::string smiles;  // ligand SMILES for inorganic records
  std::optional<std::string> metal;
  std::optional<int> oxidation_state;
  std::string cell_line;
  double raw_value = 0.0;  // mean GI% (organic) or IC50 in uM (inorganic)
  bool active = false;
};

bool organic_active(double gi_mean);
bool inorganic_active(double ic50_um);

struct LoadReport {
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t dropped_unparseable = 0;
};

struct LoadResult {
  std::vector<ActivityRecord> records;
  LoadReport report;
};

// Columns compound_id, smiles, cell_line, gi_mean (record_id optional).
LoadResult load_organic_csv(const std::filesystem::path& path);
// Columns compound_id, ligand_smiles, metal, oxidation_state, cell_line,
// ic50_um (record_id optional).
LoadResult load_inorganic_csv(const std::filesystem::path& path);

class CellLineMap {
 public:
  CellLineMap() = default;
  explicit CellLineMap(std::vector<std::pair<std::string, std::string>> entries);

  static CellLineMap load_csv(const std::filesystem::path& path);  // source_name,nci60_name

  // Uppercase, then strip spaces, hyphens and parentheses.
  static std::string normalize(std::string_view name);

  // Standard names always resolve to themselves.
  std::optional<std::string> lookup(std::string_view name) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::string> index_;
};

struct StandardizeResult {
  std::vector<ActivityRecord> records;
  std::size_t dropped = 0;
};

StandardizeResult standardize_cell_lines(std::vector<ActivityRecord> records, const CellLineMap& map);

struct SharedCellLines {
  std::vector<ActivityRecord> organic;
  std::vector<ActivityRecord> inorganic;
  std::vector<std::string> shared;  // sorted
  std::size_t dropped_organic = 0;
  std::size_t dropped_inorganic = 0;
};

SharedCellLines filter_shared_cell_lines(std::vector<ActivityRecord> organic, std::vector<ActivityRecord> inorganic);

struct MetalTransfer {
  std::vector<ActivityRecord> organic;
  std::vector<ActivityRecord> transferred;
  std::size_t multi_metal = 0;
  std::size_t dropped_no_ligand = 0;
};

// Moves organic records whose structure contains one of the ten metals into
// the inorganic domain. The first metal atom supplies metal and oxidation
// state; every metal atom is stripped from the ligand SMILES. The activity
// label is carried over unchanged.
MetalTransfer transfer_metal_records(std::vector<ActivityRecord> organic);

enum class Split { kTrain, kVal, kTest };
std::string_view split_name(Split split);
Split parse_split(std::string_view text);

struct SplitFractions {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

struct DatasetSplit {
  std::map<std::string, Split> assignment;
  std::uint64_t seed = 0;

  std::optional<Split> find(const std::string& compound_id) const;
  std::size_t count(Split split) const;
};

// Shuffles the unique compound ids (sorted first, so input order does not
// matter) and cuts them by largest-remainder apportionment of the fractions.
DatasetSplit compound_split(std::span<const ActivityRecord> records, std::uint64_t seed,
                            SplitFractions fractions = {});

// Splits each domain's compounds separately (so both domains meet the
// fractions) and merges the assignments. Ids present in both domains keep the
// organic assignment.
DatasetSplit domain_split(std::span<const ActivityRecord> organic, std::span<const ActivityRecord> inorganic,
                          std::uint64_t seed, SplitFractions fractions = {});

// Partition sizes used by compound_split for n compounds: train, val, test.
std::array<std::size_t, 3> split_sizes(std::size_t n, SplitFractions fractions = {});

// Compound-level subsampling: a compound is active when any of its records
// is. Every active compound is kept; inactive compounds are drawn without
// replacement up to ratio x (active compound count).
std::vector<ActivityRecord> subsample_inactives(std::span<const ActivityRecord> records, double ratio,
                                                std::uint64_t seed);

// compound_id,split rows in compound order.
void write_split_csv(const std::filesystem::path& path, const DatasetSplit& split);
DatasetSplit read_split_csv(const std::filesystem::path& path);

std::vector<ActivityRecord> select_split(std::span<const ActivityRecord> records, const DatasetSplit& split,
                                         Split which);

// Normalised record store used between pipeline stages. Columns:
// record_id,compound_id,domain,smiles,metal,oxidation_state,cell_line,raw_value,active
void write_records_csv(const std::filesystem::path& path, std::span<const ActivityRecord> records);
std::vector<ActivityRecord> read_records_csv(const std::filesystem::path& path);

struct IngestInputs {
  std::filesystem::path organic_csv;
  std::filesystem::path inorganic_csv;
  std::filesystem::path cell_map_csv;
};

struct IngestResult {
  std::vector<ActivityRecord> organic;
  std::vector<ActivityRecord> inorganic;
  std::vector<std::string> shared_cell_lines;
  std::string report_json;  // pretty-printed counts per rule
};

IngestResult ingest(const IngestInputs& inputs);

}  // namespace chemclip
