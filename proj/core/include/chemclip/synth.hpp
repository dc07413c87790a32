#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chemclip {

struct SynthConfig {
  std::size_t n_organic = 2000;
  std::size_t n_inorganic = 400;
  std::size_t n_cell_lines = 10;
  double signal = 0.9;
  double label_noise = 0.05;
  std::uint64_t seed = 0;

  void validate() const;  // throws Error(kInvalidArgument)
};

// Cell lines alternate between two families; family 0 responds to a nitro
// group, family 1 to a carboxylic acid. Every compound is assigned one family,
// is tested on all of that family's lines and carries the family's
// pharmacophore with probability 1/2. Family 0 chains contain an aryl unit,
// family 1 chains are aliphatic.
inline constexpr std::string_view kPharmacophores[2] = {"N(=O)=O", "C(=O)O"};

struct SynthCorpus {
  std::string organic_csv;    // record_id,compound_id,smiles,cell_line,gi_mean
  std::string inorganic_csv;  // record_id,compound_id,ligand_smiles,metal,oxidation_state,cell_line,ic50_um
  std::string cell_map_csv;   // source_name,nci60_name
  std::vector<std::string> cell_lines;
};

SynthCorpus generate_synthetic(const SynthConfig& config);

// Writes organic.csv, inorganic.csv and cell_map.csv into `dir` (created if needed).
void write_synthetic(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace chemclip
