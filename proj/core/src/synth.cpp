#include "chemclip/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "chemclip/csv.hpp"
#include "chemclip/error.hpp"
#include "chemclip/rng.hpp"

namespace chemclip {
namespace {

struct LineName {
  const char* standard;
  const char* variant;  // spelling used by the inorganic file
};

constexpr LineName kLines[] = {
    {"MCF7", "MCF-7"},         {"HCT-116", "HCT116"},     {"A549/ATCC", "A549"},   {"SK-MEL-28", "SKMEL28"},
    {"OVCAR-3", "OVCAR3"},     {"K-562", "K562"},         {"PC-3", "PC3"},         {"786-0", "786-O"},
    {"SF-295", "SF295"},       {"NCI-H460", "H460"},      {"HT29", "HT-29"},       {"UACC-62", "UACC62"},
    {"OVCAR-8", "OVCAR8"},     {"HL-60(TB)", "HL-60"},    {"DU-145", "DU145"},     {"A498", "A-498"},
    {"SNB-75", "SNB75"},       {"NCI-H226", "H226"},      {"SW-620", "SW620"},     {"MALME-3M", "MALME3M"},
};
constexpr std::size_t kMaxLines = std::size(kLines);

// Alkyl and aryl units only; they carry no N or O, so the pharmacophore is
// the only source of either element. Family 0 chains always contain an aryl
// unit and family 1 chains never do, so a compound's family (and with it the
// cell lines it was screened on) is visible in its structure whatever its
// activity.
constexpr const char* kAlkyl[] = {"C", "CC", "C(C)", "C(C)C", "CCC", "C1CCCCC1", "C1CCCC1", "C(C)(C)"};
constexpr const char* kAryl[] = {"c1ccccc1", "c1ccc(C)cc1", "c1ccc(CC)cc1"};

struct MetalSpec {
  const char* symbol;
  int oxidation_state;
  double weight;
};

// Ru, Ti and Ir dominate as in real metallodrug screens; the remaining mass is
// spread evenly.
constexpr double kRest = (1.0 - 0.52 - 0.176 - 0.099) / 7.0;
constexpr MetalSpec kMetals[] = {{"Ru", 2, 0.52},  {"Ti", 4, 0.176}, {"Ir", 3, 0.099}, {"Au", 3, kRest},
                                 {"Co", 3, kRest}, {"Cu", 2, kRest}, {"Os", 2, kRest}, {"Pt", 2, kRest},
                                 {"Re", 1, kRest}, {"Rh", 3, kRest}};

std::string build_molecule(SplitMix64& rng, bool with_pharmacophore, int family) {
  const std::size_t n_units = 2 + rng.below(5);
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < n_units; ++i) {
    const bool aryl = family == 0 && (i == 0 || rng.bernoulli(0.3));
    parts.emplace_back(aryl ? kAryl[rng.below(std::size(kAryl))] : kAlkyl[rng.below(std::size(kAlkyl))]);
  }
  shuffle(std::span<std::string>(parts), rng);
  if (with_pharmacophore) {
    const std::size_t pos = rng.below(n_units + 1);
    parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(pos), "C(" + std::string(kPharmacophores[family]) + ")");
  }
  std::string out;
  for (const auto& p : parts) out += p;
  return out;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// Readout on the requested side of the activity threshold.
std::string organic_value(SplitMix64& rng, bool active) {
  return fixed3(active ? rng.uniform(-20.0, 49.0) : rng.uniform(51.0, 120.0));
}

std::string inorganic_value(SplitMix64& rng, bool active) {
  const double log_ic50 = active ? rng.uniform(-1.0, 0.97) : rng.uniform(1.03, 2.5);
  return fixed3(std::pow(10.0, log_ic50));
}

bool draw_label(SplitMix64& rng, bool has_fragment, const SynthConfig& cfg) {
  const double p = has_fragment ? 0.5 + cfg.signal / 2.0 : 0.5 - cfg.signal / 2.0;
  bool active = rng.bernoulli(p);
  if (rng.bernoulli(cfg.label_noise)) active = !active;
  return active;
}

struct Compound {
  std::string smiles;
  int family = 0;
  bool has_fragment = false;
  std::vector<std::size_t> lines;
};

std::vector<Compound> make_compounds(SplitMix64& rng, std::size_t n, const std::vector<std::vector<std::size_t>>& families,
                                     std::set<std::string>& seen) {
  std::vector<Compound> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Compound c;
    c.family = static_cast<int>(rng.below(2));
    c.has_fragment = rng.bernoulli(0.5);
    for (int attempt = 0; attempt < 64; ++attempt) {
      c.smiles = build_molecule(rng, c.has_fragment, c.family);
      if (seen.insert(c.smiles).second) break;
    }
    c.lines = families[c.family];
    out.push_back(std::move(c));
  }
  return out;
}

std::string id(char prefix, char kind, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%c%0*zu", prefix, kind, width, n);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_organic < 4 || n_inorganic < 4) throw Error(ErrorCode::kInvalidArgument, "synth needs at least 4 compounds per domain");
  if (n_cell_lines < 2 || n_cell_lines > kMaxLines) {
    throw Error(ErrorCode::kInvalidArgument, "n_cell_lines must be in [2, " + std::to_string(kMaxLines) + "]");
  }
  if (!(signal >= 0.0 && signal <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "signal must be in [0, 1]");
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "label_noise must be in [0, 1]");
}

SynthCorpus generate_synthetic(const SynthConfig& config) {
  config.validate();
  SynthCorpus corpus;
  std::vector<std::vector<std::size_t>> families(2);
  for (std::size_t l = 0; l < config.n_cell_lines; ++l) {
    families[l % 2].push_back(l);
    corpus.cell_lines.emplace_back(kLines[l].standard);
  }

  SplitMix64 root(config.seed);
  SplitMix64 org_rng = root.fork(1);
  SplitMix64 inorg_rng = root.fork(2);
  std::set<std::string> seen;

  std::ostringstream org;
  csv::write_row(org, {"record_id", "compound_id", "smiles", "cell_line", "gi_mean"});
  std::size_t record = 0;
  const auto organics = make_compounds(org_rng, config.n_organic, families, seen);
  for (std::size_t i = 0; i < organics.size(); ++i) {
    const Compound& c = organics[i];
    for (std::size_t line : c.lines) {
      const bool active = draw_label(org_rng, c.has_fragment, config);
      csv::write_row(org, {id('O', 'R', ++record, 6), id('O', 'C', i + 1, 5), c.smiles, kLines[line].standard,
                           organic_value(org_rng, active)});
    }
  }

  std::ostringstream inorg;
  csv::write_row(inorg, {"record_id", "compound_id", "ligand_smiles", "metal", "oxidation_state", "cell_line", "ic50_um"});
  record = 0;
  const auto inorganics = make_compounds(inorg_rng, config.n_inorganic, families, seen);
  for (std::size_t i = 0; i < inorganics.size(); ++i) {
    const Compound& c = inorganics[i];
    double u = inorg_rng.uniform();
    std::size_t m = 0;
    while (m + 1 < std::size(kMetals) && u >= kMetals[m].weight) u -= kMetals[m++].weight;
    for (std::size_t line : c.lines) {
      const bool active = draw_label(inorg_rng, c.has_fragment, config);
      csv::write_row(inorg, {id('I', 'R', ++record, 6), id('I', 'C', i + 1, 5), c.smiles, kMetals[m].symbol,
                             std::to_string(kMetals[m].oxidation_state), kLines[line].variant,
                             inorganic_value(inorg_rng, active)});
    }
  }

  std::ostringstream map;
  csv::write_row(map, {"source_name", "nci60_name"});
  for (std::size_t l = 0; l < config.n_cell_lines; ++l) {
    csv::write_row(map, {kLines[l].standard, kLines[l].standard});
    csv::write_row(map, {kLines[l].variant, kLines[l].standard});
  }

  corpus.organic_csv = org.str();
  corpus.inorganic_csv = inorg.str();
  corpus.cell_map_csv = map.str();
  return corpus;
}

void write_synthetic(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);
  const std::pair<const char*, const std::string*> files[] = {
      {"organic.csv", &corpus.organic_csv}, {"inorganic.csv", &corpus.inorganic_csv}, {"cell_map.csv", &corpus.cell_map_csv}};
  for (const auto& [name, content] : files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    out << *content;
  }
}

}  // namespace chemclip
