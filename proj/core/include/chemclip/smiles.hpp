#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chemclip {

enum class BondOrder : std::uint8_t { kSingle = 1, kDouble = 2, kTriple = 3, kAromatic = 4 };

struct Atom {
  std::string element;  // IUPAC symbol, canonical capitalisation ("C", "Cl", "Pt")
  int atomic_number = 0;
  int formal_charge = 0;
  std::optional<int> isotope;
  bool aromatic = false;
  std::optional<int> explicit_h;  // set only for bracket atoms
  bool in_ring = false;

  bool bracket() const { return explicit_h.has_value(); }
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;
};

struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string source;

  // Indices of bonds incident to each atom, in bond order.
  std::vector<std::vector<int>> adjacency() const;
  int other_end(const Bond& bond, int atom) const { return bond.begin == atom ? bond.end : bond.begin; }
};

// Atomic number for a canonically capitalised symbol, or 0 if unknown.
int atomic_number(std::string_view symbol);
std::string_view element_symbol(int atomic_number);

// Parses the supported SMILES subset: organic-subset and aromatic atoms,
// bracket atoms (isotope, charge, H count, atom class), branches, ring
// closures including %nn, dot disconnection and the bond symbols - = # : / \.
// Stereo markers are accepted and dropped. Throws SmilesError.
MolGraph parse_smiles(std::string_view text);

// Hydrogens not represented as graph atoms: the bracket count for bracket
// atoms, otherwise the default-valence deficit (aromatic bonds count 1.5).
int implicit_hydrogens(const MolGraph& graph, int atom_index);

// Implicit hydrogens plus explicit [H] neighbours.
int total_hydrogens(const MolGraph& graph, int atom_index);

// Marks every atom incident to a non-bridge edge as in_ring.
void assign_ring_membership(MolGraph& graph);

// The ten transition metals covered by the metal feature encoding, in
// alphabetical order.
inline constexpr std::string_view kMetalSymbols[] = {"Au", "Co", "Cu", "Ir", "Os",
                                                     "Pt", "Re", "Rh", "Ru", "Ti"};

bool contains_metal(const MolGraph& graph, std::span<const std::string_view> metal_set = kMetalSymbols);

// Returns a copy of the graph with the listed atoms (and their bonds) removed.
MolGraph remove_atoms(const MolGraph& graph, std::span<const int> atom_indices);

// Emits a non-canonical SMILES string that parses back to an isomorphic graph.
std::string write_smiles(const MolGraph& graph);

}  // namespace chemclip
