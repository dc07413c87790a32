#include <gtest/gtest.h>

#include <algorithm>
#include <tuple>
#include <vector>

#include "chemclip/error.hpp"
#include "chemclip/rng.hpp"
#include "chemclip/smiles.hpp"

using namespace chemclip;

namespace {

using AtomKey = std::tuple<std::string, std::size_t, int, int, bool>;

std::vector<AtomKey> atom_keys(const MolGraph& g) {
  const auto adj = g.adjacency();
  std::vector<AtomKey> keys;
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    keys.emplace_back(g.atoms[i].element, adj[i].size(), total_hydrogens(g, static_cast<int>(i)),
                      g.atoms[i].formal_charge, g.atoms[i].in_ring);
  }
  return keys;
}

// Graph signature that is unchanged by atom relabelling: sorted atom
// invariants plus the sorted multiset of (invariant, invariant, order) edges.
std::pair<std::vector<AtomKey>, std::vector<std::tuple<AtomKey, AtomKey, int>>> signature(const MolGraph& g) {
  const auto keys = atom_keys(g);
  std::vector<std::tuple<AtomKey, AtomKey, int>> edges;
  for (const auto& b : g.bonds) {
    AtomKey a = keys[b.begin], c = keys[b.end];
    if (c < a) std::swap(a, c);
    edges.emplace_back(a, c, static_cast<int>(b.order));
  }
  auto sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  std::sort(edges.begin(), edges.end());
  return {sorted, edges};
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

std::size_t offset_of(std::string_view text) {
  try {
    parse_smiles(text);
  } catch (const SmilesError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no exception for " << text;
  return 0;
}

}  // namespace

TEST(ParseSmiles, Ethanol) {
  const MolGraph g = parse_smiles("CCO");
  ASSERT_EQ(g.atoms.size(), 3u);
  EXPECT_EQ(g.atoms[0].element, "C");
  EXPECT_EQ(g.atoms[1].element, "C");
  EXPECT_EQ(g.atoms[2].element, "O");
  ASSERT_EQ(g.bonds.size(), 2u);
  for (const auto& b : g.bonds) EXPECT_EQ(b.order, BondOrder::kSingle);
  for (const auto& a : g.atoms) EXPECT_FALSE(a.in_ring);
}

TEST(ParseSmiles, Benzene) {
  const MolGraph g = parse_smiles("c1ccccc1");
  ASSERT_EQ(g.atoms.size(), 6u);
  ASSERT_EQ(g.bonds.size(), 6u);
  for (const auto& a : g.atoms) {
    EXPECT_TRUE(a.aromatic);
    EXPECT_TRUE(a.in_ring);
    EXPECT_EQ(a.element, "C");
  }
  for (const auto& b : g.bonds) EXPECT_EQ(b.order, BondOrder::kAromatic);
}

TEST(ParseSmiles, BracketAtoms) {
  const MolGraph pt = parse_smiles("[Pt+2]");
  ASSERT_EQ(pt.atoms.size(), 1u);
  EXPECT_EQ(pt.atoms[0].element, "Pt");
  EXPECT_EQ(pt.atoms[0].formal_charge, 2);
  EXPECT_EQ(pt.atoms[0].atomic_number, 78);

  const MolGraph iso = parse_smiles("[13CH3-]");
  EXPECT_EQ(iso.atoms[0].isotope, 13);
  EXPECT_EQ(iso.atoms[0].explicit_h, 3);
  EXPECT_EQ(iso.atoms[0].formal_charge, -1);

  EXPECT_EQ(parse_smiles("[Fe++]").atoms[0].formal_charge, 2);
  EXPECT_EQ(parse_smiles("[O--]").atoms[0].formal_charge, -2);
  EXPECT_EQ(parse_smiles("[NH4+]").atoms[0].explicit_h, 4);
}

TEST(ParseSmiles, BranchesRingsAndDots) {
  const MolGraph g = parse_smiles("CC(C)(C)C");
  EXPECT_EQ(g.atoms.size(), 5u);
  EXPECT_EQ(g.adjacency()[1].size(), 4u);

  const MolGraph two_digit = parse_smiles("C%12CCCC%12");
  EXPECT_EQ(two_digit.bonds.size(), 5u);
  for (const auto& a : two_digit.atoms) EXPECT_TRUE(a.in_ring);

  const MolGraph dotted = parse_smiles("C1=CC=CC=C1.[Pt+2]");
  EXPECT_EQ(dotted.atoms.size(), 7u);
  EXPECT_EQ(dotted.bonds.size(), 6u);
  EXPECT_FALSE(dotted.atoms[6].in_ring);

  const MolGraph bonds = parse_smiles("C=CC#N");
  EXPECT_EQ(bonds.bonds[0].order, BondOrder::kDouble);
  EXPECT_EQ(bonds.bonds[2].order, BondOrder::kTriple);
}

TEST(ParseSmiles, StereoIsDiscarded) {
  const auto a = signature(parse_smiles("F/C=C/F"));
  const auto b = signature(parse_smiles("FC=CF"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(signature(parse_smiles("N[C@@H](C)C(=O)O")), signature(parse_smiles("NC(C)C(=O)O")));
}

TEST(ParseSmiles, RingMembershipOnFusedAndBridgedSystems) {
  // Biphenyl: the linking bond is a bridge, both rings are rings.
  const MolGraph g = parse_smiles("c1ccccc1-c1ccccc1");
  for (const auto& a : g.atoms) EXPECT_TRUE(a.in_ring);
  // Ethylbenzene side chain atoms are not ring atoms.
  const MolGraph e = parse_smiles("CCc1ccccc1");
  EXPECT_FALSE(e.atoms[0].in_ring);
  EXPECT_FALSE(e.atoms[1].in_ring);
  EXPECT_TRUE(e.atoms[2].in_ring);
}

TEST(ParseSmiles, Errors) {
  EXPECT_EQ(code_of([] { parse_smiles("C("); }), ErrorCode::kUnbalancedParenthesis);
  EXPECT_EQ(offset_of("C("), 1u);
  EXPECT_EQ(code_of([] { parse_smiles("C)"); }), ErrorCode::kUnbalancedParenthesis);
  EXPECT_EQ(code_of([] { parse_smiles("C1CC"); }), ErrorCode::kUnclosedRingBond);
  EXPECT_EQ(code_of([] { parse_smiles("[Xx]"); }), ErrorCode::kUnknownElement);
  EXPECT_EQ(code_of([] { parse_smiles("Q"); }), ErrorCode::kUnknownElement);
  EXPECT_EQ(code_of([] { parse_smiles("C="); }), ErrorCode::kDanglingBondSymbol);
  EXPECT_EQ(offset_of("C="), 1u);
  EXPECT_THROW(parse_smiles(""), Error);
  EXPECT_THROW(parse_smiles("C11"), Error);
}

TEST(ParseSmiles, RingDigitsAreConsumedInPairs) {
  // Reusing a digit after closing it opens a fresh ring.
  const MolGraph g = parse_smiles("C1CC1C1CC1");
  EXPECT_EQ(g.bonds.size(), 7u);
  EXPECT_EQ(code_of([] { parse_smiles("C1CC1C1"); }), ErrorCode::kUnclosedRingBond);
}

TEST(ImplicitHydrogens, ValenceTable) {
  const MolGraph g = parse_smiles("CCO");
  EXPECT_EQ(implicit_hydrogens(g, 2), 1);
  EXPECT_EQ(implicit_hydrogens(g, 0), 3);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("C"), 0), 4);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("[PtH2]"), 0), 2);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("[Pt]"), 0), 0);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("c1ccccc1"), 0), 1);  // floor(1.5 + 1.5) = 3
  EXPECT_EQ(implicit_hydrogens(parse_smiles("Cl"), 0), 1);
  EXPECT_EQ(implicit_hydrogens(parse_smiles("C(C)(C)(C)(C)C"), 0), 0);  // clamped
}

TEST(ContainsMetal, DefaultSet) {
  EXPECT_FALSE(contains_metal(parse_smiles("CCO")));
  EXPECT_TRUE(contains_metal(parse_smiles("[Ru+2]")));
  EXPECT_TRUE(contains_metal(parse_smiles("C1=CC=CC=C1.[Pt+2]")));
  EXPECT_FALSE(contains_metal(parse_smiles("[Fe+3]")));
  const std::string_view iron[] = {"Fe"};
  EXPECT_TRUE(contains_metal(parse_smiles("[Fe+3]"), iron));
}

TEST(RemoveAtoms, StripsMetalComponent) {
  const MolGraph g = parse_smiles("[Pt+2].NCCN");
  const int metal[] = {0};
  const MolGraph ligand = remove_atoms(g, metal);
  EXPECT_EQ(ligand.atoms.size(), 4u);
  EXPECT_EQ(signature(parse_smiles(ligand.source)), signature(parse_smiles("NCCN")));
}

TEST(WriteSmiles, RoundTripPreservesGraph) {
  for (const char* s : {"CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "[Pt+2].NCCN", "C1CC2CCC1CC2", "[13CH3-]",
                        "N#Cc1ccc(cc1)C(F)(F)F", "C%10CC%10"}) {
    const MolGraph g = parse_smiles(s);
    EXPECT_EQ(signature(parse_smiles(write_smiles(g))), signature(g)) << s << " -> " << write_smiles(g);
  }
}

TEST(ParseSmilesProperty, EquivalentSpellingsAreIsomorphic) {
  const auto ref = signature(parse_smiles("CCO"));
  EXPECT_EQ(signature(parse_smiles("OCC")), ref);
  EXPECT_EQ(signature(parse_smiles("C(O)C")), ref);
}

TEST(ParseSmilesProperty, RingMembershipInvariantUnderRelabelling) {
  const MolGraph base = parse_smiles("CC1CCC(CC1)c1ccc2ccccc2c1CCN");
  SplitMix64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> perm(base.atoms.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    shuffle(std::span<int>(perm), rng);
    MolGraph g;
    g.atoms.resize(base.atoms.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      g.atoms[perm[i]] = base.atoms[i];
      g.atoms[perm[i]].in_ring = false;
    }
    for (const auto& b : base.bonds) g.bonds.push_back({perm[b.begin], perm[b.end], b.order});
    assign_ring_membership(g);
    for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(g.atoms[perm[i]].in_ring, base.atoms[i].in_ring);
  }
}
