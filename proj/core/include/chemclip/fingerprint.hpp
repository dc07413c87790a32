#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chemclip/smiles.hpp"

namespace chemclip {

inline constexpr std::size_t kFingerprintBits = 2048;
inline constexpr std::size_t kMetalFeatureCount = 13;
inline constexpr std::size_t kInorganicFeatureCount = kFingerprintBits + kMetalFeatureCount;

// 64-bit FNV-1a over a byte range.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

// FNV-1a over the little-endian 8-byte serialisation of each value.
std::uint64_t hash_tuple(std::span<const std::int64_t> values);

struct Fingerprint {
  std::vector<bool> bits;  // length nbits
  std::size_t n_distinct = 0;
  std::vector<std::uint64_t> identifiers;  // surviving environment ids, generation order

  std::size_t popcount() const;
  std::vector<std::size_t> on_bits() const;
};

// ECFP-style circular fingerprint. Atom invariants: atomic number, heavy
// degree, total H, formal charge, aromatic flag, ring flag. An environment is
// dropped when its bond set or its identifier was already produced; within
// one iteration candidates are visited in (bond set, identifier) order so the
// surviving ids do not depend on input atom order.
Fingerprint morgan_fingerprint(const MolGraph& graph, int radius = 2, std::size_t nbits = kFingerprintBits);

struct MetalFeatures {
  std::array<double, 10> one_hot{};
  double oxidation_state = 0.0;
  double atomic_number_scaled = 0.0;
  double valence_electrons_scaled = 0.0;

  std::array<double, kMetalFeatureCount> values() const;
};

// Index of a metal in kMetalSymbols; throws Error(kUnknownMetal).
std::size_t metal_index(std::string_view metal);

MetalFeatures metal_feature_vector(std::string_view metal, int oxidation_state);

enum class Domain { kOrganic, kInorganic };

std::string_view domain_name(Domain domain);
Domain parse_domain(std::string_view text);

struct FeatureVector {
  std::vector<double> values;
  Domain domain = Domain::kOrganic;
};

FeatureVector featurize_organic(std::string_view smiles);
FeatureVector featurize_inorganic(std::string_view ligand_smiles, std::string_view metal, int oxidation_state);

}  // namespace chemclip
