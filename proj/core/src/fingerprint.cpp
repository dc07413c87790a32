#include "chemclip/fingerprint.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_set>

#include "chemclip/error.hpp"

namespace chemclip {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_tuple(std::span<const std::int64_t> values) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(values.size() * 8);
  for (std::int64_t v : values) {
    const auto u = static_cast<std::uint64_t>(v);
    for (int shift = 0; shift < 64; shift += 8) bytes.push_back(static_cast<std::uint8_t>(u >> shift));
  }
  return fnv1a64(bytes);
}

std::size_t Fingerprint::popcount() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true)); }

std::vector<std::size_t> Fingerprint::on_bits() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out.push_back(i);
  }
  return out;
}

namespace {

std::int64_t bond_code(BondOrder order) { return static_cast<std::int64_t>(order); }

using EdgeSet = std::vector<int>;  // sorted bond indices

EdgeSet merge(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

Fingerprint morgan_fingerprint(const MolGraph& graph, int radius, std::size_t nbits) {
  const int n = static_cast<int>(graph.atoms.size());
  const auto adj = graph.adjacency();

  Fingerprint fp;
  fp.bits.assign(nbits, false);

  std::vector<std::uint64_t> ids(n);
  std::vector<EdgeSet> envs(n);
  for (int a = 0; a < n; ++a) {
    const Atom& atom = graph.atoms[a];
    std::int64_t heavy_degree = 0;
    for (int e : adj[a]) {
      if (graph.atoms[graph.other_end(graph.bonds[e], a)].atomic_number != 1) ++heavy_degree;
    }
    const std::array<std::int64_t, 6> invariant = {atom.atomic_number,  heavy_degree,
                                                   total_hydrogens(graph, a), atom.formal_charge,
                                                   atom.aromatic ? 1 : 0, atom.in_ring ? 1 : 0};
    ids[a] = hash_tuple(invariant);
  }

  std::unordered_set<std::uint64_t> seen_ids;
  std::set<EdgeSet> seen_envs;

  auto accept = [&](std::uint64_t id) {
    seen_ids.insert(id);
    fp.identifiers.push_back(id);
    fp.bits[id % nbits] = true;
  };

  // Radius 0: every atom contributes unless its id repeats.
  {
    std::vector<std::uint64_t> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint64_t id : sorted) {
      if (!seen_ids.contains(id)) accept(id);
    }
    seen_envs.insert(EdgeSet{});
  }

  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next_ids(n);
    std::vector<EdgeSet> next_envs(n);
    for (int a = 0; a < n; ++a) {
      std::vector<std::pair<std::int64_t, std::int64_t>> neighbours;
      EdgeSet env = envs[a];
      for (int e : adj[a]) {
        const int other = graph.other_end(graph.bonds[e], a);
        neighbours.emplace_back(bond_code(graph.bonds[e].order), static_cast<std::int64_t>(ids[other]));
        env = merge(env, envs[other]);
        env = merge(env, EdgeSet{e});
      }
      std::sort(neighbours.begin(), neighbours.end());
      std::vector<std::int64_t> tuple = {r, static_cast<std::int64_t>(ids[a])};
      for (const auto& [code, id] : neighbours) {
        tuple.push_back(code);
        tuple.push_back(id);
      }
      next_ids[a] = hash_tuple(tuple);
      next_envs[a] = std::move(env);
    }

    std::vector<int> order(n);
    for (int a = 0; a < n; ++a) order[a] = a;
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return std::tie(next_envs[x], next_ids[x]) < std::tie(next_envs[y], next_ids[y]);
    });
    std::set<EdgeSet> round_envs;
    for (int a : order) {
      const bool duplicate = seen_envs.contains(next_envs[a]) || round_envs.contains(next_envs[a]) ||
                             seen_ids.contains(next_ids[a]);
      round_envs.insert(next_envs[a]);
      if (!duplicate) accept(next_ids[a]);
    }
    seen_envs.insert(round_envs.begin(), round_envs.end());
    ids = std::move(next_ids);
    envs = std::move(next_envs);
  }

  fp.n_distinct = fp.identifiers.size();
  return fp;
}

namespace {

struct MetalInfo {
  int atomic_number;
  int group;
};

constexpr MetalInfo kMetalInfo[] = {
    {79, 11},  // Au
    {27, 9},   // Co
    {29, 11},  // Cu
    {77, 9},   // Ir
    {76, 8},   // Os
    {78, 10},  // Pt
    {75, 7},   // Re
    {45, 9},   // Rh
    {44, 8},   // Ru
    {22, 4},   // Ti
};

}  // namespace

std::array<double, kMetalFeatureCount> MetalFeatures::values() const {
  std::array<double, kMetalFeatureCount> out{};
  std::copy(one_hot.begin(), one_hot.end(), out.begin());
  out[10] = oxidation_state;
  out[11] = atomic_number_scaled;
  out[12] = valence_electrons_scaled;
  return out;
}

std::size_t metal_index(std::string_view metal) {
  for (std::size_t i = 0; i < std::size(kMetalSymbols); ++i) {
    if (kMetalSymbols[i] == metal) return i;
  }
  throw Error(ErrorCode::kUnknownMetal, "'" + std::string(metal) + "' is not one of the supported metals");
}

MetalFeatures metal_feature_vector(std::string_view metal, int oxidation_state) {
  const std::size_t idx = metal_index(metal);
  MetalFeatures f;
  f.one_hot[idx] = 1.0;
  f.oxidation_state = static_cast<double>(oxidation_state);
  f.atomic_number_scaled = kMetalInfo[idx].atomic_number / 100.0;
  f.valence_electrons_scaled = kMetalInfo[idx].group / 10.0;
  return f;
}

std::string_view domain_name(Domain domain) { return domain == Domain::kOrganic ? "organic" : "inorganic"; }

Domain parse_domain(std::string_view text) {
  if (text == "organic") return Domain::kOrganic;
  if (text == "inorganic") return Domain::kInorganic;
  throw Error(ErrorCode::kInvalidArgument, "unknown domain '" + std::string(text) + "'");
}

FeatureVector featurize_organic(std::string_view smiles) {
  const Fingerprint fp = morgan_fingerprint(parse_smiles(smiles));
  FeatureVector out;
  out.domain = Domain::kOrganic;
  out.values.resize(kFingerprintBits);
  for (std::size_t i = 0; i < kFingerprintBits; ++i) out.values[i] = fp.bits[i] ? 1.0 : 0.0;
  return out;
}

FeatureVector featurize_inorganic(std::string_view ligand_smiles, std::string_view metal, int oxidation_state) {
  const MetalFeatures metal_features = metal_feature_vector(metal, oxidation_state);
  FeatureVector out = featurize_organic(ligand_smiles);
  out.domain = Domain::kInorganic;
  const auto tail = metal_features.values();
  out.values.insert(out.values.end(), tail.begin(), tail.end());
  return out;
}

}  // namespace chemclip
