#include "chemclip/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <unordered_map>

#include "chemclip/error.hpp"

namespace chemclip {
namespace {

constexpr std::array<std::string_view, 119> kElements = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac",
    "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf",
    "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

// Daylight default valences for the organic subset.
int default_valence(int z) {
  switch (z) {
    case 5: return 3;
    case 6: return 4;
    case 7: return 3;
    case 8: return 2;
    case 15: return 3;
    case 16: return 2;
    case 9:
    case 17:
    case 35:
    case 53: return 1;
    default: return -1;
  }
}

bool is_organic_subset(std::string_view symbol) {
  static constexpr std::string_view kOrganic[] = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
  return std::find(std::begin(kOrganic), std::end(kOrganic), symbol) != std::end(kOrganic);
}

// Aromatic symbols accepted inside brackets; outside brackets only b c n o p s.
bool is_aromatic_bracket_symbol(std::string_view s) {
  return s == "b" || s == "c" || s == "n" || s == "o" || s == "p" || s == "s" || s == "se" || s == "as" ||
         s == "te";
}

std::string capitalise(std::string_view lower) {
  std::string out(lower);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

BondOrder default_bond(const Atom& a, const Atom& b) {
  return (a.aromatic && b.aromatic) ? BondOrder::kAromatic : BondOrder::kSingle;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  MolGraph run() {
    if (text_.empty()) throw SmilesError(ErrorCode::kInvalidSmiles, 0, "empty SMILES");
    graph_.source = std::string(text_);
    while (pos_ < text_.size()) step();
    if (pending_) throw SmilesError(ErrorCode::kDanglingBondSymbol, pending_offset_, "bond symbol without atom");
    if (!branches_.empty()) {
      throw SmilesError(ErrorCode::kUnbalancedParenthesis, branches_.back().offset, "unclosed branch");
    }
    if (!rings_.empty()) {
      std::size_t first = text_.size();
      for (const auto& [label, open] : rings_) first = std::min(first, open.offset);
      throw SmilesError(ErrorCode::kUnclosedRingBond, first, "ring bond opened but never closed");
    }
    assign_ring_membership(graph_);
    return std::move(graph_);
  }

 private:
  struct Branch {
    int prev;
    std::size_t offset;
    std::size_t atoms_at_open;
  };
  struct RingOpen {
    int atom;
    std::optional<BondOrder> order;
    std::size_t offset;
  };

  void step() {
    const char c = text_[pos_];
    switch (c) {
      case '(': open_branch(); return;
      case ')': close_branch(); return;
      case '-':
      case '=':
      case '#':
      case ':':
      case '/':
      case '\\': bond_symbol(c); return;
      case '.': dot(); return;
      case '[': bracket_atom(); return;
      case '%': ring_closure(); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ring_closure();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
      organic_atom();
      return;
    }
    throw SmilesError(ErrorCode::kInvalidSmiles, pos_, std::string("unexpected character '") + c + "'");
  }

  void open_branch() {
    if (prev_ < 0) throw SmilesError(ErrorCode::kInvalidSmiles, pos_, "branch without preceding atom");
    if (pending_) throw SmilesError(ErrorCode::kDanglingBondSymbol, pending_offset_, "bond symbol before branch");
    branches_.push_back({prev_, pos_, graph_.atoms.size()});
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty()) throw SmilesError(ErrorCode::kUnbalancedParenthesis, pos_, "unmatched ')'");
    if (pending_) throw SmilesError(ErrorCode::kDanglingBondSymbol, pending_offset_, "bond symbol without atom");
    if (branches_.back().atoms_at_open == graph_.atoms.size()) {
      throw SmilesError(ErrorCode::kInvalidSmiles, pos_, "empty branch");
    }
    prev_ = branches_.back().prev;
    branches_.pop_back();
    ++pos_;
  }

  void bond_symbol(char c) {
    if (prev_ < 0) throw SmilesError(ErrorCode::kDanglingBondSymbol, pos_, "bond symbol without preceding atom");
    if (pending_) throw SmilesError(ErrorCode::kInvalidSmiles, pos_, "consecutive bond symbols");
    switch (c) {
      case '=': pending_ = BondOrder::kDouble; break;
      case '#': pending_ = BondOrder::kTriple; break;
      case ':': pending_ = BondOrder::kAromatic; break;
      default: pending_ = BondOrder::kSingle; break;  // '-', and stereo '/' '\'
    }
    pending_offset_ = pos_;
    ++pos_;
  }

  void dot() {
    if (pending_) throw SmilesError(ErrorCode::kDanglingBondSymbol, pending_offset_, "bond symbol before '.'");
    if (prev_ < 0) throw SmilesError(ErrorCode::kInvalidSmiles, pos_, "'.' without preceding atom");
    prev_ = -1;
    ++pos_;
  }

  void ring_closure() {
    const std::size_t start = pos_;
    int label = 0;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        throw SmilesError(ErrorCode::kInvalidSmiles, pos_, "'%' must be followed by two digits");
      }
      label = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      label = text_[pos_] - '0';
      ++pos_;
    }
    if (prev_ < 0) throw SmilesError(ErrorCode::kInvalidSmiles, start, "ring bond without preceding atom");

    auto it = rings_.find(label);
    if (it == rings_.end()) {
      rings_[label] = RingOpen{prev_, pending_, start};
      pending_.reset();
      return;
    }
    const RingOpen open = it->second;
    rings_.erase(it);
    if (open.order && pending_ && *open.order != *pending_) {
      throw SmilesError(ErrorCode::kInvalidSmiles, start, "conflicting ring bond orders");
    }
    if (open.atom == prev_) throw SmilesError(ErrorCode::kInvalidSmiles, start, "ring bond to itself");
    const BondOrder order = pending_   ? *pending_
                            : open.order ? *open.order
                                         : default_bond(graph_.atoms[open.atom], graph_.atoms[prev_]);
    pending_.reset();
    add_bond(open.atom, prev_, order, start);
  }

  void organic_atom() {
    const std::size_t start = pos_;
    Atom atom;
    const char c = text_[pos_];
    auto two = pos_ + 1 < text_.size() ? text_.substr(pos_, 2) : std::string_view{};
    if (two == "Cl" || two == "Br") {
      atom.element = std::string(two);
      pos_ += 2;
    } else if (c == 'B' || c == 'C' || c == 'N' || c == 'O' || c == 'P' || c == 'S' || c == 'F' || c == 'I') {
      atom.element = std::string(1, c);
      ++pos_;
    } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's') {
      atom.element = capitalise(std::string_view(&text_[pos_], 1));
      atom.aromatic = true;
      ++pos_;
    } else {
      throw SmilesError(ErrorCode::kUnknownElement, start, std::string("unknown atom symbol '") + c + "'");
    }
    atom.atomic_number = atomic_number(atom.element);
    add_atom(std::move(atom));
  }

  int read_int() {
    int value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      ++pos_;
    }
    return value;
  }

  bool at_digit() const { return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])); }

  void bracket_atom() {
    const std::size_t open = pos_;
    const std::size_t close = text_.find(']', pos_);
    if (close == std::string_view::npos) throw SmilesError(ErrorCode::kInvalidSmiles, open, "unterminated '['");
    ++pos_;
    Atom atom;
    if (at_digit()) {
      const int iso = read_int();
      if (iso <= 0) throw SmilesError(ErrorCode::kInvalidSmiles, open + 1, "isotope must be positive");
      atom.isotope = iso;
    }

    const std::size_t sym_at = pos_;
    if (pos_ >= close) throw SmilesError(ErrorCode::kUnknownElement, sym_at, "missing element symbol");
    const char c0 = text_[pos_];
    if (std::islower(static_cast<unsigned char>(c0))) {
      std::string_view two = pos_ + 1 < close ? text_.substr(pos_, 2) : std::string_view{};
      std::string_view one = text_.substr(pos_, 1);
      if (!two.empty() && is_aromatic_bracket_symbol(two)) {
        atom.element = capitalise(two);
        pos_ += 2;
      } else if (is_aromatic_bracket_symbol(one)) {
        atom.element = capitalise(one);
        ++pos_;
      } else {
        throw SmilesError(ErrorCode::kUnknownElement, sym_at, "unknown aromatic symbol");
      }
      atom.aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(c0))) {
      std::string_view two = pos_ + 1 < close ? text_.substr(pos_, 2) : std::string_view{};
      if (!two.empty() && std::islower(static_cast<unsigned char>(two[1])) && atomic_number(two) > 0) {
        atom.element = std::string(two);
        pos_ += 2;
      } else if (atomic_number(text_.substr(pos_, 1)) > 0) {
        atom.element = std::string(1, c0);
        ++pos_;
      } else {
        throw SmilesError(ErrorCode::kUnknownElement, sym_at, "unknown element symbol");
      }
    } else {
      throw SmilesError(ErrorCode::kUnknownElement, sym_at, "missing element symbol");
    }
    atom.atomic_number = atomic_number(atom.element);

    // Chirality (@, @@, @TH1, @SP2, @OH12, ...) is discarded.
    if (pos_ < close && text_[pos_] == '@') {
      while (pos_ < close && text_[pos_] == '@') ++pos_;
      if (pos_ + 1 < close && std::isupper(static_cast<unsigned char>(text_[pos_])) &&
          std::isupper(static_cast<unsigned char>(text_[pos_ + 1]))) {
        pos_ += 2;
        read_int();
      }
    }

    int h = 0;
    if (pos_ < close && text_[pos_] == 'H') {
      ++pos_;
      h = at_digit() ? read_int() : 1;
    }
    atom.explicit_h = h;

    if (pos_ < close && (text_[pos_] == '+' || text_[pos_] == '-')) {
      const char sign = text_[pos_];
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      if (at_digit()) {
        atom.formal_charge = unit * read_int();
      } else {
        int count = 1;
        while (pos_ < close && text_[pos_] == sign) {
          ++count;
          ++pos_;
        }
        atom.formal_charge = unit * count;
      }
    }

    if (pos_ < close && text_[pos_] == ':') {
      ++pos_;
      if (!at_digit()) throw SmilesError(ErrorCode::kInvalidSmiles, pos_, "atom class needs digits");
      read_int();
    }

    if (pos_ != close) throw SmilesError(ErrorCode::kInvalidSmiles, pos_, "unexpected text in bracket atom");
    pos_ = close + 1;
    add_atom(std::move(atom));
  }

  void add_atom(Atom atom) {
    const int index = static_cast<int>(graph_.atoms.size());
    graph_.atoms.push_back(std::move(atom));
    if (prev_ >= 0) {
      const BondOrder order = pending_ ? *pending_ : default_bond(graph_.atoms[prev_], graph_.atoms[index]);
      add_bond(prev_, index, order, pending_ ? pending_offset_ : pos_);
    }
    pending_.reset();
    prev_ = index;
  }

  void add_bond(int a, int b, BondOrder order, std::size_t offset) {
    for (const Bond& existing : graph_.bonds) {
      if ((existing.begin == a && existing.end == b) || (existing.begin == b && existing.end == a)) {
        throw SmilesError(ErrorCode::kInvalidSmiles, offset, "duplicate bond");
      }
    }
    graph_.bonds.push_back(Bond{a, b, order});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph graph_;
  int prev_ = -1;
  std::optional<BondOrder> pending_;
  std::size_t pending_offset_ = 0;
  std::vector<Branch> branches_;
  std::map<int, RingOpen> rings_;
};

}  // namespace

std::vector<std::vector<int>> MolGraph::adjacency() const {
  std::vector<std::vector<int>> adj(atoms.size());
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    adj[bonds[b].begin].push_back(static_cast<int>(b));
    adj[bonds[b].end].push_back(static_cast<int>(b));
  }
  return adj;
}

int atomic_number(std::string_view symbol) {
  if (symbol.empty()) return 0;
  for (std::size_t z = 1; z < kElements.size(); ++z) {
    if (kElements[z] == symbol) return static_cast<int>(z);
  }
  return 0;
}

std::string_view element_symbol(int z) {
  if (z <= 0 || z >= static_cast<int>(kElements.size())) return {};
  return kElements[z];
}

MolGraph parse_smiles(std::string_view text) { return Parser(text).run(); }

int implicit_hydrogens(const MolGraph& graph, int atom_index) {
  const Atom& atom = graph.atoms.at(atom_index);
  if (atom.explicit_h) return *atom.explicit_h;
  const int valence = default_valence(atom.atomic_number);
  if (valence < 0) return 0;
  int half_units = 0;
  for (const Bond& bond : graph.bonds) {
    if (bond.begin != atom_index && bond.end != atom_index) continue;
    half_units += bond.order == BondOrder::kAromatic ? 3 : 2 * static_cast<int>(bond.order);
  }
  return std::max(0, valence - half_units / 2);
}

int total_hydrogens(const MolGraph& graph, int atom_index) {
  int count = implicit_hydrogens(graph, atom_index);
  for (const Bond& bond : graph.bonds) {
    if (bond.begin == atom_index && graph.atoms[bond.end].atomic_number == 1) ++count;
    if (bond.end == atom_index && graph.atoms[bond.begin].atomic_number == 1) ++count;
  }
  return count;
}

void assign_ring_membership(MolGraph& graph) {
  const int n = static_cast<int>(graph.atoms.size());
  const auto adj = graph.adjacency();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> bridge(graph.bonds.size(), false);
  int timer = 0;

  // Iterative DFS; each frame remembers the tree edge it arrived through.
  struct Frame {
    int atom;
    int parent_edge;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next < adj[top.atom].size()) {
        const int edge = adj[top.atom][top.next++];
        if (edge == top.parent_edge) continue;
        const int other = graph.other_end(graph.bonds[edge], top.atom);
        if (disc[other] < 0) {
          disc[other] = low[other] = timer++;
          stack.push_back({other, edge, 0});
        } else {
          low[top.atom] = std::min(low[top.atom], disc[other]);
        }
      } else {
        const Frame done = top;
        stack.pop_back();
        if (!stack.empty()) {
          const int parent = stack.back().atom;
          low[parent] = std::min(low[parent], low[done.atom]);
          if (low[done.atom] > disc[parent]) bridge[done.parent_edge] = true;
        }
      }
    }
  }

  for (Atom& atom : graph.atoms) atom.in_ring = false;
  for (std::size_t b = 0; b < graph.bonds.size(); ++b) {
    if (bridge[b]) continue;
    graph.atoms[graph.bonds[b].begin].in_ring = true;
    graph.atoms[graph.bonds[b].end].in_ring = true;
  }
}

bool contains_metal(const MolGraph& graph, std::span<const std::string_view> metal_set) {
  return std::any_of(graph.atoms.begin(), graph.atoms.end(), [&](const Atom& atom) {
    return std::find(metal_set.begin(), metal_set.end(), atom.element) != metal_set.end();
  });
}

MolGraph remove_atoms(const MolGraph& graph, std::span<const int> atom_indices) {
  std::vector<int> remap(graph.atoms.size(), 0);
  for (int idx : atom_indices) remap.at(idx) = -1;
  MolGraph out;
  for (std::size_t i = 0; i < graph.atoms.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<int>(out.atoms.size());
    out.atoms.push_back(graph.atoms[i]);
  }
  for (const Bond& bond : graph.bonds) {
    if (remap[bond.begin] < 0 || remap[bond.end] < 0) continue;
    out.bonds.push_back(Bond{remap[bond.begin], remap[bond.end], bond.order});
  }
  assign_ring_membership(out);
  out.source = write_smiles(out);
  return out;
}

namespace {

std::string atom_token(const MolGraph& graph, int index) {
  const Atom& atom = graph.atoms[index];
  const bool plain = !atom.explicit_h && atom.formal_charge == 0 && !atom.isotope && is_organic_subset(atom.element);
  std::string symbol = atom.element;
  if (atom.aromatic) {
    for (char& ch : symbol) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (plain) return symbol;

  std::string token = "[";
  if (atom.isotope) token += std::to_string(*atom.isotope);
  token += symbol;
  const int h = implicit_hydrogens(graph, index);
  if (h > 0) {
    token += 'H';
    if (h > 1) token += std::to_string(h);
  }
  if (atom.formal_charge != 0) {
    token += atom.formal_charge > 0 ? '+' : '-';
    const int magnitude = std::abs(atom.formal_charge);
    if (magnitude > 1) token += std::to_string(magnitude);
  }
  token += ']';
  return token;
}

std::string bond_token(const MolGraph& graph, const Bond& bond) {
  const bool both_aromatic = graph.atoms[bond.begin].aromatic && graph.atoms[bond.end].aromatic;
  switch (bond.order) {
    case BondOrder::kSingle: return both_aromatic ? "-" : "";
    case BondOrder::kDouble: return "=";
    case BondOrder::kTriple: return "#";
    case BondOrder::kAromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int digit) {
  if (digit < 10) return std::to_string(digit);
  return "%" + std::to_string(digit);
}

}  // namespace

std::string write_smiles(const MolGraph& graph) {
  const int n = static_cast<int>(graph.atoms.size());
  const auto adj = graph.adjacency();

  // Pass 1: DFS spanning forest; non-tree edges become ring closures.
  std::vector<int> order_of(n, -1);
  std::vector<std::vector<int>> children(n);  // tree edges (bond index) in DFS order
  std::vector<bool> is_tree(graph.bonds.size(), false), is_ring(graph.bonds.size(), false);
  std::vector<int> roots;
  int counter = 0;
  std::function<void(int, int)> visit = [&](int atom, int via) {
    order_of[atom] = counter++;
    for (int edge : adj[atom]) {
      if (edge == via) continue;
      const int other = graph.other_end(graph.bonds[edge], atom);
      if (order_of[other] < 0) {
        is_tree[edge] = true;
        children[atom].push_back(edge);
        visit(other, edge);
      } else if (!is_tree[edge]) {
        is_ring[edge] = true;
      }
    }
  };
  for (int a = 0; a < n; ++a) {
    if (order_of[a] >= 0) continue;
    roots.push_back(a);
    visit(a, -1);
  }

  // Pass 2: emit.
  std::map<int, int> open_digit;  // ring bond index -> digit
  std::vector<bool> digit_used(100, false);
  std::string out;
  std::function<void(int)> emit = [&](int atom) {
    out += atom_token(graph, atom);
    std::vector<int> ring_edges;
    for (int edge : adj[atom]) {
      if (is_ring[edge]) ring_edges.push_back(edge);
    }
    for (int edge : ring_edges) {
      const int other = graph.other_end(graph.bonds[edge], atom);
      if (order_of[other] < order_of[atom]) {
        const int d = open_digit.at(edge);
        out += ring_label(d);
        digit_used[d] = false;
        open_digit.erase(edge);
      }
    }
    for (int edge : ring_edges) {
      const int other = graph.other_end(graph.bonds[edge], atom);
      if (order_of[other] > order_of[atom]) {
        int d = 1;
        while (digit_used[d]) ++d;
        digit_used[d] = true;
        open_digit[edge] = d;
        out += bond_token(graph, graph.bonds[edge]) + ring_label(d);
      }
    }
    const auto& kids = children[atom];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const Bond& bond = graph.bonds[kids[k]];
      const bool last = k + 1 == kids.size();
      if (!last) out += '(';
      out += bond_token(graph, bond);
      emit(graph.other_end(bond, atom));
      if (!last) out += ')';
    }
  };
  for (std::size_t r = 0; r < roots.size(); ++r) {
    if (r > 0) out += '.';
    emit(roots[r]);
  }
  return out;
}

}  // namespace chemclip
