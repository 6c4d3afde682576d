#pragma once

#include <lhn/abelian_spec.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace lhn::groups {

using Index = std::uint32_t;
using ElementSet = std::vector<Index>;  // sorted

// Finite group given by its multiplication table.
class FiniteGroupTable {
 public:
  static constexpr std::size_t kMaxOrder = 4096;

  // rows[a][b] = a*b. Axioms are checked exhaustively up to 512 elements and
  // on random triples above that.
  static FiniteGroupTable from_table(const std::vector<std::vector<Index>>& rows,
                                     std::vector<std::string> labels = {});
  // Closure of permutations of {0..d-1}; (p*q)(x) = p(q(x)). Element 0 is the
  // identity and the generators appear in BFS order.
  static FiniteGroupTable from_permutations(
      const std::vector<std::vector<Index>>& generators);
  static FiniteGroupTable direct_product(const FiniteGroupTable& a,
                                         const FiniteGroupTable& b);
  // Mixed-radix exponent vectors, index = a_1 + d_1 (a_2 + d_2 (...)).
  static FiniteGroupTable from_abelian(const AbelianGroupSpec& spec);

  std::size_t order() const { return n_; }
  Index identity() const { return identity_; }
  Index mul(Index a, Index b) const { return mul_[a * n_ + b]; }
  Index inv(Index a) const { return inv_[a]; }
  Index pow(Index a, long long k) const;
  Index commutator(Index a, Index b) const {
    return mul(mul(inv(a), inv(b)), mul(a, b));
  }
  std::size_t element_order(Index a) const;
  bool is_abelian() const;
  ElementSet center() const;

  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(Index a) const;
  // Present when built from permutations; lets serialization stay compact.
  const std::vector<std::vector<Index>>& permutation_generators() const {
    return perm_gens_;
  }
  std::vector<std::vector<Index>> rows() const;

  friend bool operator==(const FiniteGroupTable& a, const FiniteGroupTable& b) {
    return a.n_ == b.n_ && a.mul_ == b.mul_;
  }

 private:
  void finish();

  std::size_t n_ = 0;
  Index identity_ = 0;
  std::vector<std::uint16_t> mul_;
  std::vector<std::uint16_t> inv_;
  std::vector<std::string> labels_;
  std::vector<std::vector<Index>> perm_gens_;
};

FiniteGroupTable symmetric_group(unsigned degree);
// Order 2n.
FiniteGroupTable dihedral_group(unsigned n);
FiniteGroupTable quaternion_group();
// x -> a x + b over Z/p, order p (p - 1).
FiniteGroupTable affine_group(unsigned p);

ElementSet subgroup_closure(const FiniteGroupTable& g,
                            const std::vector<Index>& generators);
ElementSet normal_closure(const FiniteGroupTable& g,
                          const std::vector<Index>& generators);
// [S, S] for a subgroup S.
ElementSet commutator_subgroup(const FiniteGroupTable& g, const ElementSet& s);
bool is_normal_in(const FiniteGroupTable& g, const ElementSet& sub,
                  const ElementSet& ambient);

struct DerivedSeries {
  // terms[0] = G, terms[i+1] = [terms[i], terms[i]]. For a non-solvable group
  // the list ends at the first repeated term.
  std::vector<ElementSet> terms;
  bool solvable = false;
};
DerivedSeries derived_series(const FiniteGroupTable& g);

// A/B for B normal in A with A/B abelian, written as a direct sum of cyclic
// groups of orders d_1 | d_2 | ... (all > 1) with generators taken in A.
struct QuotientDecomposition {
  IntVector orders;
  std::vector<Index> generators;
  // coords[x] for x in A; empty for elements outside A.
  std::vector<std::vector<std::uint32_t>> coords;

  IntVector coordinates(Index x) const;
};
QuotientDecomposition decompose_quotient(const FiniteGroupTable& g,
                                         const ElementSet& a,
                                         const ElementSet& b);

struct Abelianization {
  AbelianGroupSpec spec;
  QuotientDecomposition quotient;  // G / [G, G]

  IntVector project(Index x) const { return quotient.coordinates(x); }
};
// The projection is checked to be a homomorphism before returning.
Abelianization abelianize(const FiniteGroupTable& g);

}  // namespace lhn::groups
