#pragma once

#include <lhn/algebra.hpp>
#include <lhn/groups.hpp>

#include <initializer_list>

namespace lhn::test {

inline AbelianGroupSpec spec_of(std::initializer_list<long> d) {
  IntVector v;
  for (long x : d) v.push_back(x);
  return AbelianGroupSpec(v);
}

// (Z/N)^x for a random N in [lo, hi], with its full cyclic decomposition.
inline groups::GroupBackend random_units(Rng& rng, long lo, long hi) {
  const Integer n = lo + algebra::random_below(rng, hi - lo + 1);
  const auto f = algebra::factorize(n);
  IntVector orders;
  for (const auto& c : groups::unit_group_components(n, f)) orders.push_back(c.order);
  return groups::make_units_mod_n(n, f, AbelianGroupSpec(orders));
}

// All partitions of n, largest part first.
inline void partitions(int n, int max_part, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  for (int p = std::min(n, max_part); p >= 1; --p) {
    cur.push_back(p);
    partitions(n - p, p, cur, out);
    cur.pop_back();
  }
}

// Abelian 2-groups of order 2^k, one per isomorphism type.
inline std::vector<AbelianGroupSpec> two_groups_of_order(int k) {
  std::vector<std::vector<int>> parts;
  std::vector<int> cur;
  partitions(k, k, cur, parts);
  std::vector<AbelianGroupSpec> out;
  for (const auto& p : parts) {
    IntVector d;
    for (int e : p) d.push_back(algebra::pow2(static_cast<unsigned long>(e)));
    out.emplace_back(d);
  }
  if (k == 0) out.emplace_back(IntVector{Integer(1)});
  return out;
}

}  // namespace lhn::test
