#pragma once

#include <lhn/groups.hpp>

namespace lhn::presets {

// Data of a units-mod-N realization, as it is published.
struct UnitsParams {
  Integer modulus;
  algebra::Factorization factorization;
  AbelianGroupSpec spec;
  IntVector residues;
};

groups::GroupBackend realize(const UnitsParams& p);

// Smallest primitive root modulo an odd prime.
Integer primitive_root(const Integer& p);

// N = p_1 ... p_m with distinct primes p_i = 3 (mod 4) of `bits` bits. u_i is
// a primitive root mod p_i and 1 mod the other primes, so the 2-Sylow
// subgroup is C_2^m.
UnitsParams c2m(std::size_t m, unsigned bits, Rng& rng);

// A prime p = c 2^k + 1 with c odd of `cofactor_bits` bits: cyclic group of
// order p - 1 whose 2-part has order 2^k.
UnitsParams cyclic_2power(unsigned k, unsigned cofactor_bits, Rng& rng);

}  // namespace lhn::presets
