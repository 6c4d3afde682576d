#include <lhn/presets.hpp>
#include <lhn/errors.hpp>

#include <set>

namespace lhn::presets {

using algebra::is_probable_prime;
using algebra::pow2;

groups::GroupBackend realize(const UnitsParams& p) {
  return groups::make_units_mod_n(p.modulus, p.factorization, p.spec, p.residues);
}

Integer primitive_root(const Integer& p) {
  const Integer n = p - 1;
  const auto f = algebra::factorize(n);
  for (Integer g = 2; g < p; ++g) {
    bool ok = true;
    for (const auto& pp : f) {
      if (algebra::power_mod(g, n / pp.prime, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw ConstructionError("no primitive root modulo " + p.get_str());
}

UnitsParams c2m(std::size_t m, unsigned bits, Rng& rng) {
  if (bits < 3 || m == 0) throw ConstructionError("c2m: need m >= 1 and bits >= 3");
  std::set<Integer> primes;
  const Integer lo = pow2(bits - 1);
  std::size_t attempts = 0;
  while (primes.size() < m) {
    if (++attempts > 1000000) throw ConstructionError("c2m: too few primes of " + std::to_string(bits) + " bits");
    Integer p = lo + algebra::random_below(rng, lo);
    p += 3 - algebra::mod(p, 4);
    if (p >= 2 * lo) continue;
    if (is_probable_prime(p)) primes.insert(p);
  }
  UnitsParams out;
  out.modulus = 1;
  IntVector mods(primes.begin(), primes.end());
  IntVector orders;
  for (const auto& p : mods) {
    out.modulus *= p;
    out.factorization.push_back({p, 1});
    orders.push_back(p - 1);
  }
  out.spec = AbelianGroupSpec(orders);
  for (std::size_t i = 0; i < mods.size(); ++i) {
    IntVector r(mods.size(), Integer(1));
    r[i] = primitive_root(mods[i]);
    out.residues.push_back(algebra::crt(r, mods));
  }
  return out;
}

UnitsParams cyclic_2power(unsigned k, unsigned cofactor_bits, Rng& rng) {
  if (cofactor_bits < 2) throw ConstructionError("cyclic_2power: cofactor needs >= 2 bits");
  const Integer lo = pow2(cofactor_bits - 1);
  for (std::size_t attempts = 0; attempts < 1000000; ++attempts) {
    Integer c = lo + algebra::random_below(rng, lo);
    if (mpz_even_p(c.get_mpz_t())) c += 1;
    if (c >= 2 * lo) continue;
    const Integer p = c * pow2(k) + 1;
    if (!is_probable_prime(p)) continue;
    UnitsParams out;
    out.modulus = p;
    out.factorization = {{p, 1}};
    out.spec = AbelianGroupSpec(IntVector{p - 1});
    out.residues = {primitive_root(p)};
    return out;
  }
  throw ConstructionError("cyclic_2power: no prime found");
}

}  // namespace lhn::presets
