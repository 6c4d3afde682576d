#include "lhn/scheme.hpp"

#include "lhn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace lhn::scheme {

using algebra::IntMatrix;

HomMatrix HomMatrix::zero(const AbelianGroupSpec& source, const AbelianGroupSpec& target) {
  return HomMatrix{source, target, IntMatrix(target.rank(), source.rank())};
}

void HomMatrix::validate() const {
  if (a.rows() != target.rank() || a.cols() != source.rank()) {
    throw ConstructionError("homomorphism matrix: shape does not match the groups");
  }
  for (std::size_t j = 0; j < target.rank(); ++j) {
    const Integer& e = target.orders[j];
    for (std::size_t i = 0; i < source.rank(); ++i) {
      const Integer& x = a(j, i);
      if (x < 0 || x >= e) throw ConstructionError("homomorphism matrix: entry out of range");
      Integer step = e / algebra::gcd(e, source.orders[i]);
      if (!mpz_divisible_p(x.get_mpz_t(), step.get_mpz_t())) {
        throw ConstructionError("homomorphism matrix: entry (" + std::to_string(j) + "," +
                                std::to_string(i) + ") does not define a homomorphism");
      }
    }
  }
}

IntVector HomMatrix::apply(std::span<const Integer> x) const {
  IntVector y = a * x;
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = algebra::mod(y[j], target.orders[j]);
  return y;
}

bool HomMatrix::is_trivial() const {
  return std::all_of(a.entries().begin(), a.entries().end(), [](const Integer& x) { return x == 0; });
}

Integer count_homs(const AbelianGroupSpec& g, const AbelianGroupSpec& h) {
  Integer n = 1;
  for (const auto& d : g.orders)
    for (const auto& e : h.orders) n *= algebra::gcd(d, e);
  return n;
}

HomMatrix sample_hom(const AbelianGroupSpec& g, const AbelianGroupSpec& h, Rng& rng) {
  HomMatrix m = HomMatrix::zero(g, h);
  for (std::size_t j = 0; j < h.rank(); ++j) {
    for (std::size_t i = 0; i < g.rank(); ++i) {
      Integer c = algebra::gcd(h.orders[j], g.orders[i]);
      m.a(j, i) = (h.orders[j] / c) * algebra::random_below(rng, c);
    }
  }
  return m;
}

std::vector<IntVector> kernel_basis(const HomMatrix& psi) {
  const auto sol = algebra::solve_mod(psi.a, IntVector(psi.target.rank()), psi.target.orders);
  std::vector<IntVector> out;
  for (auto v : sol.kernel_basis) {
    bool nonzero = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = algebra::mod(v[i], psi.source.orders[i]);
      nonzero |= v[i] != 0;
    }
    if (nonzero) out.push_back(std::move(v));
  }
  return out;
}

namespace {

Integer vector_order(const AbelianGroupSpec& spec, const IntVector& v) {
  Integer o = 1;
  for (std::size_t i = 0; i < v.size(); ++i) {
    o = algebra::lcm(o, spec.orders[i] / algebra::gcd(spec.orders[i], v[i]));
  }
  return o;
}

IntVector reduce(const AbelianGroupSpec& spec, IntVector v) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = algebra::mod(v[i], spec.orders[i]);
  return v;
}

}  // namespace

IntVector sample_span(const AbelianGroupSpec& spec, const std::vector<IntVector>& gens, Rng& rng) {
  // Uniform coefficients modulo each generator's order push forward to the
  // uniform distribution on the span.
  IntVector x(spec.rank());
  for (const auto& v : gens) {
    Integer c = algebra::random_below(rng, vector_order(spec, v));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += c * v[i];
  }
  return reduce(spec, std::move(x));
}

namespace {

// Order-2 element whose bit k selects d_j / 2 in the k-th even factor j.
IntVector two_torsion_element(const AbelianGroupSpec& h, const std::vector<std::size_t>& even,
                              const std::vector<char>& bits) {
  IntVector t(h.rank());
  for (std::size_t k = 0; k < even.size(); ++k) {
    if (bits[k]) t[even[k]] = h.orders[even[k]] / 2;
  }
  return t;
}

}  // namespace

KeyPair keygen(const GroupBackend& G, const GroupBackend& H, const AbelianGroupSpec& K,
               Rng& rng, const KeygenOptions& options) {
  if (!H.abelian()) throw KeygenError("abelian H", "keygen: H must be abelian for this scheme");
  const AbelianGroupSpec& gs = G.spec();
  const AbelianGroupSpec& hs = H.spec();
  std::vector<std::size_t> even;
  for (std::size_t j = 0; j < hs.rank(); ++j) {
    if (mpz_even_p(hs.orders[j].get_mpz_t())) even.push_back(j);
  }
  if (even.empty()) throw KeygenError("tau", "keygen: H has odd order, so it has no order-2 element");

  PublicKey pk;
  pk.G = G;
  pk.H = H;
  if (options.explicit_generators) {
    pk.g = *options.explicit_generators;
    for (const auto& x : pk.g) G.check_element(x);
  } else if (options.generators == GeneratorChoice::uniform) {
    const std::size_t m = options.m.value_or(gs.rank());
    for (std::size_t i = 0; i < m; ++i) pk.g.push_back(G.sample_uniform(rng));
  } else {
    for (std::size_t i = 0; i < gs.rank(); ++i) {
      if (gs.orders[i] > 1) pk.g.push_back(G.generator(i));
    }
  }
  if (pk.g.empty()) throw KeygenError("m >= 1", "keygen: G has no nontrivial generator");
  std::vector<IntVector> g_logs;
  for (const auto& x : pk.g) {
    g_logs.push_back(G.trapdoor_log(x));
    pk.orders.push_back(G.element_order(x));
  }
  const std::size_t m = pk.g.size();
  const std::size_t retries = options.max_retries ? options.max_retries : 64 * m;

  std::map<std::string, std::size_t> failures;
  for (std::size_t attempt = 0; attempt < retries; ++attempt) {
    HomMatrix phi = sample_hom(gs, hs, rng);
    HomMatrix psi = sample_hom(hs, K, rng);
    if (psi.is_trivial()) {
      ++failures["psi nontrivial"];
      continue;
    }
    // tau: uniform over the order-2 elements outside ker(psi), by rejection.
    bool any_valid = false;
    for (std::size_t k = 0; k < even.size() && !any_valid; ++k) {
      IntVector t(hs.rank());
      t[even[k]] = hs.orders[even[k]] / 2;
      for (const auto& y : psi.apply(t)) any_valid |= y != 0;
    }
    if (!any_valid) {
      ++failures["tau outside ker(psi)"];
      continue;
    }
    IntVector tau;
    for (std::size_t draw = 0; draw < retries && tau.empty(); ++draw) {
      std::vector<char> bits(even.size());
      bool nonzero = false;
      for (auto& b : bits) {
        b = static_cast<char>(rng() & 1);
        nonzero |= b != 0;
      }
      if (!nonzero) continue;
      IntVector t = two_torsion_element(hs, even, bits);
      IntVector img = psi.apply(t);
      if (std::any_of(img.begin(), img.end(), [](const Integer& y) { return y != 0; })) tau = t;
    }
    if (tau.empty()) {
      ++failures["tau outside ker(psi)"];
      continue;
    }
    std::vector<IntVector> kern = kernel_basis(psi);
    std::vector<IntVector> h_logs;
    std::vector<IntVector> ell_logs;
    for (std::size_t i = 0; i < m; ++i) {
      IntVector hv = options.noiseless ? IntVector(hs.rank()) : sample_span(hs, kern, rng);
      IntVector lv = phi.apply(g_logs[i]);
      for (std::size_t j = 0; j < lv.size(); ++j) lv[j] += hv[j];
      h_logs.push_back(std::move(hv));
      ell_logs.push_back(reduce(hs, std::move(lv)));
    }
    IntMatrix a = IntMatrix::from_columns(hs.rank(), ell_logs);
    if (!algebra::solve_mod(a, tau, hs.orders).solvable()) {
      ++failures["S4"];
      continue;
    }
    SecretKey sk{G, H, K, std::move(phi), std::move(psi), std::move(kern), {}};
    for (const auto& hv : h_logs) sk.noise.push_back(H.from_exponents(hv));
    for (const auto& lv : ell_logs) pk.ell.push_back(H.from_exponents(lv));
    pk.tau = H.from_exponents(tau);
    return KeyPair{std::move(pk), std::move(sk)};
  }
  auto worst = std::max_element(failures.begin(), failures.end(),
                                [](const auto& x, const auto& y) { return x.second < y.second; });
  const std::string req = worst == failures.end() ? "retries" : worst->first;
  throw KeygenError(req, "keygen: " + std::to_string(retries) +
                             " attempts exhausted; requirement not met: " + req);
}

Ciphertext encrypt_with(const PublicKey& pk, int beta, std::span<const Integer> r) {
  if (r.size() != pk.m()) throw std::invalid_argument("encrypt: one exponent per public pair");
  GroupElement g = pk.G.identity();
  GroupElement h = pk.H.identity();
  for (std::size_t i = 0; i < pk.m(); ++i) {
    g = pk.G.mul(g, pk.G.pow(pk.g[i], r[i]));
    h = pk.H.mul(h, pk.H.pow(pk.ell[i], r[i]));
  }
  if (beta & 1) h = pk.H.mul(h, pk.tau);
  return Ciphertext{std::move(g), std::move(h)};
}

Ciphertext encrypt(const PublicKey& pk, int beta, Rng& rng) {
  IntVector r;
  for (const auto& o : pk.orders) r.push_back(algebra::random_below(rng, o));
  return encrypt_with(pk, beta, r);
}

int decrypt(const SecretKey& sk, const Ciphertext& ct) {
  IntVector via_g = sk.psi.apply(sk.phi.apply(sk.G.trapdoor_log(ct.g)));
  IntVector via_h = sk.psi.apply(sk.H.trapdoor_log(ct.h));
  return via_g == via_h ? 0 : 1;
}

Ciphertext ct_add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  return Ciphertext{pk.G.mul(a.g, b.g), pk.H.mul(a.h, b.h)};
}

bool tau_in_public_span(const SecretKey& sk, const PublicKey& pk) {
  const auto& hs = sk.H.spec();
  std::vector<IntVector> cols;
  for (const auto& l : pk.ell) cols.push_back(sk.H.trapdoor_log(l));
  IntMatrix a = IntMatrix::from_columns(hs.rank(), cols);
  return algebra::solve_mod(a, sk.H.trapdoor_log(pk.tau), hs.orders).solvable();
}

namespace {

Integer gaussian_binomial(unsigned long n, unsigned long k, const Integer& p) {
  if (k > n) return 0;
  Integer num = 1, den = 1;
  for (unsigned long i = 0; i < k; ++i) {
    Integer a, b;
    mpz_pow_ui(a.get_mpz_t(), p.get_mpz_t(), n - i);
    mpz_pow_ui(b.get_mpz_t(), p.get_mpz_t(), i + 1);
    num *= a - 1;
    den *= b - 1;
  }
  return num / den;
}

// lambda' (conjugate partition), lambda sorted decreasing.
std::vector<unsigned long> conjugate(const std::vector<unsigned long>& lambda) {
  std::vector<unsigned long> c(lambda.empty() ? 0 : lambda.front(), 0);
  for (auto part : lambda)
    for (unsigned long i = 0; i < part; ++i) ++c[i];
  return c;
}

// Subgroups of type mu in an abelian p-group of type lambda.
Integer birkhoff(const std::vector<unsigned long>& lambda, const std::vector<unsigned long>& mu,
                 const Integer& p) {
  auto lc = conjugate(lambda);
  auto mc = conjugate(mu);
  mc.resize(lc.size() + 1, 0);
  Integer n = 1;
  for (std::size_t i = 0; i < lc.size(); ++i) {
    Integer pw;
    mpz_pow_ui(pw.get_mpz_t(), p.get_mpz_t(), mc[i + 1] * (lc[i] - mc[i]));
    n *= pw * gaussian_binomial(lc[i] - mc[i + 1], mc[i] - mc[i + 1], p);
  }
  return n;
}

constexpr std::size_t kTypeLimit = 200000;

}  // namespace

SubgroupCount count_subgroups(const AbelianGroupSpec& spec) {
  std::map<Integer, std::vector<unsigned long>> types;
  for (const auto& d : spec.orders) {
    for (const auto& pp : algebra::factorize(d)) types[pp.prime].push_back(pp.exponent);
  }
  SubgroupCount out{1, true};
  for (auto& [p, lambda] : types) {
    std::sort(lambda.rbegin(), lambda.rend());
    Integer total = 0;
    std::size_t visited = 0;
    std::vector<unsigned long> mu;
    std::function<void(std::size_t, unsigned long)> rec = [&](std::size_t j, unsigned long cap) {
      if (visited > kTypeLimit) return;
      if (j == lambda.size()) {
        ++visited;
        std::vector<unsigned long> m;
        for (auto x : mu)
          if (x) m.push_back(x);
        total += birkhoff(lambda, m, p);
        return;
      }
      for (unsigned long v = 0; v <= std::min(cap, lambda[j]); ++v) {
        mu.push_back(v);
        rec(j + 1, v);
        mu.pop_back();
      }
    };
    rec(0, lambda.front());
    if (visited > kTypeLimit) {
      // Lower bound: subgroups of the elementary abelian layer.
      const unsigned long r = lambda.size();
      total = 0;
      for (unsigned long k = 0; k <= r; ++k) total += gaussian_binomial(r, k, p);
      out.exact = false;
    }
    out.count *= total;
  }
  return out;
}

SecurityReport validate_security(const PublicKey& pk, const SecretKey& sk, unsigned lambda) {
  SecurityReport r;
  r.lambda = lambda;
  const Integer bound = algebra::pow2(lambda);
  const auto& gs = sk.G.spec();
  const auto& hs = sk.H.spec();
  r.hom_gh = count_homs(gs, hs);
  // For abelian H the center is H, so only the trivial map contains it in its kernel.
  r.hom_hk_minus = count_homs(hs, sk.K) - 1;
  r.s1 = r.hom_gh >= bound && r.hom_hk_minus >= bound;
  auto sc = count_subgroups(hs);
  r.subgroup_count = sc.count;
  r.subgroup_count_exact = sc.exact;
  r.s3 = sc.count >= bound;
  r.s4 = tau_in_public_span(sk, pk);

  std::size_t m_g = 0, m_h = 0;
  unsigned long depth = 1;
  for (const auto& o : pk.orders) {
    auto e = algebra::odd_part(o).exponent;
    if (e) ++m_g;
    depth = std::max(depth, e);
  }
  for (const auto& e : hs.orders) {
    auto v = algebra::odd_part(e).exponent;
    if (v) ++m_h;
    depth = std::max(depth, v);
  }
  const std::size_t m2 = std::max(m_g, m_h);
  r.attack_log2_work = std::log2(static_cast<double>(depth)) + std::ceil(m2 / 2.0);
  r.classically_attackable = sk.G.abelian() && sk.H.abelian() && r.attack_log2_work < lambda;
  if (r.classically_attackable) {
    r.warnings.push_back("G and H are abelian with known cyclic decompositions and 2-rank " +
                         std::to_string(m2) + "; the classical reduction to the 2-parts needs about 2^" +
                         std::to_string(static_cast<int>(std::ceil(r.attack_log2_work))) +
                         " group operations");
  }
  // In an abelian H the derived subgroup is trivial, so tau is never in it.
  r.tau_outside_commutator = sk.H.abelian();
  if (r.tau_outside_commutator) {
    r.warnings.push_back("tau is not in the derived subgroup [H,H]; sampling tau from [H,H] is advisable");
  }
  return r;
}

}  // namespace lhn::scheme
