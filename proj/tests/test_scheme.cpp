#include "doctest.h"

#include <lhn/errors.hpp>
#include <lhn/scheme.hpp>

#include <functional>
#include <map>
#include <set>

using namespace lhn;
using namespace lhn::scheme;
using groups::make_transparent;
using groups::make_units_mod_n;

namespace {

AbelianGroupSpec spec_of(std::initializer_list<long> d) {
  IntVector v;
  for (long x : d) v.push_back(x);
  return AbelianGroupSpec(v);
}

// All exponent vectors of a small spec.
std::vector<std::vector<long>> elements(const AbelianGroupSpec& s) {
  std::vector<std::vector<long>> out{{}};
  for (const auto& d : s.orders) {
    std::vector<std::vector<long>> next;
    for (const auto& v : out)
      for (long a = 0; a < d.get_si(); ++a) {
        auto w = v;
        w.push_back(a);
        next.push_back(w);
      }
    out = std::move(next);
  }
  return out;
}

// Brute-force homomorphism count: tuples of images of the generators, kept
// when the map they define respects every relation d_i g_i = 0.
long brute_homs(const AbelianGroupSpec& g, const AbelianGroupSpec& h) {
  auto hel = elements(h);
  std::vector<long> good_per_gen;
  for (const auto& d : g.orders) {
    long c = 0;
    for (const auto& y : hel) {
      bool zero = true;
      for (std::size_t j = 0; j < y.size(); ++j) zero &= (d.get_si() * y[j]) % h.orders[j].get_si() == 0;
      c += zero;
    }
    good_per_gen.push_back(c);
  }
  long total = 1;
  for (long c : good_per_gen) total *= c;
  return total;
}

long brute_subgroups(const AbelianGroupSpec& s) {
  auto el = elements(s);
  const std::size_t n = el.size();
  std::map<std::vector<long>, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[el[i]] = i;
  auto add = [&](std::size_t a, std::size_t b) {
    std::vector<long> v(el[a].size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = (el[a][j] + el[b][j]) % s.orders[j].get_si();
    return index[v];
  };
  auto close = [&](std::vector<char> in) {
    std::vector<std::size_t> q;
    for (std::size_t i = 0; i < n; ++i)
      if (in[i]) q.push_back(i);
    for (std::size_t k = 0; k < q.size(); ++k)
      for (std::size_t b = 0; b < n; ++b)
        if (in[b]) {
          auto c = add(q[k], b);
          if (!in[c]) {
            in[c] = 1;
            q.push_back(c);
          }
        }
    return in;
  };
  std::set<std::vector<char>> subs;
  std::vector<char> triv(n, 0);
  triv[index[std::vector<long>(s.rank(), 0)]] = 1;
  std::vector<std::vector<char>> work{triv};
  subs.insert(triv);
  while (!work.empty()) {
    auto sub = work.back();
    work.pop_back();
    for (std::size_t x = 0; x < n; ++x) {
      if (sub[x]) continue;
      auto bigger = sub;
      bigger[x] = 1;
      bigger = close(bigger);
      if (subs.insert(bigger).second) work.push_back(bigger);
    }
  }
  return static_cast<long>(subs.size());
}

}  // namespace

TEST_CASE("count_homs examples") {
  CHECK(count_homs(spec_of({2}), spec_of({4})) == 2);
  CHECK(count_homs(spec_of({3}), spec_of({4})) == 1);
  CHECK(count_homs(spec_of({2, 2}), spec_of({2, 2})) == 16);
  CHECK(brute_homs(spec_of({2}), spec_of({4})) == 2);
  CHECK(brute_homs(spec_of({2, 2}), spec_of({2, 2})) == 16);
}

TEST_CASE("sample_hom") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) CHECK(sample_hom(spec_of({3}), spec_of({4}), rng).is_trivial());
  int twos = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto h = sample_hom(spec_of({2}), spec_of({4}), rng);
    CHECK((h.a(0, 0) == 0 || h.a(0, 0) == 2));
    twos += h.a(0, 0) == 2;
  }
  double chi2 = 2.0 * (twos - draws / 2.0) * (twos - draws / 2.0) / (draws / 2.0);
  CHECK(chi2 < 6.635);

  auto g = spec_of({12, 4, 9});
  auto h = spec_of({8, 6, 3});
  for (int i = 0; i < 100; ++i) {
    auto phi = sample_hom(g, h, rng);
    phi.validate();
    IntVector x(3), y(3), xy(3);
    for (int k = 0; k < 3; ++k) {
      x[k] = algebra::random_below(rng, g.orders[k]);
      y[k] = algebra::random_below(rng, g.orders[k]);
      xy[k] = algebra::mod(x[k] + y[k], g.orders[k]);
    }
    auto fx = phi.apply(x), fy = phi.apply(y), fxy = phi.apply(xy);
    for (int k = 0; k < 3; ++k) CHECK(algebra::mod(fx[k] + fy[k], h.orders[k]) == fxy[k]);
    for (std::size_t i2 = 0; i2 < 3; ++i2) {
      IntVector r(3);
      r[i2] = g.orders[i2];
      for (const auto& v : phi.apply(r)) CHECK(v == 0);
    }
  }
  HomMatrix bad = HomMatrix::zero(spec_of({2}), spec_of({4}));
  bad.a(0, 0) = 1;
  CHECK_THROWS_AS(bad.validate(), ConstructionError);
}

TEST_CASE("kernel_basis") {
  HomMatrix triv = HomMatrix::zero(spec_of({4}), spec_of({2}));
  auto k0 = kernel_basis(triv);
  REQUIRE(k0.size() == 1);
  CHECK(k0[0][0] == 1);

  HomMatrix id = HomMatrix::zero(spec_of({4}), spec_of({4}));
  id.a(0, 0) = 1;
  CHECK(kernel_basis(id).empty());

  HomMatrix red = HomMatrix::zero(spec_of({4}), spec_of({2}));
  red.a(0, 0) = 1;
  auto k2 = kernel_basis(red);
  REQUIRE(k2.size() == 1);
  CHECK(k2[0][0] == 2);

  Rng rng(2);
  for (int t = 0; t < 60; ++t) {
    auto h = spec_of({8, 4, 6});
    auto k = spec_of({4, 2});
    auto psi = sample_hom(h, k, rng);
    auto basis = kernel_basis(psi);
    std::set<std::vector<long>> kernel, span;
    for (const auto& x : elements(h)) {
      IntVector xv(x.begin(), x.end());
      auto y = psi.apply(xv);
      if (y[0] == 0 && y[1] == 0) kernel.insert(x);
    }
    for (const auto& v : basis) {
      auto y = psi.apply(v);
      CHECK(y[0] == 0);
      CHECK(y[1] == 0);
    }
    for (int s = 0; s < 3000; ++s) {
      auto x = sample_span(h, basis, rng);
      span.insert({x[0].get_si(), x[1].get_si(), x[2].get_si()});
    }
    CHECK(span == kernel);
  }
}

TEST_CASE("keygen requirements") {
  Rng rng(3);
  auto G = make_transparent(spec_of({2}));
  auto H = make_transparent(spec_of({2}));
  auto kp = keygen(G, H, spec_of({2}), rng);
  CHECK(kp.pk.tau == groups::GroupElement{IntVector{1}});
  for (const auto& h : kp.sk.noise) CHECK(H.is_identity(h));

  auto H42 = make_transparent(spec_of({4, 2}));
  auto G42 = make_transparent(spec_of({4, 2}));
  for (int t = 0; t < 100; ++t) {
    auto k = keygen(G42, H42, spec_of({2}), rng);
    for (const auto& h : k.sk.noise) CHECK(k.sk.psi.apply(H42.trapdoor_log(h))[0] == 0);
    CHECK(k.sk.psi.apply(H42.trapdoor_log(k.pk.tau))[0] != 0);
    CHECK(H42.element_order(k.pk.tau) == 2);
    CHECK(tau_in_public_span(k.sk, k.pk));
  }

  try {
    keygen(G42, make_transparent(spec_of({9, 3})), spec_of({3}), rng);
    FAIL("expected keygen error");
  } catch (const KeygenError& e) {
    CHECK(std::string(e.what()).find("no order-2 element") != std::string::npos);
  }
  // K of odd order: psi never separates an involution.
  CHECK_THROWS_AS(keygen(G42, H42, spec_of({3}), rng), KeygenError);
}

TEST_CASE("encrypt and decrypt") {
  Rng rng(4);
  auto G = make_units_mod_n(7 * 16, {{2, 4}, {7, 1}}, spec_of({2, 4, 6}));
  auto H = make_transparent(spec_of({8, 6}));
  auto kp = keygen(G, H, spec_of({4}), rng);
  IntVector zero(kp.pk.m());
  auto c0 = encrypt_with(kp.pk, 0, zero);
  CHECK(G.is_identity(c0.g));
  CHECK(H.is_identity(c0.h));
  auto c1 = encrypt_with(kp.pk, 1, zero);
  CHECK(c1.h == kp.pk.tau);
  CHECK(decrypt(kp.sk, c0) == 0);
  CHECK(decrypt(kp.sk, c1) == 1);
  CHECK(decrypt(kp.sk, ct_add(kp.pk, c1, c1)) == 0);

  int failures = 0;
  for (int t = 0; t < 300; ++t) {
    int beta = static_cast<int>(rng() & 1);
    auto ct = encrypt(kp.pk, beta, rng);
    failures += decrypt(kp.sk, ct) != beta;
    failures += decrypt(kp.sk, ct_add(kp.pk, ct, c0)) != beta;
  }
  CHECK(failures == 0);

  // Noiseless keys.
  KeygenOptions quiet;
  quiet.noiseless = true;
  auto nk = keygen(G, H, spec_of({4}), rng, quiet);
  for (const auto& h : nk.sk.noise) CHECK(H.is_identity(h));
  CHECK(decrypt(nk.sk, encrypt(nk.pk, 1, rng)) == 1);
}

TEST_CASE("uniform public generators and explicit ones") {
  Rng rng(5);
  auto G = make_transparent(spec_of({8, 4}));
  auto H = make_transparent(spec_of({8, 4, 2}));
  KeygenOptions opt;
  opt.generators = GeneratorChoice::uniform;
  opt.m = 3;
  auto kp = keygen(G, H, spec_of({2, 2}), rng, opt);
  CHECK(kp.pk.m() == 3);
  for (int t = 0; t < 100; ++t) {
    int beta = t & 1;
    CHECK(decrypt(kp.sk, encrypt(kp.pk, beta, rng)) == beta);
  }
  KeygenOptions ex;
  ex.explicit_generators = std::vector<groups::GroupElement>{IntVector{2, 1}};
  auto k2 = keygen(G, H, spec_of({2, 2}), rng, ex);
  CHECK(k2.pk.orders == IntVector{4});
}

TEST_CASE("long addition chains do not accumulate noise") {
  Rng rng(6);
  auto G = make_units_mod_n(Integer(11) * 19 * 23, {{11, 1}, {19, 1}, {23, 1}}, spec_of({10, 18, 22}));
  auto H = make_units_mod_n(Integer(7) * 31 * 43, {{7, 1}, {31, 1}, {43, 1}}, spec_of({6, 30, 42}));
  auto kp = keygen(G, H, spec_of({2, 2}), rng);
  auto acc = encrypt(kp.pk, 0, rng);
  int parity = 0;
  int failures = 0;
  for (int i = 1; i <= 20000; ++i) {
    int b = static_cast<int>(rng() & 1);
    parity ^= b;
    acc = ct_add(kp.pk, acc, encrypt(kp.pk, b, rng));
    if (i % 1000 == 0) failures += decrypt(kp.sk, acc) != parity;
  }
  CHECK(failures == 0);
}

TEST_CASE("count_subgroups against enumeration") {
  for (auto s : {spec_of({2}), spec_of({4}), spec_of({2, 2}), spec_of({4, 2}), spec_of({2, 2, 2}),
                 spec_of({4, 4}), spec_of({8, 2}), spec_of({6, 2}), spec_of({12, 6}), spec_of({3, 3, 3}),
                 spec_of({9, 3}), spec_of({8, 4, 2}), spec_of({2, 2, 2, 2, 2}), spec_of({5, 10}), spec_of({1})}) {
    CAPTURE(s.to_string());
    auto c = count_subgroups(s);
    CHECK(c.exact);
    CHECK(c.count == brute_subgroups(s));
  }
  // Sum of Gaussian binomials [10, k]_2 by the q-Pascal recurrence.
  std::vector<std::vector<Integer>> gb(11, std::vector<Integer>(11, 0));
  for (int n = 0; n <= 10; ++n) {
    gb[n][0] = 1;
    for (int k = 1; k <= n; ++k) gb[n][k] = gb[n - 1][k - 1] + algebra::pow2(k) * gb[n - 1][k];
  }
  Integer total = 0;
  for (int k = 0; k <= 10; ++k) total += gb[10][k];
  IntVector twos(10, Integer(2));
  auto c10 = count_subgroups(AbelianGroupSpec(twos));
  CHECK(c10.count == total);
  CHECK(c10.count > 1024);
}

TEST_CASE("validate_security") {
  Rng rng(7);
  auto G = make_transparent(spec_of({2}));
  auto H = make_transparent(spec_of({2}));
  auto kp = keygen(G, H, spec_of({2}), rng);
  auto r = validate_security(kp.pk, kp.sk, 128);
  CHECK_FALSE(r.s1);
  CHECK(r.hom_gh == 2);
  CHECK(r.s4);
  CHECK(r.tau_outside_commutator);
  CHECK(r.classically_attackable);
  CHECK(r.failed());

  IntVector big(140, Integer(2));
  auto G2 = make_transparent(AbelianGroupSpec(big));
  auto H2 = make_transparent(AbelianGroupSpec(big));
  auto k2 = keygen(G2, H2, AbelianGroupSpec(IntVector(140, Integer(2))), rng);
  auto r2 = validate_security(k2.pk, k2.sk, 128);
  CHECK(r2.s1);
  CHECK(r2.s3);
  CHECK(r2.s4);
  CHECK(r2.classically_attackable);  // 2^70 work, below 2^128
  CHECK(r2.tau_outside_commutator);
}
