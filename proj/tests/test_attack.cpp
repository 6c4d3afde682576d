#include "doctest.h"
#include "support.hpp"

#include <lhn/attack.hpp>
#include <lhn/errors.hpp>
#include <lhn/presets.hpp>

#include <set>

using namespace lhn;
using namespace lhn::attack;
using groups::make_packed_2group;
using groups::make_transparent;
using test::spec_of;

namespace {

Decomposition spec_decomposition(const GroupBackend& g) {
  Decomposition d;
  for (std::size_t i = 0; i < g.spec().rank(); ++i) {
    d.generators.push_back(g.generator(i));
    d.orders.push_back(g.spec().orders[i]);
  }
  return d;
}

// Visits every element of the box with its exponent vector, one product per step.
template <class F>
void for_each_in_box(const GroupBackend& g, const Decomposition& d, F&& visit) {
  const std::size_t m = d.size();
  std::vector<unsigned long> e(m, 0);
  IntVector ev(m, 0);
  Integer box = 1;
  for (const auto& o : d.orders) box *= o;
  GroupElement cur = g.identity();
  for (unsigned long step = 0; step < box.get_ui(); ++step) {
    for (std::size_t i = 0; i < m; ++i) ev[i] = e[i];
    visit(cur, ev);
    for (std::size_t j = 0; j < m; ++j) {
      cur = g.mul(cur, d.generators[j]);
      if (++e[j] < d.orders[j].get_ui()) break;
      e[j] = 0;
    }
  }
}

std::set<std::size_t> closure(const GroupBackend& g, const std::vector<GroupElement>& y,
                              std::vector<GroupElement>& elements) {
  std::set<std::size_t> hashes;
  std::vector<GroupElement> all{g.identity()};
  auto key = [](const GroupElement& x) { return groups::hash_element(x); };
  hashes.insert(key(g.identity()));
  for (std::size_t k = 0; k < all.size(); ++k) {
    for (const auto& gen : y) {
      auto z = g.mul(all[k], gen);
      if (hashes.insert(key(z)).second) all.push_back(z);
    }
  }
  elements = all;
  return hashes;
}

scheme::KeyPair units_key(Rng& rng, scheme::KeygenOptions opt = {}) {
  for (;;) {
    auto G = test::random_units(rng, 40, 400);
    auto H = test::random_units(rng, 40, 400);
    try {
      return scheme::keygen(G, H, spec_of({2}), rng, opt);
    } catch (const KeygenError&) {
    }
  }
}

}  // namespace

TEST_CASE("edlp_brute examples") {
  auto t = make_transparent(spec_of({4, 2}));
  auto d = spec_decomposition(t);
  CHECK(edlp_brute(t, d, IntVector{3, 1}).exponents == IntVector{3, 1});
  CHECK(edlp_brute(t, d, t.identity()).exponents == IntVector{0, 0});

  IntVector f16{3, 15};
  auto u = groups::make_units_mod_n(16, {{2, 4}}, spec_of({4, 2}), f16);
  auto r = edlp_brute(u, spec_decomposition(u), Integer(7));
  CHECK(r.exponents == IntVector{2, 1});
  CHECK(r.work > 0);

  IntVector big(25, Integer(2));
  CHECK_THROWS_AS(edlp_brute(make_transparent(AbelianGroupSpec(big)),
                             spec_decomposition(make_transparent(AbelianGroupSpec(big))),
                             IntVector(25, Integer(0))),
                  Refusal);
}

TEST_CASE("edlp_solve matches enumeration on small 2-groups") {
  long checked = 0;
  for (int k = 0; k <= 10; ++k) {
    for (const auto& spec : test::two_groups_of_order(k)) {
      for (auto g : {make_transparent(spec), make_packed_2group(spec)}) {
        EdlpSolver solver(g, spec_decomposition(g));
        int bad = 0;
        for_each_in_box(g, spec_decomposition(g), [&](const GroupElement& x, const IntVector& e) {
          bad += solver.solve(x).exponents != e;
          ++checked;
        });
        CAPTURE(spec.to_string());
        CHECK(bad == 0);
      }
    }
  }
  CHECK(checked > 2 * 50000);
}

TEST_CASE("edlp_solve on other bases and opaque groups") {
  Rng rng(11);
  // Random independent bases of (8,4,4,2), checked against the brute oracle.
  auto spec = spec_of({8, 4, 4, 2});
  auto g = make_transparent(spec);
  int bases = 0;
  while (bases < 30) {
    Decomposition d;
    std::vector<IntVector> logs;
    for (std::size_t i = 0; i < spec.rank(); ++i) {
      auto x = g.sample_uniform(rng);
      d.generators.push_back(x);
      d.orders.push_back(g.element_order(x));
      logs.push_back(std::get<IntVector>(x));
    }
    Integer prod = 1;
    for (const auto& o : d.orders) prod *= o;
    const bool indep = algebra::subgroup_order(spec.orders, logs) == prod;
    EdlpSolver solver(g, d);
    OpCounter c;
    CHECK(solver.independent(c) == indep);
    if (!indep) {
      CHECK_THROWS_AS(solver.solve(g.identity()), AssumptionFailure);
      continue;
    }
    ++bases;
    for (int t = 0; t < 40; ++t) {
      // Random element of the span.
      IntVector a(d.size());
      GroupElement x = g.identity();
      for (std::size_t i = 0; i < d.size(); ++i) {
        a[i] = algebra::random_below(rng, d.orders[i]);
        x = g.mul(x, g.pow(d.generators[i], a[i]));
      }
      CHECK(solver.solve(x).exponents == a);
      CHECK(edlp_brute(g, d, x).exponents == a);
    }
  }

  auto params = presets::c2m(6, 12, rng);
  auto u = presets::realize(params);
  const Integer q = algebra::odd_part(u.order()).odd;
  Decomposition d2;
  for (std::size_t i = 0; i < 6; ++i) {
    d2.generators.push_back(u.pow(u.generator(i), q));
    d2.orders.push_back(2);
  }
  EdlpSolver s2(u, d2);
  for (int t = 0; t < 50; ++t) {
    auto x = u.pow(u.sample_uniform(rng), q);
    CHECK(s2.solve(x).exponents == edlp_brute(u, d2, x).exponents);
  }
  // An element outside the 2-Sylow subgroup is reported, not mis-solved.
  CHECK_THROWS_AS(s2.solve(u.generator(0)), AssumptionFailure);
}

TEST_CASE("edlp_solve assumption checks") {
  auto g = make_transparent(spec_of({4, 2}));
  try {
    EdlpSolver bad(g, {{IntVector{1, 0}}, {Integer(3)}});
    FAIL("expected failure");
  } catch (const AssumptionFailure& e) {
    CHECK(e.label() == "2-group");
  }
  EdlpSolver wrong_order(g, {{IntVector{2, 0}}, {Integer(4)}});
  try {
    wrong_order.solve(g.identity());
    FAIL("expected failure");
  } catch (const AssumptionFailure& e) {
    CHECK(e.label() == "A4");
  }
  EdlpSolver dependent(g, {{IntVector{1, 0}, IntVector{2, 0}}, {Integer(4), Integer(2)}});
  try {
    dependent.solve(IntVector{1, 0});
    FAIL("expected failure");
  } catch (const AssumptionFailure& e) {
    CHECK(e.label() == "A3");
  }
  EdlpSolver loose(g, {{IntVector{1, 0}, IntVector{2, 0}}, {Integer(4), Integer(2)}},
                   EdlpOptions{false, 30});
  auto r = loose.solve(IntVector{3, 0});
  CHECK(algebra::mod(r.exponents[0] + 2 * r.exponents[1], 4) == 3);
  EdlpSolver partial(g, {{IntVector{1, 0}}, {Integer(4)}});
  CHECK_THROWS_AS(partial.solve(IntVector{0, 1}), AssumptionFailure);
}

TEST_CASE("edlp work and budget") {
  Rng rng(12);
  // Cyclic 2-part of order 2^64: one table of two entries, 64 levels.
  auto params = presets::cyclic_2power(64, 8, rng);
  auto u = presets::realize(params);
  const Integer q = algebra::odd_part(u.order()).odd;
  Decomposition d{{u.pow(u.generator(0), q)}, {algebra::pow2(64)}};
  EdlpSolver s(u, d);
  for (int t = 0; t < 5; ++t) {
    auto a = algebra::random_below(rng, algebra::pow2(64));
    auto r = s.solve(u.pow(d.generators[0], a));
    CHECK(r.exponents[0] == a);
    CHECK(r.work < 64 * 64 * 2);
  }

  auto c = presets::c2m(20, 16, rng);
  auto g = presets::realize(c);
  const Integer qc = algebra::odd_part(g.order()).odd;
  Decomposition dc;
  for (std::size_t i = 0; i < 20; ++i) {
    dc.generators.push_back(g.pow(g.generator(i), qc));
    dc.orders.push_back(2);
  }
  EdlpSolver sc(g, dc);
  OpCounter tight(100);
  CHECK_THROWS_AS(sc.solve(dc.generators[3], tight), BudgetExceeded);
  OpCounter loose(1 << 14);
  auto r = sc.solve(g.mul(dc.generators[3], dc.generators[17]), loose);
  CHECK(r.exponents[3] == 1);
  CHECK(r.exponents[17] == 1);
  CHECK(r.work <= (1 << 12));

  // Over budget and over the table cap: the budget is what gets reported.
  EdlpOptions capped;
  capped.max_table_bits = 4;
  EdlpSolver small(g, dc, capped);
  CHECK_THROWS_AS(small.solve(dc.generators[3]), Refusal);
  OpCounter hundred(100);
  CHECK_THROWS_AS(small.solve(dc.generators[3], hundred), BudgetExceeded);
}

TEST_CASE("independence of uniform tuples") {
  Rng rng(13);
  for (unsigned lambda : {3u, 5u}) {
    IntVector d(lambda, Integer(2));
    auto g = make_packed_2group(AbelianGroupSpec(d));
    for (int t = 0; t < 300; ++t) {
      Decomposition dec;
      std::vector<IntVector> logs;
      for (int i = 0; i < 3; ++i) {
        auto x = g.sample_uniform(rng);
        dec.generators.push_back(x);
        dec.orders.push_back(2);
        logs.push_back(g.trapdoor_log(x));
      }
      OpCounter c;
      EdlpSolver s(g, dec, EdlpOptions{false, 30});
      CHECK(s.independent(c) == (algebra::subgroup_order(d, logs) == 8));
    }
  }
}

TEST_CASE("membership_solve") {
  auto g = make_transparent(spec_of({4}));
  EdlpSolver h2(g, spec_decomposition(g));
  OpCounter c;
  auto yes = membership_solve(h2, {IntVector{2}}, IntVector{2}, c);
  CHECK(yes.member);
  CHECK(yes.witness == IntVector{1});
  CHECK_FALSE(membership_solve(h2, {IntVector{2}}, IntVector{1}, c).member);
  CHECK(membership_solve(h2, {}, g.identity(), c).member);

  Rng rng(14);
  int queries = 0;
  for (int k = 1; k <= 12; ++k) {
    auto specs = test::two_groups_of_order(k);
    for (int t = 0; t < 8; ++t) {
      const auto& spec = specs[rng() % specs.size()];
      auto hg = make_packed_2group(spec);
      EdlpSolver hs(hg, spec_decomposition(hg));
      std::vector<GroupElement> y;
      const int ny = static_cast<int>(rng() % 3);
      for (int i = 0; i < ny; ++i) y.push_back(hg.pow(hg.sample_uniform(rng), 1 + rng() % 3));
      std::vector<GroupElement> elems;
      auto sub = closure(hg, y, elems);
      for (int s = 0; s < 6; ++s) {
        auto x = (s % 2) ? elems[rng() % elems.size()] : hg.sample_uniform(rng);
        auto v = membership_solve(hs, y, x, c);
        CHECK(v.member == (sub.count(groups::hash_element(x)) > 0));
        if (v.member) {
          GroupElement acc = hg.identity();
          for (std::size_t i = 0; i < y.size(); ++i) acc = hg.mul(acc, hg.pow(y[i], v.witness[i]));
          CHECK(acc == x);
        }
        ++queries;
      }
    }
  }
  CHECK(queries == 12 * 8 * 6);
}

TEST_CASE("reduce_sylow2") {
  Rng rng(15);
  auto G = make_transparent(spec_of({12}));
  auto H = make_transparent(spec_of({8}));
  // In a cyclic H only a psi of full 2-part keeps tau.
  auto kp = scheme::keygen(G, H, spec_of({8}), rng);
  auto ct = scheme::encrypt_with(kp.pk, 1, IntVector{0});
  auto red = reduce_sylow2(make_instance(kp.pk, ct));
  CHECK(red.q == 3);
  CHECK(red.g[0] == GroupElement{IntVector{3}});
  CHECK(red.orders[0] == 4);
  CHECK(red.tau == kp.pk.tau);
  CHECK(G.is_identity(red.ct.g));
  CHECK(red.ct.h == kp.pk.tau);

  auto G2 = make_transparent(spec_of({8, 2}));
  auto kp2 = scheme::keygen(G2, H, spec_of({8}), rng);
  auto ct2 = scheme::encrypt(kp2.pk, 0, rng);
  auto inst2 = make_instance(kp2.pk, ct2);
  auto red2 = reduce_sylow2(inst2);
  CHECK(red2.q == 1);
  CHECK(red2.g == inst2.g);
  CHECK(red2.ct == inst2.ct);
}

TEST_CASE("recover_bit end to end") {
  Rng rng(16);
  int wrong = 0, trials = 0;
  for (int k = 0; k < 12; ++k) {
    auto kp = units_key(rng);
    for (int t = 0; t < 20; ++t) {
      const int beta = t % 2;
      auto ct = scheme::encrypt(kp.pk, beta, rng);
      AttackReport rep;
      wrong += recover_bit(make_instance(kp.pk, ct), {}, &rep) != beta;
      CHECK(rep.bit == beta);
      CHECK(rep.flags.a3 == true);
      CHECK(rep.stages.size() == 4);
      ++trials;
    }
  }
  CHECK(trials == 240);
  CHECK(wrong == 0);

  scheme::KeygenOptions quiet;
  quiet.noiseless = true;
  auto nk = units_key(rng, quiet);
  for (int beta = 0; beta < 2; ++beta) CHECK(recover_bit(make_instance(nk.pk, scheme::encrypt(nk.pk, beta, rng))) == beta);
}

TEST_CASE("recover_bit reports failures") {
  Rng rng(17);
  auto G = make_transparent(spec_of({4, 2}));
  auto H = make_transparent(spec_of({4, 2}));
  scheme::KeygenOptions opt;
  opt.explicit_generators = std::vector<GroupElement>{IntVector{1, 0}, IntVector{2, 0}};
  auto kp = scheme::keygen(G, H, spec_of({2}), rng, opt);
  auto ct = scheme::encrypt(kp.pk, 1, rng);
  AttackReport rep;
  try {
    recover_bit(make_instance(kp.pk, ct), {}, &rep);
    FAIL("expected failure");
  } catch (const AssumptionFailure& e) {
    CHECK(e.label() == "A3");
  }
  CHECK(rep.flags.a3 == false);
  REQUIRE(rep.stages.size() == 2);
  CHECK(rep.stages[1].verdict.find("failed") == 0);

  auto c = presets::c2m(24, 16, rng);
  auto Gc = presets::realize(c);
  auto Hc = presets::realize(presets::c2m(3, 16, rng));
  auto kc = scheme::keygen(Gc, Hc, spec_of({2}), rng);
  AttackOptions small;
  small.budget = 1000;
  CHECK_THROWS_AS(recover_bit(make_instance(kc.pk, scheme::encrypt(kc.pk, 0, rng)), small), BudgetExceeded);
}

TEST_CASE("shor_stub_kernel") {
  auto g = make_transparent(spec_of({2}));
  OpCounter c;
  auto k = shor_stub_kernel(g, spec_decomposition(g), IntVector{1}, c);
  // Lattice generated by (2,0), (0,2), (1,1).
  std::vector<IntVector> expect{{2, 0}, {0, 2}, {1, 1}};
  CHECK(algebra::lattice_basis(expect, 2) == k.generators);

  auto h = make_transparent(spec_of({4, 2}));
  auto k2 = shor_stub_kernel(h, spec_decomposition(h), h.identity(), c);
  std::vector<IntVector> with_unit = k2.generators;
  with_unit.push_back(IntVector{0, 0, 1});
  CHECK(algebra::lattice_basis(with_unit, 3) == k2.generators);

  Rng rng(18);
  auto u = test::random_units(rng, 100, 300);
  auto x = u.sample_uniform(rng);
  auto k3 = shor_stub_kernel(u, spec_decomposition(u), x, c);
  for (const auto& v : k3.generators) {
    GroupElement acc = u.pow(x, v.back());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) acc = u.mul(acc, u.pow(u.generator(i), v[i]));
    CHECK(u.is_identity(acc));
  }
  auto big = presets::realize(presets::c2m(4, 20, rng));
  CHECK_THROWS_AS(shor_stub_kernel(big, spec_decomposition(big), big.generator(0), c), Refusal);
}

TEST_CASE("recover_bit_via_kernel agrees with recover_bit") {
  Rng rng(19);
  int disagree = 0;
  for (int t = 0; t < 40; ++t) {
    auto kp = units_key(rng);
    const int beta = static_cast<int>(rng() & 1);
    auto inst = make_instance(kp.pk, scheme::encrypt(kp.pk, beta, rng));
    AttackReport rep;
    const int a = recover_bit(inst);
    const int b = recover_bit_via_kernel(inst, {}, &rep);
    disagree += (a != b) + (a != beta);
    CHECK(rep.strategy == "kernel");
  }
  CHECK(disagree == 0);
  auto kp = units_key(rng);
  IntVector zero(kp.pk.m(), 0);
  CHECK(recover_bit_via_kernel(make_instance(kp.pk, scheme::encrypt_with(kp.pk, 0, zero))) == 0);
}

TEST_CASE("convert_instance") {
  Rng rng(20);
  auto G = make_transparent(spec_of({8, 4}));
  auto H = make_transparent(spec_of({8, 4, 2}));
  auto kp = scheme::keygen(G, H, spec_of({2, 2}), rng);
  auto ct = scheme::encrypt(kp.pk, 1, rng);
  auto inst = make_instance(kp.pk, ct);
  OpCounter c;

  auto same = convert_instance(inst, theta_identity(H), c);
  CHECK(same.ell == inst.ell);
  CHECK(same.ct == inst.ct);
  CHECK(recover_bit(same) == 1);

  // psi itself kills the noise and keeps tau.
  auto via_psi = convert_instance(inst, theta_matrix(H, kp.sk.psi), c);
  auto red = reduce_sylow2(via_psi);
  for (std::size_t i = 0; i < red.ell.size(); ++i) {
    CHECK(via_psi.H.is_identity(via_psi.H.pow(red.ell[i], red.orders[i])));
  }
  for (int t = 0; t < 20; ++t) {
    const int beta = t & 1;
    auto conv = convert_instance(make_instance(kp.pk, scheme::encrypt(kp.pk, beta, rng)),
                                 theta_matrix(H, kp.sk.psi), c);
    CHECK(recover_bit(conv) == beta);
  }

  auto zero = scheme::HomMatrix::zero(H.spec(), spec_of({2}));
  try {
    convert_instance(inst, theta_matrix(H, zero), c);
    FAIL("expected rejection");
  } catch (const AssumptionFailure& e) {
    CHECK(e.label() == "theta");
  }
}

TEST_CASE("table G is abelianized before the attack") {
  Rng rng(21);
  for (auto table : {groups::symmetric_group(3), groups::dihedral_group(4)}) {
    auto G = groups::make_table_backend(std::make_shared<const groups::FiniteGroupTable>(table));
    auto H = make_transparent(spec_of({4, 2}));
    auto kp = scheme::keygen(G, H, spec_of({2}), rng);
    for (int t = 0; t < 10; ++t) {
      const int beta = t & 1;
      auto ct = scheme::encrypt(kp.pk, beta, rng);
      CHECK(scheme::decrypt(kp.sk, ct) == beta);
      auto inst = make_instance(kp.pk, ct);
      CHECK_FALSE(inst.flags.a1);
      CHECK_THROWS_AS(recover_bit(inst), AssumptionFailure);
      OpCounter c;
      CHECK(recover_bit(convert_instance(inst, theta_identity(H), c)) == beta);
    }
  }
}

TEST_CASE("index-2 search handles dependent public generators") {
  Rng rng(22);
  int solved = 0;
  for (int t = 0; t < 20; ++t) {
    auto Gp = presets::c2m(2, 10, rng);
    auto G = presets::realize(Gp);
    auto H = presets::realize(presets::c2m(3, 10, rng));
    scheme::KeygenOptions opt;
    auto g0 = G.generator(0);
    opt.explicit_generators = std::vector<GroupElement>{g0, G.pow(g0, 3), G.generator(1)};
    scheme::KeyPair kp;
    try {
      kp = scheme::keygen(G, H, spec_of({2}), rng, opt);
    } catch (const KeygenError&) {
      continue;
    }
    const int beta = static_cast<int>(rng() & 1);
    auto inst = make_instance(kp.pk, scheme::encrypt(kp.pk, beta, rng));
    CHECK_THROWS_AS(recover_bit(inst), AssumptionFailure);
    OpCounter c;
    auto theta = search_index2_theta(inst, rng, 24, c);
    REQUIRE(theta.has_value());
    CHECK(recover_bit_index2(inst, *theta, c) == beta);
    ++solved;
  }
  CHECK(solved > 10);

  // Z/4 with tau = 2: the only index-2 subgroup contains tau.
  auto G = make_transparent(spec_of({2}));
  auto H = make_transparent(spec_of({4}));
  auto kp = scheme::keygen(G, H, spec_of({4}), rng);
  OpCounter c;
  CHECK_FALSE(search_index2_theta(make_instance(kp.pk, scheme::encrypt(kp.pk, 1, rng)), rng, 8, c));
}
