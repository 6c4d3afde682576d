#include "doctest.h"

#include <lhn/errors.hpp>
#include <lhn/solvable.hpp>

#include <algorithm>
#include <numeric>

using namespace lhn;
using namespace lhn::solvable;
using groups::FiniteGroupTable;

namespace {

TablePtr ptr(FiniteGroupTable t) { return std::make_shared<const FiniteGroupTable>(std::move(t)); }

TablePtr cyclic(unsigned n) { return ptr(FiniteGroupTable::from_abelian(AbelianGroupSpec{{Integer(n)}})); }

std::vector<IntVector> layer_orders(const DerivedLayerData& d) {
  std::vector<IntVector> out;
  for (const auto& l : d.layers) out.push_back(l.orders);
  return out;
}

struct Case {
  const char* name;
  TablePtr G;
  TablePtr H;
};

std::vector<Case> cases() {
  auto s3 = ptr(groups::symmetric_group(3));
  auto d4 = ptr(groups::dihedral_group(4));
  auto q8 = ptr(groups::quaternion_group());
  auto agl = ptr(groups::affine_group(13));
  return {
      {"S3", s3, ptr(FiniteGroupTable::direct_product(*s3, *cyclic(2)))},
      {"D4", d4, d4},
      {"Q8", q8, q8},
      {"AGL(1,13)", agl, ptr(FiniteGroupTable::direct_product(*agl, *cyclic(2)))},
  };
}

}  // namespace

TEST_CASE("derived layers") {
  CHECK(layer_orders(build_layer_data(*ptr(FiniteGroupTable::from_abelian(AbelianGroupSpec{{4, 2}})))) ==
        std::vector<IntVector>{{2, 4}});
  CHECK(layer_orders(build_layer_data(groups::symmetric_group(3))) == std::vector<IntVector>{{2}, {3}});
  CHECK(layer_orders(build_layer_data(groups::dihedral_group(4))) == std::vector<IntVector>{{2, 2}, {2}});
  CHECK(layer_orders(build_layer_data(groups::quaternion_group())) == std::vector<IntVector>{{2, 2}, {2}});
  CHECK(layer_orders(build_layer_data(groups::affine_group(13))) == std::vector<IntVector>{{12}, {13}});
  CHECK(layer_orders(build_layer_data(groups::symmetric_group(4))) ==
        std::vector<IntVector>{{2}, {3}, {2, 2}});
  CHECK(build_layer_data(*cyclic(1)).length() == 0);
  CHECK_THROWS_AS(build_layer_data(groups::symmetric_group(5)), Refusal);
}

TEST_CASE("normal form is a bijection onto the box") {
  for (auto g : {groups::symmetric_group(3), groups::symmetric_group(4), groups::dihedral_group(4),
                 groups::dihedral_group(6), groups::quaternion_group(), groups::affine_group(5),
                 groups::affine_group(13)}) {
    auto d = build_layer_data(g);
    CHECK(normal_form_is_bijective(g, d));
    for (Index x = 0; x < g.order(); ++x) CHECK(from_normal_form(g, d, normal_form(g, d, x)) == x);
  }
}

TEST_CASE("layer quotients are abelian") {
  auto g = groups::symmetric_group(4);
  auto d = build_layer_data(g);
  for (std::size_t i = 0; i < d.length(); ++i) {
    const auto& next = i + 1 < d.length() ? d.layers[i + 1].subgroup : d.trivial;
    auto comm = groups::commutator_subgroup(g, d.layers[i].subgroup);
    CHECK(std::includes(next.begin(), next.end(), comm.begin(), comm.end()));
    CHECK(groups::is_normal_in(g, next, d.layers[i].subgroup));
  }
}

TEST_CASE("hom and normal subgroup enumeration") {
  auto s3 = groups::symmetric_group(3);
  auto gens = build_layer_data(s3).flat_generators();
  CHECK(enumerate_homs(s3, gens, s3).size() == 10);
  CHECK(enumerate_homs(s3, gens, *cyclic(2)).size() == 2);
  CHECK(enumerate_homs(s3, gens, *cyclic(3)).size() == 1);
  auto d4 = groups::dihedral_group(4);
  CHECK(enumerate_homs(d4, build_layer_data(d4).flat_generators(), *cyclic(2)).size() == 4);

  CHECK(normal_subgroups(s3).size() == 3);
  CHECK(normal_subgroups(d4).size() == 6);
  CHECK(normal_subgroups(groups::quaternion_group()).size() == 6);
  CHECK(normal_subgroups(groups::symmetric_group(4)).size() == 4);
  ElementSet all(d4.order());
  std::iota(all.begin(), all.end(), Index{0});
  for (const auto& n : normal_subgroups(d4)) CHECK(groups::is_normal_in(d4, n, all));

  auto q = quotient_table(d4, d4.center());
  CHECK(q.table->order() == 4);
  CHECK(q.table->is_abelian());
  for (Index a = 0; a < d4.order(); ++a) {
    for (Index b = 0; b < d4.order(); ++b) {
      CHECK(q.project[d4.mul(a, b)] == q.table->mul(q.project[a], q.project[b]));
    }
  }
}

TEST_CASE("solvable scheme and attack") {
  Rng rng(30);
  for (const auto& c : cases()) {
    CAPTURE(c.name);
    for (int key = 0; key < 4; ++key) {
      auto kp = keygen(c.G, c.H, rng);
      CHECK(normal_form_is_bijective(*kp.pk.G, kp.pk.layers));
      for (std::size_t k = 0; k < kp.pk.g.size(); ++k) {
        CHECK(decrypt(kp.sk, kp.pk, {kp.pk.g[k], kp.pk.ell[k]}) == 0);
      }
      for (int t = 0; t < 20; ++t) {
        const int beta = t & 1;
        auto ct = encrypt(kp.pk, beta, rng);
        CHECK(decrypt(kp.sk, kp.pk, ct) == beta);
        attack::AttackReport report;
        CHECK(solvable::recover_bit(kp.pk, ct, &report) == beta);
        CHECK(report.bit == beta);
        CHECK(report.stages.size() == 2);
      }
    }
  }
}

TEST_CASE("noiseless solvable keys") {
  Rng rng(31);
  auto s3 = ptr(groups::symmetric_group(3));
  auto kp = keygen(s3, ptr(FiniteGroupTable::direct_product(*s3, *cyclic(2))), rng, 0, true);
  for (std::size_t k = 0; k < kp.pk.g.size(); ++k) CHECK(kp.pk.ell[k] == kp.sk.phi[kp.pk.g[k]]);
  for (int t = 0; t < 10; ++t) {
    auto ct = encrypt(kp.pk, t & 1, rng);
    CHECK(decrypt(kp.sk, kp.pk, ct) == (t & 1));
    CHECK(solvable::recover_bit(kp.pk, ct) == (t & 1));
  }
}

TEST_CASE("keygen requirements") {
  Rng rng(32);
  auto s3 = ptr(groups::symmetric_group(3));
  try {
    keygen(s3, s3, rng);
    FAIL("S3 has trivial center");
  } catch (const KeygenError& e) {
    CHECK(e.requirement() == "tau");
  }
  // Z/2: the only proper normal subgroup is trivial, but phi(S3) must reach tau.
  auto kp = keygen(s3, cyclic(2), rng);
  CHECK(kp.sk.kernel.size() == 1);
  CHECK(kp.pk.tau != kp.pk.H->identity());
  // A3 has only the trivial hom to Z/2, so tau never enters the normal closure.
  auto a3 = cyclic(3);
  CHECK_THROWS_AS(keygen(a3, cyclic(2), rng, 16), KeygenError);
}

TEST_CASE("words out of normal-form order") {
  Rng rng(33);
  auto s3 = ptr(groups::symmetric_group(3));
  auto h = ptr(FiniteGroupTable::direct_product(*s3, *cyclic(2)));
  int failures = 0;
  for (int key = 0; key < 20; ++key) {
    auto kp = keygen(s3, h, rng);
    // layer-2 generator before the layer-1 one
    auto ct = encrypt_word(kp.pk, 0, {1, 0});
    CHECK(decrypt(kp.sk, kp.pk, ct) == 0);
    try {
      solvable::recover_bit(kp.pk, ct);
    } catch (const AssumptionFailure& e) {
      CHECK(e.label() == "ordering");
      ++failures;
    }
    CHECK(solvable::recover_bit(kp.pk, encrypt_word(kp.pk, 1, {0, 1})) == 1);
  }
  CHECK(failures > 0);
}

TEST_CASE("abelian tables agree with the abelian attack") {
  Rng rng(34);
  auto g = ptr(FiniteGroupTable::from_abelian(AbelianGroupSpec{{4, 2}}));
  auto h = ptr(FiniteGroupTable::from_abelian(AbelianGroupSpec{{4, 2, 2}}));
  for (int key = 0; key < 5; ++key) {
    auto kp = keygen(g, h, rng);
    for (int t = 0; t < 10; ++t) {
      const int beta = t & 1;
      auto ct = encrypt(kp.pk, beta, rng);
      auto inst = attack_instance(kp.pk, ct);
      CHECK(inst.flags.a1);
      CHECK(solvable::recover_bit(kp.pk, ct) == beta);
      CHECK(attack::recover_bit(inst) == beta);
    }
  }
}

TEST_CASE("abelianizing H") {
  Rng rng(35);
  // tau outside [H, H]: the abelianized instance still carries the bit.
  auto s3 = ptr(groups::symmetric_group(3));
  auto kp = keygen(s3, ptr(FiniteGroupTable::direct_product(*s3, *cyclic(2))), rng);
  for (int t = 0; t < 10; ++t) {
    auto ct = encrypt(kp.pk, t & 1, rng);
    auto inst = attack_instance(kp.pk, ct);
    CHECK_FALSE(inst.flags.a1);
    attack::OpCounter c;
    auto conv = attack::convert_instance(inst, attack::theta_abelianize(inst.H), c);
    CHECK(attack::recover_bit(conv) == (t & 1));
  }
  // In D4 the only central involution is a commutator.
  auto d4 = ptr(groups::dihedral_group(4));
  auto kd = keygen(d4, d4, rng);
  auto inst = attack_instance(kd.pk, encrypt(kd.pk, 1, rng));
  attack::OpCounter c;
  try {
    attack::convert_instance(inst, attack::theta_abelianize(inst.H), c);
    FAIL("expected rejection");
  } catch (const AssumptionFailure& e) {
    CHECK(e.label() == "theta");
  }
}
