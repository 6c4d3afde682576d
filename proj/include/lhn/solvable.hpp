#pragma once

#include <lhn/attack.hpp>
#include <lhn/table.hpp>

#include <memory>
#include <vector>

namespace lhn::solvable {

using groups::ElementSet;
using groups::FiniteGroupTable;
using groups::Index;
using TablePtr = std::shared_ptr<const FiniteGroupTable>;

// Layer i of the derived series: generators of G^(i) / G^(i+1) as a direct
// sum, with their orders modulo G^(i+1).
struct Layer {
  ElementSet subgroup;  // G^(i)
  std::vector<Index> generators;
  IntVector orders;
};

struct DerivedLayerData {
  std::vector<Layer> layers;  // s = layers.size()
  ElementSet trivial;

  std::size_t length() const { return layers.size(); }
  // n = m_1 + ... + m_s
  std::size_t dimension() const;
  // The generators g_11, ..., g_sm_s in normal-form order.
  std::vector<Index> flat_generators() const;
  IntVector flat_orders() const;
};

// Refuses non-solvable tables, naming the order of the term where the derived
// series stabilizes. Checks [G^(i), G^(i)] is inside G^(i+1) by enumerating
// commutators.
DerivedLayerData build_layer_data(const FiniteGroupTable& g);

// delta with x = prod_i prod_j g_ij^delta_ij, layer 1 leftmost. Each layer's
// coordinates are found by trying every combination of its generators.
IntVector normal_form(const FiniteGroupTable& g, const DerivedLayerData& d, Index x);
Index from_normal_form(const FiniteGroupTable& g, const DerivedLayerData& d, const IntVector& delta);

// Exhaustive: the element -> delta map is a bijection onto the box.
bool normal_form_is_bijective(const FiniteGroupTable& g, const DerivedLayerData& d);

// Homomorphisms G -> H, by the images of `gens` (which must generate G).
// Refuses when more than 2^22 image tuples survive the order filter.
std::vector<std::vector<Index>> enumerate_homs(const FiniteGroupTable& g,
                                               const std::vector<Index>& gens,
                                               const FiniteGroupTable& h);

// All normal subgroups of a table group.
std::vector<ElementSet> normal_subgroups(const FiniteGroupTable& h);

struct Quotient {
  TablePtr table;              // H / N
  std::vector<Index> project;  // H -> H / N
};
Quotient quotient_table(const FiniteGroupTable& h, const ElementSet& n);

struct PublicKey {
  TablePtr G;
  TablePtr H;
  DerivedLayerData layers;
  std::vector<Index> g;    // flat layer generators
  std::vector<Index> ell;  // phi(g_ij) h_ij
  Index tau = 0;
};

struct SecretKey {
  std::vector<Index> phi;  // image of every element of G
  ElementSet kernel;       // ker(psi), normal in H
  Quotient K;
  std::vector<Index> noise;
};

struct KeyPair {
  PublicKey pk;
  SecretKey sk;
};

// phi uniform over Hom(G, H); ker(psi) uniform over the proper normal
// subgroups missing a central involution; tau uniform over the central
// involutions outside it. Retries until tau lies in the normal closure of the
// l_ij. Throws KeygenError naming the failed requirement.
KeyPair keygen(TablePtr G, TablePtr H, Rng& rng, std::size_t max_retries = 0,
               bool noiseless = false);

// g = prod g_ij^delta_ij and h' = prod l_ij^delta_ij in the same order.
scheme::Ciphertext encrypt(const PublicKey& pk, int beta, Rng& rng);
scheme::Ciphertext encrypt_with(const PublicKey& pk, int beta, const IntVector& delta);
// Any word in the public generators, e.g. one not in normal-form order.
scheme::Ciphertext encrypt_word(const PublicKey& pk, int beta, const std::vector<std::size_t>& word);
int decrypt(const SecretKey& sk, const PublicKey& pk, const scheme::Ciphertext& ct);

// Throws AssumptionFailure("ordering") when the recomputed h' matches neither
// h nor h tau.
int recover_bit(const PublicKey& pk, const scheme::Ciphertext& ct,
                attack::AttackReport* report = nullptr);

// The same data as an abelian attack instance (G and H must be abelian).
attack::AttackInstance attack_instance(const PublicKey& pk, const scheme::Ciphertext& ct);

}  // namespace lhn::solvable
