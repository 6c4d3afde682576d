#pragma once

#include <lhn/groups.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lhn::scheme {

using groups::GroupBackend;
using groups::GroupElement;

// Homomorphism between abelian specs, acting on exponent vectors.
// a(j, i) is the image of generator i in factor j; well-defined iff
// a(j, i) = 0 (mod e_j / gcd(e_j, d_i)).
struct HomMatrix {
  AbelianGroupSpec source;
  AbelianGroupSpec target;
  algebra::IntMatrix a;  // target.rank() x source.rank()

  static HomMatrix zero(const AbelianGroupSpec& source, const AbelianGroupSpec& target);
  // Throws ConstructionError when an entry is out of range or ill-defined.
  void validate() const;
  IntVector apply(std::span<const Integer> x) const;
  bool is_trivial() const;

  friend bool operator==(const HomMatrix&, const HomMatrix&) = default;
};

// |Hom(G, H)| = prod gcd(d_i, e_j).
Integer count_homs(const AbelianGroupSpec& g, const AbelianGroupSpec& h);
HomMatrix sample_hom(const AbelianGroupSpec& g, const AbelianGroupSpec& h, Rng& rng);
// Exponent vectors (reduced modulo the source orders) generating ker(psi).
std::vector<IntVector> kernel_basis(const HomMatrix& psi);
// Uniform element of the subgroup generated by `gens` inside `spec`.
IntVector sample_span(const AbelianGroupSpec& spec, const std::vector<IntVector>& gens, Rng& rng);

struct PublicKey {
  GroupBackend G;
  GroupBackend H;
  std::vector<GroupElement> g;        // g_1..g_m
  std::vector<GroupElement> ell;      // l_i = phi(g_i) h_i
  IntVector orders;                   // |<g_i>|
  GroupElement tau;

  std::size_t m() const { return g.size(); }
};

struct SecretKey {
  GroupBackend G;
  GroupBackend H;
  AbelianGroupSpec K;
  HomMatrix phi;  // G (its abelianization for table groups) -> H
  HomMatrix psi;  // H -> K
  std::vector<IntVector> kernel_gens;
  std::vector<GroupElement> noise;  // h_1..h_m
};

struct Ciphertext {
  GroupElement g;
  GroupElement h;
  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

struct KeyPair {
  PublicKey pk;
  SecretKey sk;
};

enum class GeneratorChoice { spec_generators, uniform };

struct KeygenOptions {
  // Number of public pairs when generators are drawn uniformly.
  std::optional<std::size_t> m;
  GeneratorChoice generators = GeneratorChoice::spec_generators;
  std::optional<std::vector<GroupElement>> explicit_generators;
  // 0 means 64 * m.
  std::size_t max_retries = 0;
  bool noiseless = false;
};

// Throws KeygenError naming the requirement that could not be met.
KeyPair keygen(const GroupBackend& G, const GroupBackend& H, const AbelianGroupSpec& K,
               Rng& rng, const KeygenOptions& options = {});

Ciphertext encrypt(const PublicKey& pk, int beta, Rng& rng);
// r_i may be any integers.
Ciphertext encrypt_with(const PublicKey& pk, int beta, std::span<const Integer> r);
int decrypt(const SecretKey& sk, const Ciphertext& ct);
Ciphertext ct_add(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);

// True iff tau lies in <l_1, ..., l_m>, decided on the key owner's exponent view.
bool tau_in_public_span(const SecretKey& sk, const PublicKey& pk);
struct SubgroupCount {
  Integer count;
  bool exact = true;  // false: lower bound from the 2-torsion layers only
};
// Number of subgroups of the finite abelian group described by spec, summed
// over subgroup types with the Birkhoff formula for each Sylow subgroup.
SubgroupCount count_subgroups(const AbelianGroupSpec& spec);

struct SecurityReport {
  unsigned lambda = 0;
  Integer hom_gh;          // |Hom(G, H)|
  Integer hom_hk_minus;    // |Hom(H, K)^-|
  bool s1 = false;
  Integer subgroup_count;  // subgroups of H
  bool subgroup_count_exact = true;
  bool s3 = false;
  bool s4 = false;
  bool classically_attackable = false;
  double attack_log2_work = 0;
  bool tau_outside_commutator = false;
  std::vector<std::string> warnings;

  bool failed() const { return !s1 || !s3 || !s4; }
  bool warned() const { return !warnings.empty(); }
};

SecurityReport validate_security(const PublicKey& pk, const SecretKey& sk, unsigned lambda);

}  // namespace lhn::scheme
