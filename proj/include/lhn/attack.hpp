#pragma once

#include <lhn/scheme.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lhn::attack {

using groups::CountedGroup;
using groups::GroupBackend;
using groups::GroupElement;
using groups::OpCounter;

// Elements b_1..b_m of a group together with their claimed orders.
struct Decomposition {
  std::vector<GroupElement> generators;
  IntVector orders;

  std::size_t size() const { return generators.size(); }
};

struct EdlpResult {
  IntVector exponents;
  std::uint64_t work = 0;
};

struct EdlpOptions {
  // Check that the generators are independent before the first solve. When
  // off, the solver returns some representation for dependent tuples.
  bool validate_independence = true;
  // Largest table half, in bits.
  unsigned max_table_bits = 30;
};

// Extended discrete logarithms over independent generators of a 2-group.
//
// Exponents are found one 2-adic digit at a time. At digit level t the
// residual, pushed into the 2-torsion layer, is a sum of a subset of the
// involutions c_i = b_i^(2^(k_i - 1)) of the generators still active at that
// level; the subset is found by meet-in-the-middle with the larger half in a
// table. Tables depend only on the active set and are kept between solves.
// Not safe for concurrent use (the tables are built lazily).
class EdlpSolver {
 public:
  EdlpSolver(GroupBackend g, Decomposition d, EdlpOptions options = {});

  EdlpResult solve(const GroupElement& x, OpCounter& counter) const;
  EdlpResult solve(const GroupElement& x) const;

  // True iff every b_i has exactly its declared order and the sum of the
  // <b_i> is direct.
  bool independent(OpCounter& counter) const;

  const Decomposition& decomposition() const { return d_; }
  const GroupBackend& backend() const { return g_; }
  unsigned max_depth() const { return depth_; }

 private:
  struct Table {
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> entries;  // (hash, mask)
  };

  void prepare(const CountedGroup& cg) const;
  const Table& table(std::size_t active, const CountedGroup& cg) const;
  GroupElement subset_sum(const std::vector<std::size_t>& idx, std::uint64_t mask,
                          const CountedGroup& cg) const;
  // Masks (over first|second) with sum(first) == w * prod(second).
  std::optional<std::uint64_t> find(const Table& t, const GroupElement& w,
                                    const CountedGroup& cg, bool skip_zero) const;

  GroupBackend g_;
  Decomposition d_;
  EdlpOptions options_;
  std::vector<unsigned> k_;
  unsigned depth_ = 0;
  std::vector<std::size_t> by_depth_;  // generators sorted by k, deepest first

  mutable bool prepared_ = false;
  mutable std::vector<GroupElement> socle_;
  mutable std::vector<std::vector<GroupElement>> steps_;  // b_i^(-2^s)
  mutable std::map<std::size_t, Table> tables_;
  mutable std::optional<bool> independent_;
};

// Exhaustive search of the exponent box. Refuses boxes above 2^24.
EdlpResult edlp_brute(const GroupBackend& g, const Decomposition& d, const GroupElement& x);

struct MembershipVerdict {
  bool member = false;
  IntVector witness;  // x = prod y_k^witness_k when member
  std::uint64_t work = 0;
};

// Decides x in <Y> inside a 2-group, logs taken with `h2`.
MembershipVerdict membership_solve(const EdlpSolver& h2, const std::vector<GroupElement>& y,
                                   const GroupElement& x, OpCounter& counter);

struct AssumptionFlags {
  bool a1 = false;         // G and H abelian
  bool a2 = false;         // group orders known, so odd parts are computable
  std::optional<bool> a3;  // public g_i independent; decided during the attack
  bool a4 = false;         // |<g_i>| published
};

// What the adversary sees.
struct AttackInstance {
  GroupBackend G;
  GroupBackend H;
  std::vector<GroupElement> g;
  std::vector<GroupElement> ell;
  IntVector orders;  // |<g_i>|
  GroupElement tau;
  scheme::Ciphertext ct;
  Decomposition h_decomposition;  // of H, or of H_2 once reduced
  Integer q = 1;
  bool reduced = false;
  AssumptionFlags flags;
};

AttackInstance make_instance(const scheme::PublicKey& pk, const scheme::Ciphertext& ct);

// Every element raised to q = lcm of the odd parts of |G| and |H|.
AttackInstance reduce_sylow2(const AttackInstance& inst, OpCounter& counter);
AttackInstance reduce_sylow2(const AttackInstance& inst);

struct Stage {
  std::string name;
  double seconds = 0;
  std::uint64_t ops = 0;
  std::string verdict;
};

struct AttackReport {
  std::string strategy;
  std::vector<Stage> stages;
  AssumptionFlags flags;
  std::optional<int> bit;

  std::uint64_t total_ops() const;
};

struct AttackOptions {
  std::optional<std::uint64_t> budget;
  bool validate_independence = true;
};

// Classical pipeline: Sylow reduction, eDLP in G_2, membership in H_2.
// Throws AssumptionFailure / BudgetExceeded; stages finished so far are left
// in `report`.
int recover_bit(const AttackInstance& inst, const AttackOptions& options = {},
                AttackReport* report = nullptr);

// Relations g^a_(m+1) g_1^a_1 ... g_m^a_m = 1, found by exhausting the box
// (stand-in for quantum period finding). Boxes above 2^24 are refused.
struct KernelRelations {
  std::vector<IntVector> generators;  // lattice basis, coordinates (a_1..a_m, a_(m+1))
  Integer box;
  Integer g_order;
};
KernelRelations shor_stub_kernel(const GroupBackend& G, const Decomposition& d,
                                 const GroupElement& g, OpCounter& counter);

int recover_bit_via_kernel(const AttackInstance& inst, const AttackOptions& options = {},
                           AttackReport* report = nullptr);

// A homomorphism out of H that the adversary can evaluate.
struct Theta {
  GroupBackend target;  // abelian
  std::function<GroupElement(const GroupElement&, OpCounter&)> apply;
  std::string description;
};

Theta theta_identity(const GroupBackend& H);
// Given by a matrix on the cyclic decomposition of H. Coordinates are read
// directly on transparent and table backends; on units backends the target
// must be a 2-group and coordinates come from discrete logs in H_2.
Theta theta_matrix(const GroupBackend& H, const scheme::HomMatrix& m);
// Projection of a table group onto its abelianization.
Theta theta_abelianize(const GroupBackend& H);

// Pushes the H side through theta and abelianizes a table G. The result is
// abelian and unreduced. Rejected when theta(tau) = 1.
AttackInstance convert_instance(const AttackInstance& inst, const Theta& theta,
                                OpCounter& counter);

// Searches the index-2 subgroups of H for one that contains the noise but not
// tau, testing each candidate on self-encrypted bits. Refuses when H has more
// than 2^16 index-2 subgroups. Returns theta: H -> Z/2.
std::optional<scheme::HomMatrix> search_index2_theta(const AttackInstance& inst, Rng& rng,
                                                     unsigned checks, OpCounter& counter);

// Decrypts with an index-2 theta found by the search (the noiseless decryption
// in H/ker(theta)). Works when the g_i are dependent.
int recover_bit_index2(const AttackInstance& inst, const scheme::HomMatrix& theta,
                       OpCounter& counter);

}  // namespace lhn::attack
