#pragma once

#include <lhn/abelian_spec.hpp>
#include <lhn/algebra.hpp>
#include <lhn/table.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace lhn::groups {

// Exponent vector of a 2-group packed into one word, one bit field per factor.
struct PackedWord {
  std::uint64_t bits = 0;
  friend bool operator==(PackedWord, PackedWord) = default;
};

// Transparent: exponent vector. Units: residue mod N. Table: element index.
using GroupElement = std::variant<IntVector, Integer, Index, PackedWord>;

std::size_t hash_element(const GroupElement& x);
struct ElementHash {
  std::size_t operator()(const GroupElement& x) const { return hash_element(x); }
};

enum class Realization { transparent, packed, units_mod_n, table };
const char* realization_name(Realization r);

// One cyclic factor of (Z/p^k)^x, kept by the units realization.
struct UnitComponent {
  Integer prime;
  unsigned long exponent = 0;
  Integer prime_power;
  Integer order;
  Integer local_generator;   // modulo prime_power
  Integer global_generator;  // modulo N, 1 at the other prime powers
  bool sign_part = false;    // the -1 factor at the prime 2
};

struct UnitsModN {
  Integer modulus;
  algebra::Factorization factorization;
  IntVector residues;  // u_1..u_m
  std::vector<UnitComponent> components;
  // coordinates[i] = component coordinates of u_i.
  std::vector<IntVector> coordinates;
};

namespace detail {
class BackendImpl;
}

// Immutable, cheaply copyable handle to a group realization.
class GroupBackend {
 public:
  GroupBackend() = default;
  explicit GroupBackend(std::shared_ptr<const detail::BackendImpl> impl)
      : impl_(std::move(impl)) {}

  Realization realization() const;
  bool abelian() const;
  // Cyclic decomposition. For a table group this is its abelianization.
  const AbelianGroupSpec& spec() const;
  Integer order() const;
  std::string description() const;

  GroupElement identity() const;
  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement inv(const GroupElement& a) const;
  GroupElement pow(const GroupElement& a, const Integer& k) const;
  bool equal(const GroupElement& a, const GroupElement& b) const { return a == b; }
  bool is_identity(const GroupElement& a) const;

  // Generator i of the decomposition (a preimage for table groups).
  GroupElement generator(std::size_t i) const;
  GroupElement from_exponents(std::span<const Integer> alpha) const;
  // Exponents with respect to spec(), reduced. Uses the realization's trapdoor
  // (read-off, factored modulus, or abelianization table).
  IntVector trapdoor_log(const GroupElement& x) const;
  Integer element_order(const GroupElement& x) const;
  GroupElement sample_uniform(Rng& rng) const;
  // Throws SchemaError when x is not a canonical element of this group.
  void check_element(const GroupElement& x) const;

  const UnitsModN* units() const;
  const FiniteGroupTable* table() const;
  std::shared_ptr<const FiniteGroupTable> table_ptr() const;
  const Abelianization* abelianization() const;

  explicit operator bool() const { return impl_ != nullptr; }
  friend bool operator==(const GroupBackend& a, const GroupBackend& b) {
    return a.impl_ == b.impl_;
  }

 private:
  std::shared_ptr<const detail::BackendImpl> impl_;
};

GroupBackend make_transparent(const AbelianGroupSpec& spec);
// Transparent 2-group whose exponents fit in 64 bits. Each operation is a
// handful of word instructions.
GroupBackend make_packed_2group(const AbelianGroupSpec& spec);
// Realizes spec inside (Z/N)^x. Throws ConstructionError naming the factor
// that cannot be embedded.
GroupBackend make_units_mod_n(const Integer& n, const algebra::Factorization& f,
                              const AbelianGroupSpec& spec);
// Same, with the generating residues given. Orders and independence are
// verified.
GroupBackend make_units_mod_n(const Integer& n, const algebra::Factorization& f,
                              const AbelianGroupSpec& spec, const IntVector& residues);
GroupBackend make_table_backend(std::shared_ptr<const FiniteGroupTable> table);

// Cyclic factors of (Z/N)^x, as (prime power, order) pairs in component order.
std::vector<UnitComponent> unit_group_components(const Integer& n,
                                                 const algebra::Factorization& f);

// x^q, q odd.
GroupElement sylow2_project(const GroupBackend& g, const GroupElement& x,
                            const Integer& q);

// Order of an element of a 2-group by repeated squaring; nullopt if it is not
// 2^k for some k <= max_log.
std::optional<unsigned long> order_by_squaring(const GroupBackend& g,
                                               const GroupElement& x,
                                               unsigned long max_log);

// Group-operation counter with an optional budget.
class OpCounter {
 public:
  explicit OpCounter(std::optional<std::uint64_t> budget = std::nullopt)
      : budget_(budget) {}
  void charge(std::uint64_t n);
  // Throws BudgetExceeded up front if `predicted` more operations would not fit.
  void reserve(std::uint64_t predicted, const std::string& what) const;
  std::uint64_t ops() const { return ops_; }
  const std::optional<std::uint64_t>& budget() const { return budget_; }

 private:
  std::uint64_t ops_ = 0;
  std::optional<std::uint64_t> budget_;
};

// Backend view that charges every multiplication and inversion.
class CountedGroup {
 public:
  CountedGroup(const GroupBackend& g, OpCounter& c) : g_(g), c_(c) {}
  const GroupBackend& backend() const { return g_; }
  OpCounter& counter() const { return c_; }

  GroupElement mul(const GroupElement& a, const GroupElement& b) const {
    c_.charge(1);
    return g_.mul(a, b);
  }
  GroupElement inv(const GroupElement& a) const {
    c_.charge(1);
    return g_.inv(a);
  }
  // Charged as square-and-multiply on |k|, plus one inversion if k < 0.
  GroupElement pow(const GroupElement& a, const Integer& k) const;
  GroupElement identity() const { return g_.identity(); }

 private:
  const GroupBackend& g_;
  OpCounter& c_;
};

// Multiplications used by square-and-multiply for exponent |k|.
std::uint64_t pow_cost(const Integer& k);

}  // namespace lhn::groups
