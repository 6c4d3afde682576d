#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace lhn {

using Integer = mpz_class;
using IntVector = std::vector<Integer>;
using Rng = std::mt19937_64;

namespace algebra {

// Dense integer matrix, row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntMatrix(std::size_t rows, std::size_t cols, IntVector entries);

  static IntMatrix identity(std::size_t n);
  static IntMatrix diagonal(std::span<const Integer> diag);
  // Matrix whose columns are the given vectors (all of length `rows`).
  static IntMatrix from_columns(std::size_t rows,
                                std::span<const IntVector> columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Integer& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  const Integer& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  const IntVector& entries() const { return data_; }
  IntVector column(std::size_t c) const;
  IntVector row(std::size_t r) const;

  void swap_rows(std::size_t a, std::size_t b);
  void swap_cols(std::size_t a, std::size_t b);
  // row[dst] += k * row[src]
  void add_row_multiple(std::size_t dst, std::size_t src, const Integer& k);
  void add_col_multiple(std::size_t dst, std::size_t src, const Integer& k);
  void negate_row(std::size_t r);
  void negate_col(std::size_t c);

  IntVector operator*(std::span<const Integer> v) const;
  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
  friend bool operator==(const IntMatrix& a, const IntMatrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  IntVector data_;
};

// Fraction-free determinant (Bareiss). Square matrices only.
Integer determinant(const IntMatrix& m);

struct SnfDecomposition {
  IntMatrix U;  // rows x rows, unimodular
  IntMatrix U_inverse;
  IntMatrix S;  // rows x cols, diagonal, nonnegative, S[i,i] | S[i+1,i+1]
  IntMatrix V;  // cols x cols, unimodular
  std::size_t rank = 0;

  Integer diag(std::size_t i) const { return S(i, i); }
};

// U * M * V = S. The result is checked by multiplication before returning.
SnfDecomposition smith_normal_form(const IntMatrix& m);

struct LinearSystemSolution {
  std::optional<IntVector> particular;
  std::vector<IntVector> kernel_basis;
  IntVector moduli;

  bool solvable() const { return particular.has_value(); }
};

// Precomputed solver for A x = b (mod moduli), rowwise moduli. One SNF of the
// lifted matrix [A | diag(moduli)] serves every right-hand side.
class ModularSolver {
 public:
  ModularSolver(const IntMatrix& a, std::span<const Integer> moduli);

  std::optional<IntVector> particular(std::span<const Integer> b) const;
  // Generators of all integer x with A x = 0 (mod moduli).
  const std::vector<IntVector>& kernel_basis() const { return kernel_; }

  LinearSystemSolution solve(std::span<const Integer> b) const;

  std::size_t unknowns() const { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  IntVector moduli_;
  SnfDecomposition snf_;
  std::vector<IntVector> kernel_;
};

LinearSystemSolution solve_mod(const IntMatrix& a, std::span<const Integer> b,
                               std::span<const Integer> moduli);

// Reduced basis (row echelon, nonnegative pivots) of the Z-lattice spanned by
// `generators`. Zero vectors are dropped.
std::vector<IntVector> lattice_basis(std::span<const IntVector> generators,
                                     std::size_t dim);

// Order of the subgroup of Z/d_1 + ... + Z/d_k generated by the given
// exponent vectors.
Integer subgroup_order(std::span<const Integer> orders,
                       std::span<const IntVector> generators);

// ---- number theory helpers --------------------------------------------

struct OddPart {
  Integer odd;
  unsigned long exponent;  // n = 2^exponent * odd
};
OddPart odd_part(const Integer& n);

struct PrimePower {
  Integer prime;
  unsigned long exponent;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};
using Factorization = std::vector<PrimePower>;

bool is_probable_prime(const Integer& n);
// Sorted by prime. n >= 1.
Factorization factorize(const Integer& n);
Integer multiply_out(const Factorization& f);

Integer gcd(const Integer& a, const Integer& b);
Integer lcm(const Integer& a, const Integer& b);
// Nonnegative residue.
Integer mod(const Integer& a, const Integer& m);
// Value modulo m, or nullopt when a is not invertible.
std::optional<Integer> inverse_mod(const Integer& a, const Integer& m);
Integer power_mod(const Integer& base, const Integer& exp, const Integer& m);
// Solution x of x = r_i (mod m_i) for pairwise coprime moduli.
Integer crt(std::span<const Integer> residues, std::span<const Integer> moduli);

// Uniform in [0, bound). bound >= 1.
Integer random_below(Rng& rng, const Integer& bound);

std::uint64_t to_u64(const Integer& v);
Integer pow2(unsigned long e);

}  // namespace algebra
}  // namespace lhn
