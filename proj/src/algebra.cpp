#include "lhn/algebra.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace lhn::algebra {

namespace {
int cmpabs(const Integer& a, const Integer& b) {
  return mpz_cmpabs(a.get_mpz_t(), b.get_mpz_t());
}
}  // namespace

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols, IntVector entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("IntMatrix: entry count does not match shape");
  }
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::diagonal(std::span<const Integer> diag) {
  IntMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

IntMatrix IntMatrix::from_columns(std::size_t rows,
                                  std::span<const IntVector> columns) {
  IntMatrix m(rows, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != rows) {
      throw std::invalid_argument("IntMatrix::from_columns: ragged columns");
    }
    for (std::size_t r = 0; r < rows; ++r) m(r, c) = columns[c][r];
  }
  return m;
}

IntVector IntMatrix::column(std::size_t c) const {
  IntVector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

IntVector IntMatrix::row(std::size_t r) const {
  return IntVector(data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_);
}

void IntMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t c = 0; c < cols_; ++c) {
    mpz_swap((*this)(a, c).get_mpz_t(), (*this)(b, c).get_mpz_t());
  }
}

void IntMatrix::swap_cols(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t r = 0; r < rows_; ++r) {
    mpz_swap((*this)(r, a).get_mpz_t(), (*this)(r, b).get_mpz_t());
  }
}

void IntMatrix::add_row_multiple(std::size_t dst, std::size_t src,
                                 const Integer& k) {
  if (k == 0) return;
  for (std::size_t c = 0; c < cols_; ++c) {
    mpz_addmul((*this)(dst, c).get_mpz_t(), k.get_mpz_t(),
               (*this)(src, c).get_mpz_t());
  }
}

void IntMatrix::add_col_multiple(std::size_t dst, std::size_t src,
                                 const Integer& k) {
  if (k == 0) return;
  for (std::size_t r = 0; r < rows_; ++r) {
    mpz_addmul((*this)(r, dst).get_mpz_t(), k.get_mpz_t(),
               (*this)(r, src).get_mpz_t());
  }
}

void IntMatrix::negate_row(std::size_t r) {
  for (std::size_t c = 0; c < cols_; ++c) {
    mpz_neg((*this)(r, c).get_mpz_t(), (*this)(r, c).get_mpz_t());
  }
}

void IntMatrix::negate_col(std::size_t c) {
  for (std::size_t r = 0; r < rows_; ++r) {
    mpz_neg((*this)(r, c).get_mpz_t(), (*this)(r, c).get_mpz_t());
  }
}

IntVector IntMatrix::operator*(std::span<const Integer> v) const {
  if (v.size() != cols_) throw std::invalid_argument("IntMatrix * vector: size");
  IntVector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      mpz_addmul(out[r].get_mpz_t(), (*this)(r, c).get_mpz_t(),
                 v[c].get_mpz_t());
    }
  }
  return out;
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("IntMatrix *: shape");
  IntMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Integer& aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        mpz_addmul(out(i, j).get_mpz_t(), aik.get_mpz_t(), b(k, j).get_mpz_t());
      }
    }
  }
  return out;
}

Integer determinant(const IntMatrix& input) {
  if (input.rows() != input.cols()) {
    throw std::invalid_argument("determinant: matrix not square");
  }
  const std::size_t n = input.rows();
  if (n == 0) return 1;
  IntMatrix m = input;
  Integer sign = 1;
  Integer prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t swap = k + 1;
      while (swap < n && m(swap, k) == 0) ++swap;
      if (swap == n) return 0;
      m.swap_rows(k, swap);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Integer v = m(i, j) * m(k, k) - m(i, k) * m(k, j);
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), prev.get_mpz_t());
        m(i, j) = v;
      }
    }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

namespace {

// Position of the nonzero entry of least absolute value in the lower-right
// block starting at (t, t).
std::optional<std::pair<std::size_t, std::size_t>> min_pivot(const IntMatrix& s,
                                                             std::size_t t) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  for (std::size_t i = t; i < s.rows(); ++i) {
    for (std::size_t j = t; j < s.cols(); ++j) {
      if (s(i, j) == 0) continue;
      if (!best || cmpabs(s(i, j), s(best->first, best->second)) < 0) {
        best = {i, j};
      }
    }
  }
  return best;
}

}  // namespace

SnfDecomposition smith_normal_form(const IntMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  IntMatrix s = m;
  IntMatrix u = IntMatrix::identity(rows);
  IntMatrix u_inv = IntMatrix::identity(rows);
  IntMatrix v = IntMatrix::identity(cols);

  // Every row operation on U is mirrored by the inverse column operation on
  // U^{-1}, so U * U^{-1} = I throughout.
  auto row_op = [&](std::size_t dst, std::size_t src, const Integer& k) {
    s.add_row_multiple(dst, src, k);
    u.add_row_multiple(dst, src, k);
    u_inv.add_col_multiple(src, dst, -k);
  };
  auto row_swap = [&](std::size_t a, std::size_t b) {
    s.swap_rows(a, b);
    u.swap_rows(a, b);
    u_inv.swap_cols(a, b);
  };
  auto col_op = [&](std::size_t dst, std::size_t src, const Integer& k) {
    s.add_col_multiple(dst, src, k);
    v.add_col_multiple(dst, src, k);
  };

  std::size_t t = 0;
  const std::size_t limit = std::min(rows, cols);
  Integer q;
  while (t < limit) {
    auto pivot = min_pivot(s, t);
    if (!pivot) break;
    row_swap(t, pivot->first);
    s.swap_cols(t, pivot->second);
    v.swap_cols(t, pivot->second);

    for (;;) {
      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (s(i, t) == 0) continue;
        mpz_tdiv_q(q.get_mpz_t(), s(i, t).get_mpz_t(), s(t, t).get_mpz_t());
        row_op(i, t, -q);
        if (s(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (s(t, j) == 0) continue;
        mpz_tdiv_q(q.get_mpz_t(), s(t, j).get_mpz_t(), s(t, t).get_mpz_t());
        col_op(j, t, -q);
        if (s(t, j) != 0) clean = false;
      }
      if (!clean) {
        // Move the smallest leftover remainder in row/column t to the pivot.
        std::size_t bi = t, bj = t;
        for (std::size_t i = t + 1; i < rows; ++i) {
          if (s(i, t) != 0 && cmpabs(s(i, t), s(bi, bj)) < 0) { bi = i; bj = t; }
        }
        for (std::size_t j = t + 1; j < cols; ++j) {
          if (s(t, j) != 0 && cmpabs(s(t, j), s(bi, bj)) < 0) { bi = t; bj = j; }
        }
        row_swap(t, bi);
        s.swap_cols(t, bj);
        v.swap_cols(t, bj);
        continue;
      }
      // Row and column are clear; enforce the divisibility chain.
      std::optional<std::size_t> offender;
      for (std::size_t i = t + 1; i < rows && !offender; ++i) {
        for (std::size_t j = t + 1; j < cols; ++j) {
          if (!mpz_divisible_p(s(i, j).get_mpz_t(), s(t, t).get_mpz_t())) {
            offender = i;
            break;
          }
        }
      }
      if (!offender) break;
      row_op(t, *offender, 1);
    }
    if (s(t, t) < 0) {
      s.negate_row(t);
      u.negate_row(t);
      u_inv.negate_col(t);
    }
    ++t;
  }

  if (!(u * m * v == s)) {
    throw std::logic_error("smith_normal_form: U*M*V != S");
  }
  for (std::size_t i = 0; i + 1 < t; ++i) {
    if (!mpz_divisible_p(s(i + 1, i + 1).get_mpz_t(), s(i, i).get_mpz_t())) {
      throw std::logic_error("smith_normal_form: divisibility chain broken");
    }
  }
  return SnfDecomposition{std::move(u), std::move(u_inv), std::move(s),
                          std::move(v), t};
}

std::vector<IntVector> lattice_basis(std::span<const IntVector> generators,
                                     std::size_t dim) {
  std::vector<IntVector> rows;
  rows.reserve(generators.size());
  for (const auto& g : generators) {
    if (g.size() != dim) throw std::invalid_argument("lattice_basis: dimension");
    if (std::any_of(g.begin(), g.end(), [](const Integer& x) { return x != 0; })) {
      rows.push_back(g);
    }
  }
  std::size_t r = 0;
  Integer q;
  for (std::size_t c = 0; c < dim && r < rows.size(); ++c) {
    // Euclid on column c among rows r.. until one nonzero remains.
    for (;;) {
      std::optional<std::size_t> best;
      for (std::size_t i = r; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        if (!best || cmpabs(rows[i][c], rows[*best][c]) < 0) best = i;
      }
      if (!best) break;
      std::swap(rows[r], rows[*best]);
      bool others = false;
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        mpz_tdiv_q(q.get_mpz_t(), rows[i][c].get_mpz_t(), rows[r][c].get_mpz_t());
        for (std::size_t k = c; k < dim; ++k) {
          mpz_submul(rows[i][k].get_mpz_t(), q.get_mpz_t(), rows[r][k].get_mpz_t());
        }
        if (rows[i][c] != 0) others = true;
      }
      if (!others) break;
    }
    if (rows[r][c] == 0) continue;
    if (rows[r][c] < 0) {
      for (auto& x : rows[r]) x = -x;
    }
    // Keep entries above the pivot in [0, pivot).
    for (std::size_t i = 0; i < r; ++i) {
      mpz_fdiv_q(q.get_mpz_t(), rows[i][c].get_mpz_t(), rows[r][c].get_mpz_t());
      if (q == 0) continue;
      for (std::size_t k = c; k < dim; ++k) {
        mpz_submul(rows[i][k].get_mpz_t(), q.get_mpz_t(), rows[r][k].get_mpz_t());
      }
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

Integer subgroup_order(std::span<const Integer> orders,
                       std::span<const IntVector> generators) {
  const std::size_t k = orders.size();
  std::vector<IntVector> gens(generators.begin(), generators.end());
  for (std::size_t i = 0; i < k; ++i) {
    IntVector e(k);
    e[i] = orders[i];
    gens.push_back(std::move(e));
  }
  auto basis = lattice_basis(gens, k);
  // The relation lattice is full rank; its index is the product of pivots.
  Integer index = 1;
  std::size_t c = 0;
  for (const auto& row : basis) {
    while (row[c] == 0) ++c;
    index *= row[c];
  }
  Integer total = 1;
  for (const auto& d : orders) total *= d;
  Integer out;
  mpz_divexact(out.get_mpz_t(), total.get_mpz_t(), index.get_mpz_t());
  return out;
}

ModularSolver::ModularSolver(const IntMatrix& a, std::span<const Integer> moduli)
    : rows_(a.rows()), cols_(a.cols()), moduli_(moduli.begin(), moduli.end()) {
  if (moduli_.size() != rows_) {
    throw std::invalid_argument("solve_mod: one modulus per row required");
  }
  for (const auto& n : moduli_) {
    if (n < 1) throw std::invalid_argument("solve_mod: moduli must be >= 1");
  }
  IntMatrix lifted(rows_, cols_ + rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) lifted(r, c) = a(r, c);
    lifted(r, cols_ + r) = moduli_[r];
  }
  snf_ = smith_normal_form(lifted);
  std::vector<IntVector> gens;
  for (std::size_t j = snf_.rank; j < cols_ + rows_; ++j) {
    IntVector x(cols_);
    for (std::size_t c = 0; c < cols_; ++c) x[c] = snf_.V(c, j);
    gens.push_back(std::move(x));
  }
  kernel_ = lattice_basis(gens, cols_);
}

std::optional<IntVector> ModularSolver::particular(
    std::span<const Integer> b) const {
  if (b.size() != rows_) throw std::invalid_argument("solve_mod: rhs size");
  IntVector ub = snf_.U * b;
  IntVector z(cols_ + rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i < snf_.rank) {
      const Integer& d = snf_.S(i, i);
      if (!mpz_divisible_p(ub[i].get_mpz_t(), d.get_mpz_t())) return std::nullopt;
      mpz_divexact(z[i].get_mpz_t(), ub[i].get_mpz_t(), d.get_mpz_t());
    } else if (ub[i] != 0) {
      return std::nullopt;
    }
  }
  IntVector y = snf_.V * z;
  IntVector x(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(cols_));
  return x;
}

LinearSystemSolution ModularSolver::solve(std::span<const Integer> b) const {
  return LinearSystemSolution{particular(b), kernel_, moduli_};
}

LinearSystemSolution solve_mod(const IntMatrix& a, std::span<const Integer> b,
                               std::span<const Integer> moduli) {
  return ModularSolver(a, moduli).solve(b);
}

// ---- number theory -------------------------------------------------------

OddPart odd_part(const Integer& n) {
  if (n < 1) throw std::invalid_argument("odd_part: n must be positive");
  unsigned long e = mpz_scan1(n.get_mpz_t(), 0);
  Integer q;
  mpz_fdiv_q_2exp(q.get_mpz_t(), n.get_mpz_t(), e);
  return {q, e};
}

bool is_probable_prime(const Integer& n) {
  return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

namespace {

Integer pollard_brent(const Integer& n) {
  if (mpz_even_p(n.get_mpz_t())) return 2;
  for (unsigned long c = 1;; ++c) {
    Integer y = 2, x, g = 1, q = 1, ys, tmp;
    unsigned long r = 1;
    const unsigned long m = 128;
    auto f = [&](Integer& v) {
      v = v * v + c;
      mpz_mod(v.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
    };
    do {
      x = y;
      for (unsigned long i = 0; i < r; ++i) f(y);
      unsigned long k = 0;
      do {
        ys = y;
        for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
          f(y);
          tmp = x - y;
          if (tmp < 0) tmp = -tmp;
          q = q * tmp;
          mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        }
        mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        k += m;
      } while (k < r && g == 1);
      r *= 2;
    } while (g == 1);
    if (g == n) {
      do {
        f(ys);
        tmp = x - ys;
        if (tmp < 0) tmp = -tmp;
        mpz_gcd(g.get_mpz_t(), tmp.get_mpz_t(), n.get_mpz_t());
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void factor_into(const Integer& n, std::vector<Integer>& primes) {
  if (n == 1) return;
  if (is_probable_prime(n)) {
    primes.push_back(n);
    return;
  }
  Integer d = pollard_brent(n);
  factor_into(d, primes);
  factor_into(Integer(n / d), primes);
}

}  // namespace

Factorization factorize(const Integer& input) {
  if (input < 1) throw std::invalid_argument("factorize: n must be positive");
  Integer n = input;
  std::vector<Integer> primes;
  for (unsigned long p = 2; p < 4096; p += (p == 2 ? 1 : 2)) {
    while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
      primes.emplace_back(p);
      mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
    }
    if (n == 1) break;
  }
  factor_into(n, primes);
  std::sort(primes.begin(), primes.end());
  Factorization out;
  for (const auto& p : primes) {
    if (!out.empty() && out.back().prime == p) {
      ++out.back().exponent;
    } else {
      out.push_back({p, 1});
    }
  }
  return out;
}

Integer multiply_out(const Factorization& f) {
  Integer n = 1;
  for (const auto& [p, e] : f) {
    Integer pe;
    mpz_pow_ui(pe.get_mpz_t(), p.get_mpz_t(), e);
    n *= pe;
  }
  return n;
}

Integer gcd(const Integer& a, const Integer& b) {
  Integer g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

Integer lcm(const Integer& a, const Integer& b) {
  Integer l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

Integer mod(const Integer& a, const Integer& m) {
  Integer r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

std::optional<Integer> inverse_mod(const Integer& a, const Integer& m) {
  Integer r;
  if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0) {
    if (m == 1) return Integer(0);
    return std::nullopt;
  }
  return r;
}

Integer power_mod(const Integer& base, const Integer& exp, const Integer& m) {
  Integer r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), m.get_mpz_t());
  return r;
}

Integer crt(std::span<const Integer> residues, std::span<const Integer> moduli) {
  if (residues.size() != moduli.size()) throw std::invalid_argument("crt: sizes");
  Integer x = 0, m = 1;
  for (std::size_t i = 0; i < residues.size(); ++i) {
    // x + m*t = r_i (mod m_i)
    auto inv = inverse_mod(m, moduli[i]);
    if (!inv) throw std::invalid_argument("crt: moduli not coprime");
    Integer t = mod((residues[i] - x) * *inv, moduli[i]);
    x += m * t;
    m *= moduli[i];
  }
  return x;
}

Integer random_below(Rng& rng, const Integer& bound) {
  if (bound < 1) throw std::invalid_argument("random_below: bound must be >= 1");
  if (bound == 1) return 0;
  Integer top = bound - 1;
  const std::size_t bits = mpz_sizeinbase(top.get_mpz_t(), 2);
  const std::size_t words = (bits + 63) / 64;
  std::vector<std::uint64_t> buf(words);
  Integer r;
  for (;;) {
    for (auto& w : buf) w = rng();
    if (bits % 64 != 0) buf.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
    mpz_import(r.get_mpz_t(), words, -1, sizeof(std::uint64_t), 0, 0, buf.data());
    if (r < bound) return r;
  }
}

std::uint64_t to_u64(const Integer& v) {
  if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) > 64) {
    throw std::overflow_error("to_u64: value out of range");
  }
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, v.get_mpz_t());
  return out;
}

Integer pow2(unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

}  // namespace lhn::algebra
