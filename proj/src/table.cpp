#include "lhn/table.hpp"

#include "lhn/errors.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace lhn {

AbelianGroupSpec::AbelianGroupSpec(IntVector d) : orders(std::move(d)) {
  for (const auto& x : orders) {
    if (x < 1) throw ConstructionError("abelian spec: factor orders must be >= 1");
  }
}

Integer AbelianGroupSpec::order() const {
  Integer n = 1;
  for (const auto& d : orders) n *= d;
  return n;
}

Integer AbelianGroupSpec::exponent() const {
  Integer e = 1;
  for (const auto& d : orders) e = algebra::lcm(e, d);
  return e;
}

bool AbelianGroupSpec::is_2group() const {
  for (const auto& d : orders) {
    if (algebra::odd_part(d).odd != 1) return false;
  }
  return true;
}

std::string AbelianGroupSpec::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (i) s += ",";
    s += orders[i].get_str();
  }
  return s + ")";
}

namespace groups {

namespace {

std::vector<char> membership(std::size_t n, const ElementSet& s) {
  std::vector<char> in(n, 0);
  for (Index x : s) in[x] = 1;
  return in;
}

}  // namespace

void FiniteGroupTable::finish() {
  inv_.assign(n_, 0);
  for (Index a = 0; a < n_; ++a) {
    for (Index b = 0; b < n_; ++b) {
      if (mul(a, b) == identity_) {
        inv_[a] = static_cast<std::uint16_t>(b);
        break;
      }
    }
  }
}

FiniteGroupTable FiniteGroupTable::from_table(
    const std::vector<std::vector<Index>>& rows, std::vector<std::string> labels) {
  const std::size_t n = rows.size();
  if (n == 0 || n > kMaxOrder) {
    throw SchemaError("group table: order must be in [1, 4096]");
  }
  if (!labels.empty() && labels.size() != n) {
    throw SchemaError("group table: label count does not match order");
  }
  FiniteGroupTable t;
  t.n_ = n;
  t.mul_.resize(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    if (rows[a].size() != n) throw SchemaError("group table: row length");
    std::vector<char> seen(n, 0);
    for (std::size_t b = 0; b < n; ++b) {
      Index v = rows[a][b];
      if (v >= n) throw SchemaError("group table: entry out of range");
      if (seen[v]) throw SchemaError("group table: row is not a permutation");
      seen[v] = 1;
      t.mul_[a * n + b] = static_cast<std::uint16_t>(v);
    }
  }
  std::optional<Index> e;
  for (Index a = 0; a < n && !e; ++a) {
    bool ok = true;
    for (Index b = 0; b < n && ok; ++b) ok = t.mul(a, b) == b && t.mul(b, a) == b;
    if (ok) e = a;
  }
  if (!e) throw SchemaError("group table: no identity element");
  t.identity_ = *e;
  for (Index a = 0; a < n; ++a) {
    // Latin rows give a right inverse; it must also be a left inverse.
    bool found = false;
    for (Index b = 0; b < n && !found; ++b) {
      found = t.mul(a, b) == *e && t.mul(b, a) == *e;
    }
    if (!found) throw SchemaError("group table: missing two-sided inverse");
  }
  auto assoc = [&](Index a, Index b, Index c) {
    return t.mul(t.mul(a, b), c) == t.mul(a, t.mul(b, c));
  };
  if (n <= 512) {
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        for (Index c = 0; c < n; ++c)
          if (!assoc(a, b, c)) throw SchemaError("group table: not associative");
  } else {
    std::mt19937_64 rng(n);
    std::uniform_int_distribution<Index> pick(0, static_cast<Index>(n - 1));
    for (int i = 0; i < 100000; ++i) {
      if (!assoc(pick(rng), pick(rng), pick(rng))) {
        throw SchemaError("group table: not associative");
      }
    }
  }
  t.labels_ = std::move(labels);
  t.finish();
  return t;
}

FiniteGroupTable FiniteGroupTable::from_permutations(
    const std::vector<std::vector<Index>>& generators) {
  std::size_t degree = generators.empty() ? 1 : generators[0].size();
  for (const auto& g : generators) {
    if (g.size() != degree) throw SchemaError("permutations: mixed degrees");
    std::vector<char> seen(degree, 0);
    for (Index x : g) {
      if (x >= degree || seen[x]) throw SchemaError("permutations: not a permutation");
      seen[x] = 1;
    }
  }
  using Perm = std::vector<Index>;
  Perm id(degree);
  std::iota(id.begin(), id.end(), 0);
  std::map<Perm, Index> index{{id, 0}};
  std::vector<Perm> elems{id};
  auto compose = [&](const Perm& p, const Perm& q) {
    Perm r(degree);
    for (std::size_t x = 0; x < degree; ++x) r[x] = p[q[x]];
    return r;
  };
  for (std::size_t i = 0; i < elems.size(); ++i) {
    for (const auto& g : generators) {
      Perm next = compose(elems[i], g);
      if (index.emplace(next, static_cast<Index>(elems.size())).second) {
        elems.push_back(std::move(next));
        if (elems.size() > kMaxOrder) {
          throw ConstructionError("permutations generate more than 4096 elements");
        }
      }
    }
  }
  FiniteGroupTable t;
  t.n_ = elems.size();
  t.mul_.resize(t.n_ * t.n_);
  for (std::size_t a = 0; a < t.n_; ++a) {
    for (std::size_t b = 0; b < t.n_; ++b) {
      t.mul_[a * t.n_ + b] = static_cast<std::uint16_t>(index.at(compose(elems[a], elems[b])));
    }
  }
  t.identity_ = 0;
  t.perm_gens_ = generators;
  t.finish();
  return t;
}

FiniteGroupTable FiniteGroupTable::direct_product(const FiniteGroupTable& a,
                                                  const FiniteGroupTable& b) {
  const std::size_t n = a.order() * b.order();
  if (n > kMaxOrder) throw ConstructionError("direct product exceeds 4096 elements");
  // (x, y) -> x * |B| + y
  FiniteGroupTable t;
  t.n_ = n;
  t.mul_.resize(n * n);
  const std::size_t nb = b.order();
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      Index x = a.mul(static_cast<Index>(u / nb), static_cast<Index>(v / nb));
      Index y = b.mul(static_cast<Index>(u % nb), static_cast<Index>(v % nb));
      t.mul_[u * n + v] = static_cast<std::uint16_t>(x * nb + y);
    }
  }
  t.identity_ = static_cast<Index>(a.identity() * nb + b.identity());
  if (!a.labels().empty() || !b.labels().empty()) {
    for (std::size_t u = 0; u < n; ++u) {
      t.labels_.push_back("(" + a.label(static_cast<Index>(u / nb)) + "," +
                          b.label(static_cast<Index>(u % nb)) + ")");
    }
  }
  t.finish();
  return t;
}

FiniteGroupTable FiniteGroupTable::from_abelian(const AbelianGroupSpec& spec) {
  if (spec.order() > kMaxOrder) throw ConstructionError("abelian table exceeds 4096 elements");
  const std::size_t n = algebra::to_u64(spec.order());
  std::vector<std::size_t> d;
  for (const auto& x : spec.orders) d.push_back(algebra::to_u64(x));
  FiniteGroupTable t;
  t.n_ = n;
  t.mul_.resize(n * n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t a = u, b = v, out = 0, scale = 1;
      for (std::size_t di : d) {
        out += ((a % di + b % di) % di) * scale;
        a /= di;
        b /= di;
        scale *= di;
      }
      t.mul_[u * n + v] = static_cast<std::uint16_t>(out);
    }
  }
  t.identity_ = 0;
  t.finish();
  return t;
}

Index FiniteGroupTable::pow(Index a, long long k) const {
  if (k < 0) {
    a = inv(a);
    k = -k;
  }
  Index r = identity_;
  while (k) {
    if (k & 1) r = mul(r, a);
    a = mul(a, a);
    k >>= 1;
  }
  return r;
}

std::size_t FiniteGroupTable::element_order(Index a) const {
  std::size_t k = 1;
  for (Index x = a; x != identity_; x = mul(x, a)) ++k;
  return k;
}

bool FiniteGroupTable::is_abelian() const {
  for (Index a = 0; a < n_; ++a)
    for (Index b = a + 1; b < n_; ++b)
      if (mul(a, b) != mul(b, a)) return false;
  return true;
}

ElementSet FiniteGroupTable::center() const {
  ElementSet z;
  for (Index a = 0; a < n_; ++a) {
    bool central = true;
    for (Index b = 0; b < n_ && central; ++b) central = mul(a, b) == mul(b, a);
    if (central) z.push_back(a);
  }
  return z;
}

std::string FiniteGroupTable::label(Index a) const {
  return labels_.empty() ? std::to_string(a) : labels_[a];
}

std::vector<std::vector<Index>> FiniteGroupTable::rows() const {
  std::vector<std::vector<Index>> r(n_, std::vector<Index>(n_));
  for (Index a = 0; a < n_; ++a)
    for (Index b = 0; b < n_; ++b) r[a][b] = mul(a, b);
  return r;
}

FiniteGroupTable symmetric_group(unsigned degree) {
  if (degree < 2) return FiniteGroupTable::from_permutations({});
  std::vector<Index> swap(degree), cycle(degree);
  std::iota(swap.begin(), swap.end(), 0);
  std::swap(swap[0], swap[1]);
  for (unsigned i = 0; i < degree; ++i) cycle[i] = (i + 1) % degree;
  return FiniteGroupTable::from_permutations({swap, cycle});
}

FiniteGroupTable dihedral_group(unsigned n) {
  std::vector<Index> rot(n), refl(n);
  for (unsigned i = 0; i < n; ++i) {
    rot[i] = (i + 1) % n;
    refl[i] = (n - i) % n;
  }
  return FiniteGroupTable::from_permutations({rot, refl});
}

FiniteGroupTable quaternion_group() {
  // Units +-1, +-i, +-j, +-k; index = 2 * unit + sign.
  static const int unit_mul[4][4][2] = {
      // {unit, negated}
      {{0, 0}, {1, 0}, {2, 0}, {3, 0}},
      {{1, 0}, {0, 1}, {3, 0}, {2, 1}},
      {{2, 0}, {3, 1}, {0, 1}, {1, 0}},
      {{3, 0}, {2, 0}, {1, 1}, {0, 1}},
  };
  static const char* names[4] = {"1", "i", "j", "k"};
  std::vector<std::vector<Index>> rows(8, std::vector<Index>(8));
  std::vector<std::string> labels(8);
  for (int a = 0; a < 8; ++a) {
    labels[a] = std::string(a % 2 ? "-" : "") + names[a / 2];
    for (int b = 0; b < 8; ++b) {
      const int* r = unit_mul[a / 2][b / 2];
      int sign = (a % 2) ^ (b % 2) ^ r[1];
      rows[a][b] = static_cast<Index>(2 * r[0] + sign);
    }
  }
  return FiniteGroupTable::from_table(rows, labels);
}

FiniteGroupTable affine_group(unsigned p) {
  if (!algebra::is_probable_prime(p)) throw ConstructionError("affine group: p must be prime");
  unsigned g = 2;
  for (;; ++g) {
    unsigned ord = 1;
    for (unsigned x = g % p; x != 1; x = x * g % p) ++ord;
    if (ord == p - 1) break;
  }
  std::vector<Index> shift(p), scale(p);
  for (unsigned x = 0; x < p; ++x) {
    shift[x] = (x + 1) % p;
    scale[x] = x * g % p;
  }
  return FiniteGroupTable::from_permutations({shift, scale});
}

ElementSet subgroup_closure(const FiniteGroupTable& g,
                            const std::vector<Index>& generators) {
  std::vector<char> in(g.order(), 0);
  ElementSet out{g.identity()};
  in[g.identity()] = 1;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (Index s : generators) {
      Index x = g.mul(out[i], s);
      if (!in[x]) {
        in[x] = 1;
        out.push_back(x);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Subgroup generated by the candidates. Only candidates not already inside
// are added as generators, so the list stays logarithmic in the order.
ElementSet closure_of(const FiniteGroupTable& g, const std::vector<Index>& candidates) {
  std::vector<Index> gens;
  ElementSet current{g.identity()};
  std::vector<char> in(g.order(), 0);
  in[g.identity()] = 1;
  for (Index c : candidates) {
    if (in[c]) continue;
    gens.push_back(c);
    current = subgroup_closure(g, gens);
    std::fill(in.begin(), in.end(), 0);
    for (Index x : current) in[x] = 1;
  }
  return current;
}

}  // namespace

ElementSet normal_closure(const FiniteGroupTable& g,
                          const std::vector<Index>& generators) {
  std::vector<Index> conj;
  for (Index s : generators) {
    for (Index x = 0; x < g.order(); ++x) conj.push_back(g.mul(g.mul(x, s), g.inv(x)));
  }
  return closure_of(g, conj);
}

ElementSet commutator_subgroup(const FiniteGroupTable& g, const ElementSet& s) {
  std::vector<char> seen(g.order(), 0);
  std::vector<Index> comms;
  for (Index a : s) {
    for (Index b : s) {
      Index c = g.commutator(a, b);
      if (!seen[c]) {
        seen[c] = 1;
        comms.push_back(c);
      }
    }
  }
  return closure_of(g, comms);
}

bool is_normal_in(const FiniteGroupTable& g, const ElementSet& sub,
                  const ElementSet& ambient) {
  auto in = membership(g.order(), sub);
  for (Index x : ambient)
    for (Index s : sub)
      if (!in[g.mul(g.mul(x, s), g.inv(x))]) return false;
  return true;
}

DerivedSeries derived_series(const FiniteGroupTable& g) {
  DerivedSeries out;
  ElementSet all(g.order());
  std::iota(all.begin(), all.end(), 0);
  out.terms.push_back(all);
  for (;;) {
    const ElementSet& last = out.terms.back();
    if (last.size() == 1) {
      out.solvable = true;
      break;
    }
    ElementSet next = commutator_subgroup(g, last);
    if (next.size() == last.size()) break;
    if (!is_normal_in(g, next, last)) {
      throw std::logic_error("derived series: commutator subgroup not normal");
    }
    out.terms.push_back(std::move(next));
  }
  return out;
}

IntVector QuotientDecomposition::coordinates(Index x) const {
  if (x >= coords.size() || coords[x].size() != orders.size()) {
    throw std::invalid_argument("quotient coordinates: element outside the subgroup");
  }
  IntVector v(orders.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = coords[x][i];
  return v;
}

QuotientDecomposition decompose_quotient(const FiniteGroupTable& g,
                                         const ElementSet& a,
                                         const ElementSet& b) {
  const std::size_t n = g.order();
  auto in_b = membership(n, b);
  constexpr std::uint32_t none = ~0u;
  std::vector<std::uint32_t> coset(n, none);
  std::vector<Index> reps;
  for (Index x : a) {
    if (coset[x] != none) continue;
    auto id = static_cast<std::uint32_t>(reps.size());
    reps.push_back(x);
    for (Index y : b) coset[g.mul(x, y)] = id;
  }
  const std::size_t k = reps.size();
  auto qmul = [&](std::uint32_t c, std::uint32_t d) {
    return coset[g.mul(reps[c], reps[d])];
  };
  for (Index x : a) {
    for (Index y : a) {
      if (!in_b[g.commutator(x, y)]) {
        throw std::invalid_argument("decompose_quotient: quotient is not abelian");
      }
    }
  }
  const std::uint32_t one = coset[g.identity()];

  // Greedy generating set of the quotient, then a BFS spanning tree whose
  // non-tree edges are the relations.
  std::vector<std::uint32_t> gens;
  std::vector<char> spanned(k, 0);
  spanned[one] = 1;
  auto respan = [&] {
    std::vector<std::uint32_t> q{one};
    std::fill(spanned.begin(), spanned.end(), 0);
    spanned[one] = 1;
    for (std::size_t i = 0; i < q.size(); ++i)
      for (auto s : gens) {
        auto c = qmul(q[i], s);
        if (!spanned[c]) {
          spanned[c] = 1;
          q.push_back(c);
        }
      }
  };
  for (std::uint32_t c = 0; c < k; ++c) {
    if (spanned[c]) continue;
    gens.push_back(c);
    respan();
  }
  const std::size_t t = gens.size();
  std::vector<std::vector<long>> first(k);
  first[one].assign(t, 0);
  std::vector<std::uint32_t> q{one};
  std::vector<IntVector> relations;
  std::vector<IntVector> basis;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t s = 0; s < t; ++s) {
      auto c = qmul(q[i], gens[s]);
      std::vector<long> v = first[q[i]];
      v[s] += 1;
      if (first[c].empty()) {
        first[c] = std::move(v);
        q.push_back(c);
        continue;
      }
      IntVector rel(t);
      bool nonzero = false;
      for (std::size_t j = 0; j < t; ++j) {
        rel[j] = v[j] - first[c][j];
        nonzero |= rel[j] != 0;
      }
      if (!nonzero) continue;
      relations.push_back(std::move(rel));
      if (relations.size() >= 64) {
        relations.insert(relations.end(), basis.begin(), basis.end());
        basis = algebra::lattice_basis(relations, t);
        relations.clear();
      }
    }
  }
  relations.insert(relations.end(), basis.begin(), basis.end());
  basis = algebra::lattice_basis(relations, t);
  if (basis.size() != t) throw std::logic_error("decompose_quotient: relation lattice not full rank");

  algebra::IntMatrix r = algebra::IntMatrix::from_columns(t, basis);
  auto snf = algebra::smith_normal_form(r);
  QuotientDecomposition out;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < t; ++i) {
    if (snf.S(i, i) > 1) keep.push_back(i);
  }
  std::vector<long> gen_order(t);
  for (std::size_t s = 0; s < t; ++s) {
    gen_order[s] = static_cast<long>(g.element_order(reps[gens[s]]));
  }
  for (std::size_t i : keep) {
    out.orders.push_back(snf.S(i, i));
    Index f = g.identity();
    for (std::size_t s = 0; s < t; ++s) {
      Integer e = snf.U_inverse(s, i);
      long ex = algebra::mod(e, gen_order[s]).get_si();
      f = g.mul(f, g.pow(reps[gens[s]], ex));
    }
    out.generators.push_back(f);
  }
  std::vector<std::vector<std::uint32_t>> by_coset(k);
  for (std::uint32_t c = 0; c < k; ++c) {
    IntVector w(first[c].begin(), first[c].end());
    IntVector uw = snf.U * w;
    for (std::size_t j = 0; j < keep.size(); ++j) {
      by_coset[c].push_back(static_cast<std::uint32_t>(
          algebra::mod(uw[keep[j]], out.orders[j]).get_ui()));
    }
  }
  out.coords.assign(n, {});
  for (Index x : a) out.coords[x] = by_coset[coset[x]];

  // Each generator must have coordinate vector e_j.
  for (std::size_t j = 0; j < out.generators.size(); ++j) {
    const auto& c = out.coords[out.generators[j]];
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] != (i == j ? 1u : 0u)) throw std::logic_error("decompose_quotient: basis check");
    }
  }
  return out;
}

Abelianization abelianize(const FiniteGroupTable& g) {
  ElementSet all(g.order());
  std::iota(all.begin(), all.end(), 0);
  ElementSet derived = commutator_subgroup(g, all);
  Abelianization out;
  out.quotient = decompose_quotient(g, all, derived);
  out.spec = AbelianGroupSpec(out.quotient.orders);

  const auto& d = out.quotient.orders;
  std::vector<unsigned long> dd;
  for (const auto& x : d) dd.push_back(x.get_ui());
  auto check = [&](Index a, Index b) {
    const auto& ca = out.quotient.coords[a];
    const auto& cb = out.quotient.coords[b];
    const auto& cab = out.quotient.coords[g.mul(a, b)];
    for (std::size_t i = 0; i < dd.size(); ++i) {
      if ((ca[i] + cb[i]) % dd[i] != cab[i]) {
        throw std::logic_error("abelianize: projection is not a homomorphism");
      }
    }
  };
  const auto n = static_cast<Index>(g.order());
  if (n <= 512) {
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) check(a, b);
  } else {
    std::mt19937_64 rng(n);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    for (int i = 0; i < 100000; ++i) check(pick(rng), pick(rng));
  }
  return out;
}

}  // namespace groups
}  // namespace lhn
