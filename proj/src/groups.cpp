#include "lhn/groups.hpp"

#include "lhn/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>

namespace lhn::groups {

using algebra::Factorization;
using algebra::IntMatrix;

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_integer(const Integer& v) {
  const mpz_srcptr p = v.get_mpz_t();
  std::uint64_t h = static_cast<std::uint64_t>(p->_mp_size);
  const int n = std::abs(p->_mp_size);
  for (int i = 0; i < n; ++i) h = mix(h ^ static_cast<std::uint64_t>(p->_mp_d[i]));
  return h;
}

void merge_into(Factorization& acc, const Factorization& f) {
  for (const auto& pp : f) {
    auto it = std::find_if(acc.begin(), acc.end(),
                           [&](const algebra::PrimePower& q) { return q.prime == pp.prime; });
    if (it == acc.end()) {
      acc.push_back(pp);
    } else {
      it->exponent = std::max(it->exponent, pp.exponent);
    }
  }
  std::sort(acc.begin(), acc.end(),
            [](const auto& a, const auto& b) { return a.prime < b.prime; });
}

Factorization factor_exponent(const AbelianGroupSpec& spec) {
  Factorization f;
  for (const auto& d : spec.orders) merge_into(f, algebra::factorize(d));
  return f;
}

// Order of x given that x^lambda = 1 and the factorization of lambda.
template <class PowFn, class IsOneFn>
Integer order_from_exponent(const Integer& lambda, const Factorization& f,
                            PowFn pow_fn, IsOneFn is_one) {
  Integer order = lambda;
  for (const auto& pp : f) {
    for (unsigned long j = 0; j < pp.exponent; ++j) {
      Integer trial = order / pp.prime;
      if (!is_one(pow_fn(trial))) break;
      order = trial;
    }
  }
  return order;
}

}  // namespace

std::size_t hash_element(const GroupElement& x) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, IntVector>) {
          std::uint64_t h = v.size();
          for (const auto& e : v) h = mix(h ^ hash_integer(e));
          return h;
        } else if constexpr (std::is_same_v<T, Integer>) {
          return hash_integer(v);
        } else if constexpr (std::is_same_v<T, Index>) {
          return mix(v);
        } else {
          return mix(v.bits);
        }
      },
      x);
}

const char* realization_name(Realization r) {
  switch (r) {
    case Realization::transparent: return "transparent";
    case Realization::packed: return "packed";
    case Realization::units_mod_n: return "units_mod_n";
    case Realization::table: return "table";
  }
  return "?";
}

namespace detail {

class BackendImpl {
 public:
  virtual ~BackendImpl() = default;
  virtual Realization realization() const = 0;
  virtual bool abelian() const { return true; }
  virtual const AbelianGroupSpec& spec() const = 0;
  virtual Integer order() const { return spec().order(); }
  virtual std::string description() const = 0;
  virtual GroupElement identity() const = 0;
  virtual GroupElement mul(const GroupElement& a, const GroupElement& b) const = 0;
  virtual GroupElement inv(const GroupElement& a) const = 0;
  virtual GroupElement pow(const GroupElement& a, const Integer& k) const {
    Integer e = abs(k);
    GroupElement base = k < 0 ? inv(a) : a;
    GroupElement r = identity();
    const std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (std::size_t i = bits; i-- > 0;) {
      r = mul(r, r);
      if (mpz_tstbit(e.get_mpz_t(), i)) r = mul(r, base);
    }
    return r;
  }
  virtual GroupElement generator(std::size_t i) const = 0;
  virtual GroupElement from_exponents(std::span<const Integer> alpha) const {
    if (alpha.size() != spec().rank()) throw std::invalid_argument("from_exponents: length");
    GroupElement r = identity();
    for (std::size_t i = 0; i < alpha.size(); ++i) r = mul(r, pow(generator(i), alpha[i]));
    return r;
  }
  virtual IntVector trapdoor_log(const GroupElement& x) const = 0;
  virtual Integer element_order(const GroupElement& x) const {
    return order_from_exponent(
        exponent_, exponent_factors_, [&](const Integer& e) { return pow(x, e); },
        [&](const GroupElement& y) { return y == identity(); });
  }
  virtual GroupElement sample_uniform(Rng& rng) const {
    IntVector alpha;
    for (const auto& d : spec().orders) alpha.push_back(algebra::random_below(rng, d));
    return from_exponents(alpha);
  }
  virtual void check_element(const GroupElement& x) const = 0;

 protected:
  void init_exponent() {
    exponent_ = spec().exponent();
    exponent_factors_ = factor_exponent(spec());
  }
  Integer exponent_ = 1;
  Factorization exponent_factors_;
};

}  // namespace detail

namespace {

// ---- transparent --------------------------------------------------------

class Transparent final : public detail::BackendImpl {
 public:
  explicit Transparent(AbelianGroupSpec spec) : spec_(std::move(spec)) { init_exponent(); }

  Realization realization() const override { return Realization::transparent; }
  const AbelianGroupSpec& spec() const override { return spec_; }
  std::string description() const override { return "transparent " + spec_.to_string(); }

  GroupElement identity() const override { return IntVector(spec_.rank()); }
  GroupElement mul(const GroupElement& a, const GroupElement& b) const override {
    const auto& x = std::get<IntVector>(a);
    const auto& y = std::get<IntVector>(b);
    IntVector r(x.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      r[i] = x[i] + y[i];
      if (r[i] >= spec_.orders[i]) r[i] -= spec_.orders[i];
    }
    return r;
  }
  GroupElement inv(const GroupElement& a) const override {
    const auto& x = std::get<IntVector>(a);
    IntVector r(x.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = x[i] == 0 ? Integer(0) : spec_.orders[i] - x[i];
    return r;
  }
  GroupElement pow(const GroupElement& a, const Integer& k) const override {
    const auto& x = std::get<IntVector>(a);
    IntVector r(x.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = algebra::mod(x[i] * k, spec_.orders[i]);
    return r;
  }
  GroupElement generator(std::size_t i) const override {
    IntVector r(spec_.rank());
    r.at(i) = spec_.orders[i] > 1 ? 1 : 0;
    return r;
  }
  GroupElement from_exponents(std::span<const Integer> alpha) const override {
    if (alpha.size() != spec_.rank()) throw std::invalid_argument("from_exponents: length");
    IntVector r(alpha.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = algebra::mod(alpha[i], spec_.orders[i]);
    return r;
  }
  IntVector trapdoor_log(const GroupElement& x) const override {
    return std::get<IntVector>(x);
  }
  Integer element_order(const GroupElement& x) const override {
    const auto& v = std::get<IntVector>(x);
    Integer o = 1;
    for (std::size_t i = 0; i < v.size(); ++i) {
      o = algebra::lcm(o, spec_.orders[i] / algebra::gcd(spec_.orders[i], v[i]));
    }
    return o;
  }
  void check_element(const GroupElement& x) const override {
    const auto* v = std::get_if<IntVector>(&x);
    if (!v || v->size() != spec_.rank()) throw SchemaError("element: expected exponent vector of length " + std::to_string(spec_.rank()));
    for (std::size_t i = 0; i < v->size(); ++i) {
      if ((*v)[i] < 0 || (*v)[i] >= spec_.orders[i]) throw SchemaError("element: exponent out of range");
    }
  }

 private:
  AbelianGroupSpec spec_;
};

// ---- packed 2-group -----------------------------------------------------

class Packed final : public detail::BackendImpl {
 public:
  explicit Packed(AbelianGroupSpec spec) : spec_(std::move(spec)) {
    unsigned shift = 0;
    for (const auto& d : spec_.orders) {
      auto op = algebra::odd_part(d);
      if (op.odd != 1) throw ConstructionError("packed backend: factor " + d.get_str() + " is not a power of 2");
      const unsigned k = static_cast<unsigned>(op.exponent);
      if (shift + k > 64) throw ConstructionError("packed backend: exponents exceed 64 bits");
      widths_.push_back(k);
      shifts_.push_back(shift);
      if (k > 0) {
        top_ |= std::uint64_t{1} << (shift + k - 1);
        ones_ |= std::uint64_t{1} << shift;
        const std::uint64_t field = k == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << k) - 1);
        all_ |= field << shift;
      }
      shift += k;
    }
    init_exponent();
  }

  Realization realization() const override { return Realization::packed; }
  const AbelianGroupSpec& spec() const override { return spec_; }
  std::string description() const override { return "packed " + spec_.to_string(); }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    return ((a & ~top_) + (b & ~top_)) ^ ((a ^ b) & top_);
  }
  GroupElement identity() const override { return PackedWord{0}; }
  GroupElement mul(const GroupElement& a, const GroupElement& b) const override {
    return PackedWord{add(std::get<PackedWord>(a).bits, std::get<PackedWord>(b).bits)};
  }
  GroupElement inv(const GroupElement& a) const override {
    return PackedWord{add(~std::get<PackedWord>(a).bits & all_, ones_)};
  }
  GroupElement pow(const GroupElement& a, const Integer& k) const override {
    const std::uint64_t x = std::get<PackedWord>(a).bits;
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < widths_.size(); ++i) {
      const unsigned w = widths_[i];
      if (w == 0) continue;
      const std::uint64_t mask = w == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << w) - 1);
      Integer km = algebra::mod(k, algebra::pow2(w));
      const std::uint64_t kk = algebra::to_u64(km);
      const std::uint64_t f = (x >> shifts_[i]) & mask;
      r |= ((f * kk) & mask) << shifts_[i];
    }
    return PackedWord{r};
  }
  GroupElement generator(std::size_t i) const override {
    return PackedWord{widths_.at(i) ? std::uint64_t{1} << shifts_[i] : 0};
  }
  GroupElement from_exponents(std::span<const Integer> alpha) const override {
    if (alpha.size() != widths_.size()) throw std::invalid_argument("from_exponents: length");
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < widths_.size(); ++i) {
      if (!widths_[i]) continue;
      r |= algebra::to_u64(algebra::mod(alpha[i], spec_.orders[i])) << shifts_[i];
    }
    return PackedWord{r};
  }
  IntVector trapdoor_log(const GroupElement& x) const override {
    const std::uint64_t v = std::get<PackedWord>(x).bits;
    IntVector out(widths_.size());
    for (std::size_t i = 0; i < widths_.size(); ++i) {
      const unsigned w = widths_[i];
      if (!w) continue;
      const std::uint64_t mask = w == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << w) - 1);
      mpz_set_ui(out[i].get_mpz_t(), (v >> shifts_[i]) & mask);
    }
    return out;
  }
  GroupElement sample_uniform(Rng& rng) const override { return PackedWord{rng() & all_}; }
  void check_element(const GroupElement& x) const override {
    const auto* v = std::get_if<PackedWord>(&x);
    if (!v || (v->bits & ~all_)) throw SchemaError("element: not a packed word of this group");
  }

 private:
  AbelianGroupSpec spec_;
  std::vector<unsigned> widths_, shifts_;
  std::uint64_t top_ = 0, ones_ = 0, all_ = 0;
};

// ---- units modulo N -----------------------------------------------------

// Discrete log of y to base g in the cyclic group <g> of order n modulo m.
class CyclicLog {
 public:
  CyclicLog(Integer g, Integer n, Factorization nf, Integer m)
      : g_(std::move(g)), n_(std::move(n)), nf_(std::move(nf)), m_(std::move(m)) {
    for (const auto& pp : nf_) {
      if (pp.prime > Integer(1) << 44) {
        throw Refusal("trapdoor log: order has a prime factor above 2^44");
      }
    }
  }

  Integer operator()(const Integer& y) const {
    IntVector residues, moduli;
    for (const auto& pp : nf_) {
      Integer r = pp.prime;
      Integer re;
      mpz_pow_ui(re.get_mpz_t(), r.get_mpz_t(), pp.exponent);
      Integer cof = n_ / re;
      Integer gr = algebra::power_mod(g_, cof, m_);
      Integer yr = algebra::power_mod(y, cof, m_);
      Integer rlast;
      mpz_pow_ui(rlast.get_mpz_t(), r.get_mpz_t(), pp.exponent - 1);
      Integer gamma = algebra::power_mod(gr, rlast, m_);
      Integer gr_inv = *algebra::inverse_mod(gr, m_);
      Integer x = 0, rk = 1;
      for (unsigned long k = 0; k < pp.exponent; ++k) {
        Integer shifted = yr * algebra::power_mod(gr_inv, x, m_) % m_;
        Integer e;
        mpz_pow_ui(e.get_mpz_t(), r.get_mpz_t(), pp.exponent - 1 - k);
        Integer h = algebra::power_mod(shifted, e, m_);
        x += digit(h, gamma, r) * rk;
        rk *= r;
      }
      residues.push_back(x);
      moduli.push_back(re);
    }
    return moduli.empty() ? Integer(0) : algebra::crt(residues, moduli);
  }

 private:
  // log of h to base gamma, gamma of prime order r.
  Integer digit(const Integer& h, const Integer& gamma, const Integer& r) const {
    if (h == 1) return 0;
    if (r <= 64) {
      Integer acc = gamma;
      for (unsigned long d = 1; d < r.get_ui(); ++d) {
        if (acc == h) return d;
        acc = acc * gamma % m_;
      }
      throw AssumptionFailure("trapdoor", "element outside the cyclic component");
    }
    Integer s;
    mpz_sqrt(s.get_mpz_t(), r.get_mpz_t());
    s += 1;
    const unsigned long steps = s.get_ui();
    std::unordered_map<std::uint64_t, std::vector<unsigned long>> baby;
    Integer acc = 1;
    std::vector<Integer> powers;
    powers.reserve(steps);
    for (unsigned long j = 0; j < steps; ++j) {
      baby[hash_integer(acc)].push_back(j);
      powers.push_back(acc);
      acc = acc * gamma % m_;
    }
    Integer giant = *algebra::inverse_mod(acc, m_);
    Integer cur = h;
    for (unsigned long i = 0; i <= steps; ++i) {
      auto it = baby.find(hash_integer(cur));
      if (it != baby.end()) {
        for (auto j : it->second) {
          if (powers[j] == cur) return algebra::mod(Integer(i) * s + j, r);
        }
      }
      cur = cur * giant % m_;
    }
    throw AssumptionFailure("trapdoor", "element outside the cyclic component");
  }

  Integer g_, n_;
  Factorization nf_;
  Integer m_;
};

Integer primitive_root(const Integer& p, const Factorization& pm1) {
  if (p == 2) return 1;
  for (Integer g = 2;; ++g) {
    bool ok = true;
    for (const auto& pp : pm1) {
      if (algebra::power_mod(g, (p - 1) / pp.prime, p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
}

struct ComponentLog {
  UnitComponent c;
  std::optional<CyclicLog> log;
  Factorization order_factors;
};

// Coordinates of a unit y with respect to the cyclic components.
IntVector component_coordinates(const std::vector<ComponentLog>& logs, const Integer& y) {
  IntVector out(logs.size());
  for (std::size_t c = 0; c < logs.size(); ++c) {
    const auto& comp = logs[c].c;
    Integer local = y % comp.prime_power;
    if (comp.prime == 2) {
      // (Z/2^k)^x = <-1> x <5>; residues 3 mod 4 carry the sign.
      const bool negative = mpz_tstbit(local.get_mpz_t(), 1);
      if (comp.sign_part) {
        out[c] = negative ? 1 : 0;
        continue;
      }
      if (negative) local = comp.prime_power - local;
    }
    out[c] = (*logs[c].log)(local);
  }
  return out;
}

class UnitsBackend final : public detail::BackendImpl {
 public:
  UnitsBackend(UnitsModN data, AbelianGroupSpec spec, std::vector<ComponentLog> logs)
      : data_(std::move(data)), spec_(std::move(spec)), logs_(std::move(logs)) {
    init_exponent();
    IntMatrix a(logs_.size(), spec_.rank());
    IntVector moduli;
    for (std::size_t c = 0; c < logs_.size(); ++c) {
      moduli.push_back(logs_[c].c.order);
      for (std::size_t i = 0; i < spec_.rank(); ++i) a(c, i) = data_.coordinates[i][c];
    }
    solver_.emplace(a, moduli);
  }

  Realization realization() const override { return Realization::units_mod_n; }
  const AbelianGroupSpec& spec() const override { return spec_; }
  std::string description() const override {
    return "units mod " + data_.modulus.get_str() + " realizing " + spec_.to_string();
  }
  const UnitsModN& data() const { return data_; }

  GroupElement identity() const override { return Integer(1); }
  GroupElement mul(const GroupElement& a, const GroupElement& b) const override {
    Integer r;
    mpz_mul(r.get_mpz_t(), std::get<Integer>(a).get_mpz_t(), std::get<Integer>(b).get_mpz_t());
    mpz_mod(r.get_mpz_t(), r.get_mpz_t(), data_.modulus.get_mpz_t());
    return r;
  }
  GroupElement inv(const GroupElement& a) const override {
    Integer r;
    if (!mpz_invert(r.get_mpz_t(), std::get<Integer>(a).get_mpz_t(), data_.modulus.get_mpz_t())) {
      throw std::invalid_argument("units: element not invertible");
    }
    return r;
  }
  GroupElement pow(const GroupElement& a, const Integer& k) const override {
    Integer base = std::get<Integer>(a);
    if (k < 0) base = std::get<Integer>(inv(a));
    Integer r;
    Integer e = abs(k);
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), data_.modulus.get_mpz_t());
    return r;
  }
  GroupElement generator(std::size_t i) const override { return data_.residues.at(i); }

  IntVector trapdoor_log(const GroupElement& x) const override {
    IntVector coords = component_coordinates(logs_, std::get<Integer>(x));
    auto alpha = solver_->particular(coords);
    if (!alpha) throw AssumptionFailure("trapdoor", "element outside the realized subgroup");
    for (std::size_t i = 0; i < alpha->size(); ++i) (*alpha)[i] = algebra::mod((*alpha)[i], spec_.orders[i]);
    return *alpha;
  }

  void check_element(const GroupElement& x) const override {
    const auto* v = std::get_if<Integer>(&x);
    if (!v) throw SchemaError("element: expected a residue");
    if (*v < 0 || *v >= data_.modulus || algebra::gcd(*v, data_.modulus) != 1) {
      throw SchemaError("element: residue not a unit modulo N");
    }
    if (pow(x, exponent_) != identity()) {
      throw SchemaError("element: residue outside the realized subgroup");
    }
  }

 private:
  UnitsModN data_;
  AbelianGroupSpec spec_;
  std::vector<ComponentLog> logs_;
  std::optional<algebra::ModularSolver> solver_;
};

std::vector<ComponentLog> component_logs(const Integer& n, const Factorization& f) {
  std::vector<ComponentLog> out;
  for (const auto& pp : f) {
    Integer pk;
    mpz_pow_ui(pk.get_mpz_t(), pp.prime.get_mpz_t(), pp.exponent);
    Integer rest = n / pk;
    auto lift = [&](const Integer& local) {
      IntVector r{local, 1}, md{pk, rest};
      return rest == 1 ? algebra::mod(local, pk) : algebra::crt(r, md);
    };
    if (pp.prime == 2) {
      if (pp.exponent >= 2) {
        ComponentLog s;
        s.c = UnitComponent{2, pp.exponent, pk, 2, pk - 1, lift(pk - 1), true};
        s.order_factors = {{2, 1}};
        out.push_back(std::move(s));
      }
      if (pp.exponent >= 3) {
        ComponentLog five;
        Integer ord = algebra::pow2(pp.exponent - 2);
        five.c = UnitComponent{2, pp.exponent, pk, ord, 5, lift(5), false};
        five.order_factors = {{2, pp.exponent - 2}};
        five.log.emplace(Integer(5), ord, five.order_factors, pk);
        out.push_back(std::move(five));
      }
      continue;
    }
    Factorization pm1 = algebra::factorize(pp.prime - 1);
    Integer g = primitive_root(pp.prime, pm1);
    if (pp.exponent >= 2 && algebra::power_mod(g, pp.prime - 1, pp.prime * pp.prime) == 1) {
      g += pp.prime;
    }
    Integer ord = pk / pp.prime * (pp.prime - 1);
    Factorization of = pm1;
    if (pp.exponent >= 2) merge_into(of, {{pp.prime, pp.exponent - 1}});
    ComponentLog c;
    c.c = UnitComponent{pp.prime, pp.exponent, pk, ord, g, lift(g), false};
    c.order_factors = of;
    c.log.emplace(g, ord, of, pk);
    out.push_back(std::move(c));
  }
  return out;
}

void verify_factorization(const Integer& n, const Factorization& f) {
  if (n < 3) throw ConstructionError("units mod N: N must be at least 3");
  Integer prod = 1;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!algebra::is_probable_prime(f[i].prime)) {
      throw ConstructionError("units mod N: " + f[i].prime.get_str() + " is not prime");
    }
    if (f[i].exponent == 0) throw ConstructionError("units mod N: zero exponent in factorization");
    for (std::size_t j = 0; j < i; ++j) {
      if (f[j].prime == f[i].prime) throw ConstructionError("units mod N: repeated prime in factorization");
    }
    Integer pk;
    mpz_pow_ui(pk.get_mpz_t(), f[i].prime.get_mpz_t(), f[i].exponent);
    prod *= pk;
  }
  if (prod != n) throw ConstructionError("units mod N: factorization does not multiply to N");
}

Factorization sorted(Factorization f) {
  std::sort(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.prime < b.prime; });
  return f;
}

GroupBackend finish_units(const Integer& n, const Factorization& f, const AbelianGroupSpec& spec,
                          std::vector<ComponentLog> logs, std::vector<IntVector> coords) {
  UnitsModN data;
  data.modulus = n;
  data.factorization = f;
  for (const auto& l : logs) data.components.push_back(l.c);
  // Exact orders and independence, both read from component coordinates.
  IntVector comp_orders;
  for (const auto& l : logs) comp_orders.push_back(l.c.order);
  for (std::size_t i = 0; i < spec.rank(); ++i) {
    Integer o = 1;
    for (std::size_t c = 0; c < logs.size(); ++c) {
      o = algebra::lcm(o, comp_orders[c] / algebra::gcd(comp_orders[c], coords[i][c]));
    }
    if (o != spec.orders[i]) {
      throw ConstructionError("units mod N: generator " + std::to_string(i + 1) + " has order " +
                              o.get_str() + ", expected " + spec.orders[i].get_str());
    }
  }
  if (algebra::subgroup_order(comp_orders, coords) != spec.order()) {
    throw ConstructionError("units mod N: generators are not independent");
  }
  for (std::size_t i = 0; i < spec.rank(); ++i) {
    Integer r = 1;
    for (std::size_t c = 0; c < logs.size(); ++c) {
      r = r * algebra::power_mod(logs[c].c.global_generator, coords[i][c], n) % n;
    }
    data.residues.push_back(r);
  }
  data.coordinates = std::move(coords);
  return GroupBackend(std::make_shared<UnitsBackend>(std::move(data), spec, std::move(logs)));
}

// ---- table --------------------------------------------------------------

class TableBackend final : public detail::BackendImpl {
 public:
  explicit TableBackend(std::shared_ptr<const FiniteGroupTable> t)
      : t_(std::move(t)), ab_(abelianize(*t_)), abelian_(t_->is_abelian()) {
    init_exponent();
  }

  Realization realization() const override { return Realization::table; }
  bool abelian() const override { return abelian_; }
  const AbelianGroupSpec& spec() const override { return ab_.spec; }
  Integer order() const override { return static_cast<unsigned long>(t_->order()); }
  std::string description() const override {
    return "table group of order " + std::to_string(t_->order());
  }
  const FiniteGroupTable& table() const { return *t_; }
  const std::shared_ptr<const FiniteGroupTable>& table_ptr() const { return t_; }
  const Abelianization& ab() const { return ab_; }

  GroupElement identity() const override { return t_->identity(); }
  GroupElement mul(const GroupElement& a, const GroupElement& b) const override {
    return t_->mul(std::get<Index>(a), std::get<Index>(b));
  }
  GroupElement inv(const GroupElement& a) const override { return t_->inv(std::get<Index>(a)); }
  GroupElement pow(const GroupElement& a, const Integer& k) const override {
    const auto o = static_cast<long>(t_->element_order(std::get<Index>(a)));
    return t_->pow(std::get<Index>(a), algebra::mod(k, o).get_si());
  }
  GroupElement generator(std::size_t i) const override { return ab_.quotient.generators.at(i); }
  IntVector trapdoor_log(const GroupElement& x) const override { return ab_.project(std::get<Index>(x)); }
  Integer element_order(const GroupElement& x) const override {
    return static_cast<unsigned long>(t_->element_order(std::get<Index>(x)));
  }
  GroupElement sample_uniform(Rng& rng) const override {
    return static_cast<Index>(algebra::to_u64(algebra::random_below(rng, static_cast<unsigned long>(t_->order()))));
  }
  void check_element(const GroupElement& x) const override {
    const auto* v = std::get_if<Index>(&x);
    if (!v || *v >= t_->order()) throw SchemaError("element: table index out of range");
  }

 private:
  std::shared_ptr<const FiniteGroupTable> t_;
  Abelianization ab_;
  bool abelian_;
};

}  // namespace

// ---- handle -------------------------------------------------------------

Realization GroupBackend::realization() const { return impl_->realization(); }
bool GroupBackend::abelian() const { return impl_->abelian(); }
const AbelianGroupSpec& GroupBackend::spec() const { return impl_->spec(); }
Integer GroupBackend::order() const { return impl_->order(); }
std::string GroupBackend::description() const { return impl_->description(); }
GroupElement GroupBackend::identity() const { return impl_->identity(); }
GroupElement GroupBackend::mul(const GroupElement& a, const GroupElement& b) const {
  return impl_->mul(a, b);
}
GroupElement GroupBackend::inv(const GroupElement& a) const { return impl_->inv(a); }
GroupElement GroupBackend::pow(const GroupElement& a, const Integer& k) const {
  return impl_->pow(a, k);
}
bool GroupBackend::is_identity(const GroupElement& a) const { return a == impl_->identity(); }
GroupElement GroupBackend::generator(std::size_t i) const { return impl_->generator(i); }
GroupElement GroupBackend::from_exponents(std::span<const Integer> alpha) const {
  return impl_->from_exponents(alpha);
}
IntVector GroupBackend::trapdoor_log(const GroupElement& x) const { return impl_->trapdoor_log(x); }
Integer GroupBackend::element_order(const GroupElement& x) const { return impl_->element_order(x); }
GroupElement GroupBackend::sample_uniform(Rng& rng) const { return impl_->sample_uniform(rng); }
void GroupBackend::check_element(const GroupElement& x) const { impl_->check_element(x); }

const UnitsModN* GroupBackend::units() const {
  auto* u = dynamic_cast<const UnitsBackend*>(impl_.get());
  return u ? &u->data() : nullptr;
}
const FiniteGroupTable* GroupBackend::table() const {
  auto* t = dynamic_cast<const TableBackend*>(impl_.get());
  return t ? &t->table() : nullptr;
}
std::shared_ptr<const FiniteGroupTable> GroupBackend::table_ptr() const {
  auto* t = dynamic_cast<const TableBackend*>(impl_.get());
  return t ? t->table_ptr() : nullptr;
}
const Abelianization* GroupBackend::abelianization() const {
  auto* t = dynamic_cast<const TableBackend*>(impl_.get());
  return t ? &t->ab() : nullptr;
}

GroupBackend make_transparent(const AbelianGroupSpec& spec) {
  return GroupBackend(std::make_shared<Transparent>(spec));
}

GroupBackend make_packed_2group(const AbelianGroupSpec& spec) {
  return GroupBackend(std::make_shared<Packed>(spec));
}

GroupBackend make_table_backend(std::shared_ptr<const FiniteGroupTable> table) {
  if (!table) throw std::invalid_argument("make_table_backend: null table");
  return GroupBackend(std::make_shared<TableBackend>(std::move(table)));
}

std::vector<UnitComponent> unit_group_components(const Integer& n, const Factorization& f) {
  verify_factorization(n, f);
  std::vector<UnitComponent> out;
  for (auto& l : component_logs(n, sorted(f))) out.push_back(l.c);
  return out;
}

GroupBackend make_units_mod_n(const Integer& n, const Factorization& f_in,
                              const AbelianGroupSpec& spec) {
  verify_factorization(n, f_in);
  const Factorization f = sorted(f_in);
  auto logs = component_logs(n, f);
  std::vector<IntVector> coords(spec.rank(), IntVector(logs.size()));

  std::map<Integer, std::vector<std::pair<unsigned long, std::size_t>>> need;  // prime -> (valuation, i)
  for (std::size_t i = 0; i < spec.rank(); ++i) {
    for (const auto& pp : algebra::factorize(spec.orders[i])) need[pp.prime].push_back({pp.exponent, i});
  }
  for (auto& [ell, list] : need) {
    std::vector<std::pair<unsigned long, std::size_t>> have;  // (valuation, component)
    for (std::size_t c = 0; c < logs.size(); ++c) {
      unsigned long v = mpz_remove(Integer().get_mpz_t(), logs[c].c.order.get_mpz_t(), ell.get_mpz_t());
      if (v > 0) have.push_back({v, c});
    }
    std::stable_sort(list.begin(), list.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::stable_sort(have.begin(), have.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; r < list.size(); ++r) {
      const auto [a, i] = list[r];
      if (r >= have.size() || have[r].first < a) {
        Integer ella;
        mpz_pow_ui(ella.get_mpz_t(), ell.get_mpz_t(), a);
        throw ConstructionError("units mod " + n.get_str() + ": factor " + spec.orders[i].get_str() +
                                " cannot be embedded; (Z/N)^x has no independent element of order " +
                                ella.get_str() + " for it");
      }
      const std::size_t c = have[r].second;
      Integer ella;
      mpz_pow_ui(ella.get_mpz_t(), ell.get_mpz_t(), a);
      coords[i][c] = algebra::mod(coords[i][c] + logs[c].c.order / ella, logs[c].c.order);
    }
  }
  return finish_units(n, f, spec, std::move(logs), std::move(coords));
}

GroupBackend make_units_mod_n(const Integer& n, const Factorization& f_in,
                              const AbelianGroupSpec& spec, const IntVector& residues) {
  verify_factorization(n, f_in);
  if (residues.size() != spec.rank()) {
    throw ConstructionError("units mod N: one residue per factor of the spec required");
  }
  const Factorization f = sorted(f_in);
  auto logs = component_logs(n, f);
  std::vector<IntVector> coords;
  for (const auto& r : residues) {
    Integer u = algebra::mod(r, n);
    if (algebra::gcd(u, n) != 1) throw ConstructionError("units mod N: " + r.get_str() + " is not a unit");
    IntVector c = component_coordinates(logs, u);
    coords.push_back(std::move(c));
  }
  return finish_units(n, f, spec, std::move(logs), std::move(coords));
}

GroupElement sylow2_project(const GroupBackend& g, const GroupElement& x, const Integer& q) {
  if (mpz_even_p(q.get_mpz_t())) throw std::invalid_argument("sylow2_project: q must be odd");
  return g.pow(x, q);
}

std::optional<unsigned long> order_by_squaring(const GroupBackend& g, const GroupElement& x,
                                               unsigned long max_log) {
  GroupElement y = x;
  for (unsigned long k = 0; k <= max_log; ++k) {
    if (g.is_identity(y)) return k;
    y = g.mul(y, y);
  }
  return std::nullopt;
}

void OpCounter::charge(std::uint64_t n) {
  ops_ += n;
  if (budget_ && ops_ > *budget_) {
    throw BudgetExceeded(ops_, *budget_, "group-operation budget exhausted");
  }
}

void OpCounter::reserve(std::uint64_t predicted, const std::string& what) const {
  if (budget_ && (ops_ > *budget_ || predicted > *budget_ - ops_)) {
    const auto needed = predicted > std::numeric_limits<std::uint64_t>::max() - ops_
                            ? std::numeric_limits<std::uint64_t>::max()
                            : ops_ + predicted;
    throw BudgetExceeded(needed, *budget_, what);
  }
}

std::uint64_t pow_cost(const Integer& k) {
  if (k == 0) return 0;
  const std::uint64_t bits = mpz_sizeinbase(k.get_mpz_t(), 2);
  const std::uint64_t ones = mpz_popcount(Integer(abs(k)).get_mpz_t());
  return (bits - 1) + (ones - 1);
}

GroupElement CountedGroup::pow(const GroupElement& a, const Integer& k) const {
  c_.charge(pow_cost(k) + (k < 0 ? 1 : 0));
  return g_.pow(a, k);
}

}  // namespace lhn::groups
