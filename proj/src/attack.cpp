#include <lhn/attack.hpp>
#include <lhn/errors.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <limits>
#include <memory>

namespace lhn::attack {

using algebra::IntMatrix;
using algebra::mod;
using algebra::odd_part;
using algebra::pow2;

namespace {

Integer two_part(const Integer& n) { return pow2(odd_part(n).exponent); }

std::string index_text(std::size_t i) { return "generator " + std::to_string(i + 1); }

// Runs one pipeline stage and appends it to the report, also when it throws.
template <class F>
auto run_stage(AttackReport* report, const std::string& name, OpCounter& counter, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t ops0 = counter.ops();
  Stage st{name, 0, 0, "ok"};
  auto close = [&] {
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    st.ops = counter.ops() - ops0;
    if (report) report->stages.push_back(st);
  };
  try {
    auto out = body(st.verdict);
    close();
    return out;
  } catch (const BudgetExceeded& e) {
    st.verdict = std::string("budget exceeded: ") + e.what();
    close();
    throw;
  } catch (const Error& e) {
    st.verdict = std::string("failed: ") + e.what();
    close();
    throw;
  }
}

// Repeated membership queries against one subgroup of a 2-group.
class SpanTest {
 public:
  SpanTest(const EdlpSolver& h2, std::vector<GroupElement> y, OpCounter& counter)
      : h2_(h2), y_(std::move(y)) {
    const auto& orders = h2.decomposition().orders;
    std::vector<IntVector> logs;
    for (const auto& e : y_) logs.push_back(h2.solve(e, counter).exponents);
    solver_.emplace(IntMatrix::from_columns(orders.size(), logs), orders);
    exponent_ = 1;
    for (const auto& d : orders) exponent_ = algebra::lcm(exponent_, d);
  }

  MembershipVerdict test(const GroupElement& x, OpCounter& counter) const {
    const std::uint64_t ops0 = counter.ops();
    MembershipVerdict v;
    auto lx = h2_.solve(x, counter).exponents;
    auto z = solver_->particular(lx);
    if (z) {
      CountedGroup cg(h2_.backend(), counter);
      GroupElement acc = cg.identity();
      for (std::size_t k = 0; k < y_.size(); ++k) {
        (*z)[k] = mod((*z)[k], exponent_);
        acc = cg.mul(acc, cg.pow(y_[k], (*z)[k]));
      }
      if (acc != x) throw Error("membership witness does not reproduce the element");
      v.member = true;
      v.witness = std::move(*z);
    }
    v.work = counter.ops() - ops0;
    return v;
  }

 private:
  const EdlpSolver& h2_;
  std::vector<GroupElement> y_;
  std::optional<algebra::ModularSolver> solver_;
  Integer exponent_;
};

// Final step on a reduced instance once s_i = r_i (mod |<g_i>|) is known:
// x = h prod l_i^(-s_i) lies in M = <l_i^|<g_i>|> exactly when beta = 0.
int decide_bit(const AttackInstance& red, const IntVector& s, OpCounter& counter,
               AttackReport* report) {
  CountedGroup cg(red.H, counter);
  auto parts = run_stage(report, "noise subgroup", counter, [&](std::string& verdict) {
    std::vector<GroupElement> m;
    GroupElement x = red.ct.h;
    for (std::size_t i = 0; i < red.g.size(); ++i) {
      auto y = cg.pow(red.ell[i], red.orders[i]);
      if (!red.H.is_identity(y)) m.push_back(std::move(y));
      if (s[i] != 0) x = cg.mul(x, cg.pow(red.ell[i], -s[i]));
    }
    verdict = std::to_string(m.size()) + " nontrivial generators";
    return std::make_pair(std::move(m), std::move(x));
  });
  return run_stage(report, "membership H_2", counter, [&](std::string& verdict) {
    EdlpSolver h2(red.H, red.h_decomposition, EdlpOptions{false, 30});
    SpanTest span(h2, parts.first, counter);
    if (span.test(red.tau, counter).member) {
      throw AssumptionFailure("noise", "tau lies in the noise subgroup, the bit is undetermined");
    }
    if (span.test(parts.second, counter).member) {
      verdict = "x in M";
      return 0;
    }
    if (span.test(cg.mul(parts.second, red.tau), counter).member) {
      verdict = "x tau in M";
      return 1;
    }
    throw AssumptionFailure("ciphertext", "h is not of the form m tau^beta with m in M");
  });
}

}  // namespace

// ---- eDLP ---------------------------------------------------------------

EdlpSolver::EdlpSolver(GroupBackend g, Decomposition d, EdlpOptions options)
    : g_(std::move(g)), d_(std::move(d)), options_(options) {
  if (d_.generators.size() != d_.orders.size()) {
    throw std::invalid_argument("EdlpSolver: one order per generator");
  }
  for (std::size_t i = 0; i < d_.orders.size(); ++i) {
    const auto op = odd_part(d_.orders[i]);
    if (op.odd != 1) {
      throw AssumptionFailure("2-group", "order " + d_.orders[i].get_str() + " of " +
                                             index_text(i) + " is not a power of two");
    }
    k_.push_back(static_cast<unsigned>(op.exponent));
    depth_ = std::max(depth_, k_.back());
  }
  for (std::size_t i = 0; i < k_.size(); ++i) {
    if (k_[i] > 0) by_depth_.push_back(i);
  }
  std::stable_sort(by_depth_.begin(), by_depth_.end(),
                   [&](std::size_t a, std::size_t b) { return k_[a] > k_[b]; });
}

void EdlpSolver::prepare(const CountedGroup& cg) const {
  if (prepared_) return;
  socle_.assign(d_.size(), g_.identity());
  steps_.assign(d_.size(), {});
  bool ok = true;
  for (std::size_t i = 0; i < d_.size(); ++i) {
    const auto& b = d_.generators[i];
    if (k_[i] == 0) {
      ok &= g_.is_identity(b);
      continue;
    }
    auto step = cg.inv(b);
    steps_[i].push_back(step);
    auto c = b;
    for (unsigned s = 1; s < k_[i]; ++s) {
      step = cg.mul(step, step);
      steps_[i].push_back(step);
      c = cg.mul(c, c);
    }
    ok &= !g_.is_identity(c) && g_.is_identity(cg.mul(c, c));
    socle_[i] = std::move(c);
  }
  prepared_ = true;
  if (!ok) independent_ = false;
}

GroupElement EdlpSolver::subset_sum(const std::vector<std::size_t>& idx, std::uint64_t mask,
                                    const CountedGroup& cg) const {
  GroupElement acc = g_.identity();
  for (std::size_t b = 0; b < idx.size(); ++b) {
    if (mask >> b & 1) acc = cg.mul(acc, socle_[idx[b]]);
  }
  return acc;
}

const EdlpSolver::Table& EdlpSolver::table(std::size_t active, const CountedGroup& cg) const {
  if (auto it = tables_.find(active); it != tables_.end()) return it->second;
  const std::size_t h1 = (active + 1) / 2;
  const std::size_t h2 = active - h1;
  // The budget is checked before the memory cap, so an over-budget run reports
  // the budget rather than the table size.
  const std::uint64_t predicted = h1 >= 63 ? std::numeric_limits<std::uint64_t>::max()
                                           : (std::uint64_t{1} << h1) + (std::uint64_t{1} << h2);
  cg.counter().reserve(predicted, "meet-in-the-middle level over " + std::to_string(active) + " generators");
  if (h1 > options_.max_table_bits) {
    throw Refusal("meet-in-the-middle table would hold 2^" + std::to_string(h1) + " entries");
  }
  Table t;
  t.first.assign(by_depth_.begin(), by_depth_.begin() + static_cast<std::ptrdiff_t>(h1));
  t.second.assign(by_depth_.begin() + static_cast<std::ptrdiff_t>(h1),
                  by_depth_.begin() + static_cast<std::ptrdiff_t>(active));
  const std::uint64_t n = std::uint64_t{1} << h1;
  t.entries.reserve(n);
  GroupElement cur = g_.identity();
  std::uint64_t mask = 0;
  t.entries.emplace_back(groups::hash_element(cur), 0);
  for (std::uint64_t j = 1; j < n; ++j) {
    const int bit = std::countr_zero(j);
    cur = cg.mul(cur, socle_[t.first[bit]]);
    mask ^= std::uint64_t{1} << bit;
    t.entries.emplace_back(groups::hash_element(cur), mask);
  }
  std::sort(t.entries.begin(), t.entries.end());
  return tables_.emplace(active, std::move(t)).first->second;
}

std::optional<std::uint64_t> EdlpSolver::find(const Table& t, const GroupElement& w,
                                              const CountedGroup& cg, bool skip_zero) const {
  const std::size_t h1 = t.first.size();
  const std::uint64_t n = std::uint64_t{1} << t.second.size();
  GroupElement cur = w;
  std::uint64_t mask2 = 0;
  for (std::uint64_t j = 0; j < n; ++j) {
    if (j > 0) {
      const int bit = std::countr_zero(j);
      cur = cg.mul(cur, socle_[t.second[bit]]);
      mask2 ^= std::uint64_t{1} << bit;
    }
    const std::uint64_t h = groups::hash_element(cur);
    auto it = std::lower_bound(t.entries.begin(), t.entries.end(), std::make_pair(h, std::uint64_t{0}));
    for (; it != t.entries.end() && it->first == h; ++it) {
      if (skip_zero && it->second == 0 && mask2 == 0) continue;
      if (subset_sum(t.first, it->second, cg) == cur) return it->second | (mask2 << h1);
    }
  }
  return std::nullopt;
}

bool EdlpSolver::independent(OpCounter& counter) const {
  CountedGroup cg(g_, counter);
  prepare(cg);
  if (independent_) return *independent_;
  if (by_depth_.empty()) return *(independent_ = true);
  const Table& t = table(by_depth_.size(), cg);
  for (std::size_t a = 0; a + 1 < t.entries.size(); ++a) {
    for (std::size_t b = a + 1; b < t.entries.size() && t.entries[b].first == t.entries[a].first; ++b) {
      if (subset_sum(t.first, t.entries[a].second, cg) == subset_sum(t.first, t.entries[b].second, cg)) {
        return *(independent_ = false);
      }
    }
  }
  independent_ = !find(t, g_.identity(), cg, true).has_value();
  return *independent_;
}

EdlpResult EdlpSolver::solve(const GroupElement& x, OpCounter& counter) const {
  const std::uint64_t ops0 = counter.ops();
  CountedGroup cg(g_, counter);
  prepare(cg);
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (k_[i] == 0 ? !g_.is_identity(d_.generators[i])
                   : g_.is_identity(socle_[i]) || !g_.is_identity(cg.mul(socle_[i], socle_[i]))) {
      throw AssumptionFailure("A4", index_text(i) + " does not have order " + d_.orders[i].get_str());
    }
  }
  if (options_.validate_independence && !independent(counter)) {
    throw AssumptionFailure("A3", "the generators are not independent");
  }
  IntVector alpha(d_.size(), 0);
  GroupElement y = x;
  std::size_t active = 0;
  for (unsigned t = 0; t < depth_; ++t) {
    while (active < by_depth_.size() && k_[by_depth_[active]] >= depth_ - t) ++active;
    GroupElement z = y;
    for (unsigned u = 0; u + 1 + t < depth_; ++u) z = cg.mul(z, z);
    if (g_.is_identity(z)) continue;
    const Table& tab = table(active, cg);
    auto mask = find(tab, z, cg, false);
    if (!mask) throw AssumptionFailure("A3", "target is not in the span of the generators");
    const std::size_t h1 = tab.first.size();
    for (std::size_t b = 0; b < active; ++b) {
      if (!(*mask >> b & 1)) continue;
      const std::size_t i = b < h1 ? tab.first[b] : tab.second[b - h1];
      const unsigned s = t + k_[i] - depth_;
      alpha[i] += pow2(s);
      y = cg.mul(y, steps_[i][s]);
    }
  }
  if (!g_.is_identity(y)) throw AssumptionFailure("A3", "target is not in the span of the generators");
  GroupElement check = g_.identity();
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (alpha[i] != 0) check = cg.mul(check, cg.pow(d_.generators[i], alpha[i]));
  }
  if (check != x) throw Error("eDLP result failed verification");
  return {std::move(alpha), counter.ops() - ops0};
}

EdlpResult EdlpSolver::solve(const GroupElement& x) const {
  OpCounter c;
  return solve(x, c);
}

EdlpResult edlp_brute(const GroupBackend& g, const Decomposition& d, const GroupElement& x) {
  Integer box = 1;
  for (const auto& o : d.orders) box *= o;
  if (box > pow2(24)) throw Refusal("exponent box of size " + box.get_str() + " exceeds 2^24");
  OpCounter counter;
  CountedGroup cg(g, counter);
  const std::size_t m = d.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (!g.is_identity(g.pow(d.generators[i], d.orders[i]))) {
      throw AssumptionFailure("A4", index_text(i) + " does not have order dividing " + d.orders[i].get_str());
    }
  }
  std::vector<unsigned long> e(m, 0), lim(m);
  for (std::size_t i = 0; i < m; ++i) lim[i] = d.orders[i].get_ui();
  GroupElement cur = g.identity();
  const unsigned long total = box.get_ui();
  for (unsigned long step = 0; step < total; ++step) {
    if (cur == x) {
      IntVector out(m);
      for (std::size_t i = 0; i < m; ++i) out[i] = e[i];
      return {std::move(out), counter.ops()};
    }
    for (std::size_t j = 0; j < m; ++j) {
      cur = cg.mul(cur, d.generators[j]);
      if (++e[j] < lim[j]) break;
      e[j] = 0;
    }
  }
  throw AssumptionFailure("A3", "target is not in the span of the generators");
}

MembershipVerdict membership_solve(const EdlpSolver& h2, const std::vector<GroupElement>& y,
                                   const GroupElement& x, OpCounter& counter) {
  const std::uint64_t ops0 = counter.ops();
  SpanTest span(h2, y, counter);
  auto v = span.test(x, counter);
  v.work = counter.ops() - ops0;
  return v;
}

// ---- instances -----------------------------------------------------------

AttackInstance make_instance(const scheme::PublicKey& pk, const scheme::Ciphertext& ct) {
  AttackInstance inst;
  inst.G = pk.G;
  inst.H = pk.H;
  inst.g = pk.g;
  inst.ell = pk.ell;
  inst.orders = pk.orders;
  inst.tau = pk.tau;
  inst.ct = ct;
  inst.flags.a1 = pk.G.abelian() && pk.H.abelian();
  inst.flags.a2 = true;
  inst.flags.a4 = true;
  const auto& hs = pk.H.spec();
  for (std::size_t j = 0; j < hs.rank(); ++j) {
    inst.h_decomposition.generators.push_back(pk.H.generator(j));
    inst.h_decomposition.orders.push_back(hs.orders[j]);
  }
  return inst;
}

AttackInstance reduce_sylow2(const AttackInstance& inst, OpCounter& counter) {
  if (!inst.flags.a1) throw AssumptionFailure("A1", "G and H must be abelian; convert the instance first");
  if (!inst.flags.a2) throw AssumptionFailure("A2", "the group orders are not known");
  if (inst.reduced) return inst;
  AttackInstance out = inst;
  out.q = algebra::lcm(odd_part(inst.G.order()).odd, odd_part(inst.H.order()).odd);
  CountedGroup cg(inst.G, counter);
  CountedGroup ch(inst.H, counter);
  for (auto& x : out.g) x = cg.pow(x, out.q);
  for (auto& o : out.orders) o = two_part(o);
  out.ct.g = cg.pow(inst.ct.g, out.q);
  for (auto& x : out.ell) x = ch.pow(x, out.q);
  out.ct.h = ch.pow(inst.ct.h, out.q);
  for (auto& x : out.h_decomposition.generators) x = ch.pow(x, out.q);
  for (auto& o : out.h_decomposition.orders) o = two_part(o);
  if (ch.pow(inst.tau, out.q) != inst.tau) throw AssumptionFailure("tau", "tau does not have order 2");
  out.reduced = true;
  return out;
}

AttackInstance reduce_sylow2(const AttackInstance& inst) {
  OpCounter c;
  return reduce_sylow2(inst, c);
}

std::uint64_t AttackReport::total_ops() const {
  std::uint64_t t = 0;
  for (const auto& s : stages) t += s.ops;
  return t;
}

// ---- Sylow-2 pipeline ----------------------------------------------------

int recover_bit(const AttackInstance& inst, const AttackOptions& options, AttackReport* report) {
  OpCounter counter(options.budget);
  auto flags = inst.flags;
  if (report) report->strategy = "theorem1";
  auto sync = [&] {
    if (report) report->flags = flags;
  };
  sync();
  try {
    AttackInstance red = inst.reduced ? inst
                                      : run_stage(report, "sylow2", counter, [&](std::string& v) {
                                          auto r = reduce_sylow2(inst, counter);
                                          v = "q = " + r.q.get_str();
                                          return r;
                                        });
    auto s = run_stage(report, "edlp G_2", counter, [&](std::string& v) {
      EdlpSolver solver(red.G, {red.g, red.orders}, EdlpOptions{options.validate_independence, 30});
      auto res = solver.solve(red.ct.g, counter);
      if (options.validate_independence) flags.a3 = true;
      v = "solved over " + std::to_string(red.g.size()) + " generators";
      return res.exponents;
    });
    sync();
    int bit = decide_bit(red, s, counter, report);
    if (report) report->bit = bit;
    return bit;
  } catch (const AssumptionFailure& e) {
    if (e.label() == "A3") flags.a3 = false;
    sync();
    throw;
  }
}

// ---- kernel emulation ----------------------------------------------------

KernelRelations shor_stub_kernel(const GroupBackend& G, const Decomposition& d,
                                 const GroupElement& g, OpCounter& counter) {
  KernelRelations out;
  out.g_order = G.element_order(g);
  out.box = out.g_order;
  for (const auto& o : d.orders) out.box *= o;
  if (out.box > pow2(24)) {
    throw Refusal("relation box of size " + out.box.get_str() +
                  " is beyond classical emulation (quantum-only regime)");
  }
  CountedGroup cg(G, counter);
  const std::size_t m = d.size();
  std::vector<GroupElement> gens = d.generators;
  gens.push_back(g);
  IntVector lim = d.orders;
  lim.push_back(out.g_order);
  for (std::size_t i = 0; i < m; ++i) {
    if (!G.is_identity(cg.pow(gens[i], lim[i]))) {
      throw AssumptionFailure("A4", index_text(i) + " does not have order dividing " + lim[i].get_str());
    }
  }
  std::vector<IntVector> rel;
  for (std::size_t i = 0; i <= m; ++i) {
    IntVector v(m + 1, 0);
    v[i] = lim[i];
    rel.push_back(std::move(v));
  }
  std::vector<unsigned long> e(m + 1, 0), bound(m + 1);
  for (std::size_t i = 0; i <= m; ++i) bound[i] = lim[i].get_ui();
  GroupElement cur = G.identity();
  const unsigned long total = out.box.get_ui();
  for (unsigned long step = 0; step < total; ++step) {
    if (step > 0 && G.is_identity(cur)) {
      IntVector v(m + 1);
      for (std::size_t i = 0; i <= m; ++i) v[i] = e[i];
      rel.push_back(std::move(v));
    }
    for (std::size_t j = 0; j <= m; ++j) {
      cur = cg.mul(cur, gens[j]);
      if (++e[j] < bound[j]) break;
      e[j] = 0;
    }
  }
  out.generators = algebra::lattice_basis(rel, m + 1);
  for (const auto& v : out.generators) {
    GroupElement acc = G.identity();
    for (std::size_t i = 0; i <= m; ++i) acc = cg.mul(acc, cg.pow(gens[i], v[i]));
    if (!G.is_identity(acc)) throw Error("kernel relation failed verification");
  }
  return out;
}

int recover_bit_via_kernel(const AttackInstance& inst, const AttackOptions& options,
                           AttackReport* report) {
  if (!inst.flags.a1) throw AssumptionFailure("A1", "G and H must be abelian");
  OpCounter counter(options.budget);
  auto flags = inst.flags;
  if (report) {
    report->strategy = "kernel";
    report->flags = flags;
  }
  const std::size_t m = inst.g.size();
  auto rel = run_stage(report, "kernel (emulated)", counter, [&](std::string& v) {
    auto k = shor_stub_kernel(inst.G, {inst.g, inst.orders}, inst.ct.g, counter);
    v = std::to_string(k.generators.size()) + " relations over a box of " + k.box.get_str();
    return k;
  });
  auto r = run_stage(report, "relation", counter, [&](std::string& v) {
    // Put the g coordinate first; the echelon basis then starts with the
    // relation of smallest positive g exponent.
    std::vector<IntVector> moved;
    for (const auto& row : rel.generators) {
      IntVector w{row[m]};
      w.insert(w.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(m));
      moved.push_back(std::move(w));
    }
    auto basis = algebra::lattice_basis(moved, m + 1);
    Integer index = 1;
    std::size_t c = 0;
    for (const auto& row : basis) {
      while (row[c] == 0) ++c;
      index *= row[c];
    }
    Integer box = 1;
    for (const auto& o : inst.orders) box *= o;
    flags.a3 = index == box;
    if (report) report->flags = flags;
    if (basis.empty() || basis[0][0] != 1) {
      throw AssumptionFailure("A3", "g is not in the span of the public g_i");
    }
    if (!*flags.a3) throw AssumptionFailure("A3", "the public g_i are not independent");
    IntVector out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = mod(-basis[0][i + 1], inst.orders[i]);
    v = "relation with unit g exponent";
    return out;
  });
  AttackInstance red = inst.reduced ? inst : run_stage(report, "sylow2", counter, [&](std::string& v) {
    auto x = reduce_sylow2(inst, counter);
    v = "q = " + x.q.get_str();
    return x;
  });
  IntVector s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = mod(r[i], red.orders[i]);
  int bit = decide_bit(red, s, counter, report);
  if (report) report->bit = bit;
  return bit;
}

// ---- conversion ----------------------------------------------------------

Theta theta_identity(const GroupBackend& H) {
  return {H, [](const GroupElement& x, OpCounter&) { return x; }, "identity"};
}

Theta theta_matrix(const GroupBackend& H, const scheme::HomMatrix& m) {
  if (!(m.source == H.spec())) throw ConstructionError("theta: source spec differs from H");
  m.validate();
  auto target = groups::make_transparent(m.target);
  const std::string what = "matrix to " + m.target.to_string();
  if (H.realization() != groups::Realization::units_mod_n) {
    return {target,
            [H, m](const GroupElement& x, OpCounter& c) -> GroupElement {
              c.charge(1);
              return m.apply(H.trapdoor_log(x));
            },
            what};
  }
  if (!m.target.is_2group()) {
    throw Refusal("theta on an opaque group needs a 2-group target");
  }
  const Integer q = odd_part(H.order()).odd;
  Decomposition d;
  for (std::size_t j = 0; j < H.spec().rank(); ++j) {
    d.generators.push_back(H.pow(H.generator(j), q));
    d.orders.push_back(two_part(H.spec().orders[j]));
  }
  auto solver = std::make_shared<EdlpSolver>(H, std::move(d), EdlpOptions{false, 30});
  return {target,
          [H, m, q, solver](const GroupElement& x, OpCounter& c) -> GroupElement {
            CountedGroup cg(H, c);
            return m.apply(solver->solve(cg.pow(x, q), c).exponents);
          },
          what + " via 2-part logarithms"};
}

Theta theta_abelianize(const GroupBackend& H) {
  const auto* ab = H.abelianization();
  if (!ab) throw ConstructionError("theta_abelianize: H is not a table group");
  auto target = groups::make_transparent(ab->spec);
  return {target,
          [H](const GroupElement& x, OpCounter& c) -> GroupElement {
            c.charge(1);
            return H.trapdoor_log(x);
          },
          "abelianization " + ab->spec.to_string()};
}

AttackInstance convert_instance(const AttackInstance& inst, const Theta& theta, OpCounter& counter) {
  if (inst.reduced) throw std::invalid_argument("convert_instance: instance already reduced");
  AttackInstance out = inst;
  out.tau = theta.apply(inst.tau, counter);
  if (theta.target.is_identity(out.tau)) {
    throw AssumptionFailure("theta", "theta(tau) = 1, conversion rejected");
  }
  out.H = theta.target;
  for (auto& x : out.ell) x = theta.apply(x, counter);
  out.ct.h = theta.apply(inst.ct.h, counter);
  out.h_decomposition = {};
  for (std::size_t j = 0; j < out.H.spec().rank(); ++j) {
    out.h_decomposition.generators.push_back(out.H.generator(j));
    out.h_decomposition.orders.push_back(out.H.spec().orders[j]);
  }
  if (!inst.G.abelian()) {
    const auto* ab = inst.G.abelianization();
    auto gbar = groups::make_transparent(ab->spec);
    for (std::size_t i = 0; i < out.g.size(); ++i) {
      out.g[i] = inst.G.trapdoor_log(inst.g[i]);
      out.orders[i] = gbar.element_order(out.g[i]);
    }
    out.ct.g = inst.G.trapdoor_log(inst.ct.g);
    counter.charge(out.g.size() + 1);
    out.G = gbar;
  }
  out.flags.a1 = out.G.abelian() && out.H.abelian();
  out.flags.a3.reset();
  return out;
}

// ---- index-2 subgroups ---------------------------------------------------

namespace {

// Coordinates mod 2 of reduced H elements on the even factors, as bit masks.
struct ParityView {
  std::vector<std::size_t> even;  // factor index of each bit
  std::unique_ptr<EdlpSolver> solver;

  ParityView(const AttackInstance& red) {
    for (std::size_t j = 0; j < red.h_decomposition.size(); ++j) {
      if (red.h_decomposition.orders[j] > 1) even.push_back(j);
    }
    solver = std::make_unique<EdlpSolver>(red.H, red.h_decomposition, EdlpOptions{false, 30});
  }
  std::uint64_t bits(const GroupElement& x, OpCounter& c) const {
    auto e = solver->solve(x, c).exponents;
    std::uint64_t out = 0;
    for (std::size_t b = 0; b < even.size(); ++b) {
      if (mpz_odd_p(e[even[b]].get_mpz_t())) out |= std::uint64_t{1} << b;
    }
    return out;
  }
};

// h prod l_i^(-s_i) in parity coordinates, with s from any representation of g.
std::uint64_t noiseless_word(const AttackInstance& red, const ParityView& pv,
                             const std::vector<std::uint64_t>& ell_bits, const GroupElement& g,
                             const GroupElement& h, OpCounter& c) {
  EdlpSolver gs(red.G, {red.g, red.orders}, EdlpOptions{false, 30});
  auto s = gs.solve(g, c).exponents;
  std::uint64_t w = pv.bits(h, c);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (mpz_odd_p(s[i].get_mpz_t())) w ^= ell_bits[i];
  }
  return w;
}

scheme::HomMatrix parity_theta(const AttackInstance& inst, const ParityView& pv, std::uint64_t v) {
  IntVector two{Integer(2)};
  auto theta = scheme::HomMatrix::zero(inst.H.spec(), AbelianGroupSpec(two));
  for (std::size_t b = 0; b < pv.even.size(); ++b) {
    if (v >> b & 1) theta.a(0, pv.even[b]) = 1;
  }
  return theta;
}

}  // namespace

std::optional<scheme::HomMatrix> search_index2_theta(const AttackInstance& inst, Rng& rng,
                                                     unsigned checks, OpCounter& counter) {
  if (inst.reduced) throw std::invalid_argument("search_index2_theta: pass the unreduced instance");
  AttackInstance red = reduce_sylow2(inst, counter);
  ParityView pv(red);
  if (pv.even.size() > 16) {
    throw Refusal("H has 2^" + std::to_string(pv.even.size()) + " - 1 index-2 subgroups");
  }
  const std::uint64_t tau = pv.bits(red.tau, counter);
  std::vector<std::uint64_t> ell_bits;
  for (const auto& l : red.ell) ell_bits.push_back(pv.bits(l, counter));

  // Self-encrypted bits under the original public key.
  CountedGroup cg(inst.G, counter), ch(inst.H, counter);
  std::vector<std::pair<std::uint64_t, int>> samples;
  for (unsigned t = 0; t < checks; ++t) {
    const int beta = static_cast<int>(rng() & 1);
    GroupElement g = inst.G.identity(), h = beta ? inst.tau : inst.H.identity();
    for (std::size_t i = 0; i < inst.g.size(); ++i) {
      const Integer r = algebra::random_below(rng, inst.orders[i]);
      g = cg.mul(g, cg.pow(inst.g[i], r));
      h = ch.mul(h, ch.pow(inst.ell[i], r));
    }
    samples.emplace_back(
        noiseless_word(red, pv, ell_bits, cg.pow(g, red.q), ch.pow(h, red.q), counter), beta);
  }
  const std::uint64_t count = std::uint64_t{1} << pv.even.size();
  for (std::uint64_t v = 1; v < count; ++v) {
    if (std::popcount(v & tau) % 2 == 0) continue;
    bool ok = true;
    for (const auto& [w, beta] : samples) {
      if (std::popcount(v & w) % 2 != beta) {
        ok = false;
        break;
      }
    }
    if (ok) return parity_theta(inst, pv, v);
  }
  return std::nullopt;
}

int recover_bit_index2(const AttackInstance& inst, const scheme::HomMatrix& theta, OpCounter& counter) {
  AttackInstance red = reduce_sylow2(inst, counter);
  ParityView pv(red);
  std::uint64_t v = 0;
  for (std::size_t b = 0; b < pv.even.size(); ++b) {
    if (mod(theta.a(0, pv.even[b]), 2) == 1) v |= std::uint64_t{1} << b;
  }
  std::vector<std::uint64_t> ell_bits;
  for (const auto& l : red.ell) ell_bits.push_back(pv.bits(l, counter));
  const auto w = noiseless_word(red, pv, ell_bits, red.ct.g, red.ct.h, counter);
  return std::popcount(v & w) % 2;
}

}  // namespace lhn::attack
