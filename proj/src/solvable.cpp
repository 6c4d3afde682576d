#include <lhn/errors.hpp>
#include <lhn/solvable.hpp>

#include <algorithm>
#include <chrono>
#include <set>

namespace lhn::solvable {

namespace {

bool contains(const ElementSet& s, Index x) { return std::binary_search(s.begin(), s.end(), x); }

Index word_product(const FiniteGroupTable& g, const std::vector<Index>& gens, const IntVector& e,
                   std::size_t from, std::size_t count) {
  Index acc = g.identity();
  for (std::size_t j = 0; j < count; ++j) {
    acc = g.mul(acc, g.pow(gens[from + j], e[from + j].get_si()));
  }
  return acc;
}

// Extends images of generators along a BFS of the Cayley graph; nullopt when
// some edge x -> x s disagrees, i.e. the images define no homomorphism.
std::optional<std::vector<Index>> extend(const FiniteGroupTable& g, const std::vector<Index>& gens,
                                         const FiniteGroupTable& h, const std::vector<Index>& img) {
  constexpr Index unset = ~Index{0};
  std::vector<Index> f(g.order(), unset);
  f[g.identity()] = h.identity();
  std::vector<Index> queue{g.identity()};
  for (std::size_t k = 0; k < queue.size(); ++k) {
    const Index x = queue[k];
    for (std::size_t s = 0; s < gens.size(); ++s) {
      const Index y = g.mul(x, gens[s]);
      const Index fy = h.mul(f[x], img[s]);
      if (f[y] == unset) {
        f[y] = fy;
        queue.push_back(y);
      } else if (f[y] != fy) {
        return std::nullopt;
      }
    }
  }
  if (queue.size() != g.order()) throw std::invalid_argument("enumerate_homs: generators do not generate G");
  return f;
}

}  // namespace

std::size_t DerivedLayerData::dimension() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.generators.size();
  return n;
}

std::vector<Index> DerivedLayerData::flat_generators() const {
  std::vector<Index> out;
  for (const auto& l : layers) out.insert(out.end(), l.generators.begin(), l.generators.end());
  return out;
}

IntVector DerivedLayerData::flat_orders() const {
  IntVector out;
  for (const auto& l : layers) out.insert(out.end(), l.orders.begin(), l.orders.end());
  return out;
}

DerivedLayerData build_layer_data(const FiniteGroupTable& g) {
  auto series = groups::derived_series(g);
  if (!series.solvable) {
    throw Refusal("group of order " + std::to_string(g.order()) +
                  " is not solvable; its derived series stabilizes at order " +
                  std::to_string(series.terms.back().size()));
  }
  DerivedLayerData out;
  out.trivial = series.terms.back();
  for (std::size_t i = 0; i + 1 < series.terms.size(); ++i) {
    const auto& a = series.terms[i];
    const auto& b = series.terms[i + 1];
    for (Index x : a) {
      for (Index y : a) {
        if (!contains(b, g.commutator(x, y))) throw Error("derived layer quotient is not abelian");
      }
    }
    auto q = groups::decompose_quotient(g, a, b);
    out.layers.push_back({a, q.generators, q.orders});
  }
  return out;
}

IntVector normal_form(const FiniteGroupTable& g, const DerivedLayerData& d, Index x) {
  IntVector delta(d.dimension(), 0);
  const auto gens = d.flat_generators();
  Index r = x;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < d.length(); ++i) {
    const auto& layer = d.layers[i];
    const auto& next = i + 1 < d.length() ? d.layers[i + 1].subgroup : d.trivial;
    const std::size_t m = layer.generators.size();
    IntVector e(gens.size(), 0);
    bool found = false;
    // Odometer over prod_j [0, o_ij).
    for (;;) {
      const Index w = word_product(g, gens, e, offset, m);
      if (contains(next, g.mul(g.inv(w), r))) {
        r = g.mul(g.inv(w), r);
        for (std::size_t j = 0; j < m; ++j) delta[offset + j] = e[offset + j];
        found = true;
        break;
      }
      std::size_t j = 0;
      for (; j < m; ++j) {
        if (++e[offset + j] < layer.orders[j]) break;
        e[offset + j] = 0;
      }
      if (j == m) break;
    }
    if (!found) throw Error("element is not in the group described by the layer data");
    offset += m;
  }
  if (r != g.identity()) throw Error("normal form left a nontrivial residue");
  return delta;
}

Index from_normal_form(const FiniteGroupTable& g, const DerivedLayerData& d, const IntVector& delta) {
  const auto gens = d.flat_generators();
  return word_product(g, gens, delta, 0, gens.size());
}

bool normal_form_is_bijective(const FiniteGroupTable& g, const DerivedLayerData& d) {
  Integer box = 1;
  for (const auto& o : d.flat_orders()) box *= o;
  if (box != static_cast<unsigned long>(g.order())) return false;
  const auto orders = d.flat_orders();
  std::set<IntVector> seen;
  for (Index x = 0; x < g.order(); ++x) {
    auto delta = normal_form(g, d, x);
    for (std::size_t k = 0; k < delta.size(); ++k) {
      if (delta[k] < 0 || delta[k] >= orders[k]) return false;
    }
    if (from_normal_form(g, d, delta) != x) return false;
    if (!seen.insert(std::move(delta)).second) return false;
  }
  return true;
}

std::vector<std::vector<Index>> enumerate_homs(const FiniteGroupTable& g, const std::vector<Index>& gens,
                                               const FiniteGroupTable& h) {
  std::vector<std::vector<Index>> cands(gens.size());
  double total = 1;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const std::size_t o = g.element_order(gens[k]);
    for (Index y = 0; y < h.order(); ++y) {
      if (o % h.element_order(y) == 0) cands[k].push_back(y);
    }
    total *= static_cast<double>(cands[k].size());
  }
  if (total > 4194304.0) throw Refusal("more than 2^22 candidate generator images");
  std::vector<std::vector<Index>> out;
  std::vector<std::size_t> pos(gens.size(), 0);
  std::vector<Index> img(gens.size());
  for (;;) {
    for (std::size_t k = 0; k < gens.size(); ++k) img[k] = cands[k][pos[k]];
    if (auto f = extend(g, gens, h, img)) out.push_back(std::move(*f));
    std::size_t k = 0;
    for (; k < gens.size(); ++k) {
      if (++pos[k] < cands[k].size()) break;
      pos[k] = 0;
    }
    if (k == gens.size()) break;
  }
  return out;
}

std::vector<ElementSet> normal_subgroups(const FiniteGroupTable& h) {
  std::set<ElementSet> closures;
  for (Index x = 0; x < h.order(); ++x) closures.insert(groups::normal_closure(h, {x}));
  std::set<ElementSet> found{ElementSet{h.identity()}};
  std::vector<ElementSet> work{ElementSet{h.identity()}};
  while (!work.empty()) {
    auto n = std::move(work.back());
    work.pop_back();
    for (const auto& c : closures) {
      if (std::includes(n.begin(), n.end(), c.begin(), c.end())) continue;
      std::vector<Index> gens(n.begin(), n.end());
      gens.insert(gens.end(), c.begin(), c.end());
      auto join = groups::subgroup_closure(h, gens);
      if (found.insert(join).second) work.push_back(std::move(join));
    }
  }
  return {found.begin(), found.end()};
}

Quotient quotient_table(const FiniteGroupTable& h, const ElementSet& n) {
  constexpr Index unset = ~Index{0};
  Quotient q;
  q.project.assign(h.order(), unset);
  std::vector<Index> reps;
  std::vector<Index> order{h.identity()};
  for (Index x = 0; x < h.order(); ++x) {
    if (x != h.identity()) order.push_back(x);
  }
  for (Index x : order) {
    if (q.project[x] != unset) continue;
    const Index id = static_cast<Index>(reps.size());
    reps.push_back(x);
    for (Index y : n) q.project[h.mul(x, y)] = id;
  }
  std::vector<std::vector<Index>> rows(reps.size(), std::vector<Index>(reps.size()));
  for (std::size_t a = 0; a < reps.size(); ++a) {
    for (std::size_t b = 0; b < reps.size(); ++b) rows[a][b] = q.project[h.mul(reps[a], reps[b])];
  }
  q.table = std::make_shared<const FiniteGroupTable>(FiniteGroupTable::from_table(rows));
  return q;
}

KeyPair keygen(TablePtr G, TablePtr H, Rng& rng, std::size_t max_retries, bool noiseless) {
  const auto& g = *G;
  const auto& h = *H;
  auto layers = build_layer_data(g);
  const auto gens = layers.flat_generators();

  std::vector<Index> involutions;
  for (Index z : h.center()) {
    if (z != h.identity() && h.mul(z, z) == h.identity()) involutions.push_back(z);
  }
  if (involutions.empty()) throw KeygenError("tau", "H has no central element of order 2");
  std::vector<ElementSet> kernels;
  for (auto& n : normal_subgroups(h)) {
    if (n.size() == h.order()) continue;
    if (std::any_of(involutions.begin(), involutions.end(), [&](Index z) { return !contains(n, z); })) {
      kernels.push_back(std::move(n));
    }
  }
  if (kernels.empty()) throw KeygenError("psi", "every normal subgroup of H contains all central involutions");
  const auto homs = enumerate_homs(g, gens, h);

  const std::size_t retries = max_retries ? max_retries : 64 * std::max<std::size_t>(1, gens.size());
  for (std::size_t attempt = 0; attempt < retries; ++attempt) {
    KeyPair kp;
    kp.sk.phi = homs[rng() % homs.size()];
    kp.sk.kernel = kernels[rng() % kernels.size()];
    std::vector<Index> outside;
    for (Index z : involutions) {
      if (!contains(kp.sk.kernel, z)) outside.push_back(z);
    }
    kp.pk.tau = outside[rng() % outside.size()];
    for (std::size_t k = 0; k < gens.size(); ++k) {
      const Index noise = noiseless ? h.identity() : kp.sk.kernel[rng() % kp.sk.kernel.size()];
      kp.sk.noise.push_back(noise);
      kp.pk.ell.push_back(h.mul(kp.sk.phi[gens[k]], noise));
    }
    if (!contains(groups::normal_closure(h, kp.pk.ell), kp.pk.tau)) continue;
    kp.pk.G = G;
    kp.pk.H = H;
    kp.pk.layers = std::move(layers);
    kp.pk.g = gens;
    kp.sk.K = quotient_table(h, kp.sk.kernel);
    return kp;
  }
  throw KeygenError("S4", "tau was not in the normal closure of the l_ij in " + std::to_string(retries) +
                              " attempts");
}

scheme::Ciphertext encrypt_with(const PublicKey& pk, int beta, const IntVector& delta) {
  const auto& g = *pk.G;
  const auto& h = *pk.H;
  Index cg = g.identity(), ch = h.identity();
  for (std::size_t k = 0; k < pk.g.size(); ++k) {
    const long e = delta.at(k).get_si();
    cg = g.mul(cg, g.pow(pk.g[k], e));
    ch = h.mul(ch, h.pow(pk.ell[k], e));
  }
  if (beta) ch = h.mul(ch, pk.tau);
  return {cg, ch};
}

scheme::Ciphertext encrypt(const PublicKey& pk, int beta, Rng& rng) {
  const auto orders = pk.layers.flat_orders();
  IntVector delta;
  for (const auto& o : orders) delta.push_back(algebra::random_below(rng, o));
  return encrypt_with(pk, beta, delta);
}

scheme::Ciphertext encrypt_word(const PublicKey& pk, int beta, const std::vector<std::size_t>& word) {
  const auto& g = *pk.G;
  const auto& h = *pk.H;
  Index cg = g.identity(), ch = h.identity();
  for (std::size_t k : word) {
    cg = g.mul(cg, pk.g.at(k));
    ch = h.mul(ch, pk.ell.at(k));
  }
  if (beta) ch = h.mul(ch, pk.tau);
  return {cg, ch};
}

int decrypt(const SecretKey& sk, const PublicKey& pk, const scheme::Ciphertext& ct) {
  const auto& h = *pk.H;
  const Index g = std::get<Index>(ct.g);
  const Index x = h.mul(h.inv(sk.phi.at(g)), std::get<Index>(ct.h));
  return sk.K.project.at(x) == sk.K.project.at(h.identity()) ? 0 : 1;
}

int recover_bit(const PublicKey& pk, const scheme::Ciphertext& ct, attack::AttackReport* report) {
  const auto& g = *pk.G;
  const auto& h = *pk.H;
  if (report) report->strategy = "solvable";
  auto start = std::chrono::steady_clock::now();
  auto stage = [&](const std::string& name, std::uint64_t ops, const std::string& verdict) {
    auto now = std::chrono::steady_clock::now();
    if (report) report->stages.push_back({name, std::chrono::duration<double>(now - start).count(), ops, verdict});
    start = now;
  };
  const auto delta = normal_form(g, pk.layers, std::get<Index>(ct.g));
  Integer combos = 0;
  for (const auto& l : pk.layers.layers) {
    Integer c = 1;
    for (const auto& o : l.orders) c *= o;
    combos += c;
  }
  stage("normal form", combos.get_ui(), "delta over " + std::to_string(delta.size()) + " coordinates");
  Index prod = h.identity();
  std::uint64_t ops = 0;
  for (std::size_t k = 0; k < pk.ell.size(); ++k) {
    prod = h.mul(prod, h.pow(pk.ell[k], delta[k].get_si()));
    ops += 1 + groups::pow_cost(delta[k]);
  }
  const Index x = h.mul(h.inv(prod), std::get<Index>(ct.h));
  int bit = -1;
  if (x == h.identity()) bit = 0;
  if (x == pk.tau) bit = 1;
  if (bit < 0) {
    stage("recombine", ops + 2, "failed: residue is neither 1 nor tau");
    throw AssumptionFailure("ordering", "h' was not formed in normal-form word order");
  }
  stage("recombine", ops + 2, bit ? "residue tau" : "residue 1");
  if (report) report->bit = bit;
  return bit;
}

attack::AttackInstance attack_instance(const PublicKey& pk, const scheme::Ciphertext& ct) {
  attack::AttackInstance inst;
  inst.G = groups::make_table_backend(pk.G);
  inst.H = groups::make_table_backend(pk.H);
  for (Index x : pk.g) inst.g.push_back(x);
  for (Index x : pk.ell) inst.ell.push_back(x);
  for (Index x : pk.g) inst.orders.push_back(static_cast<unsigned long>(pk.G->element_order(x)));
  inst.tau = pk.tau;
  inst.ct = ct;
  inst.flags.a1 = inst.G.abelian() && inst.H.abelian();
  inst.flags.a2 = true;
  inst.flags.a4 = true;
  const auto& hs = inst.H.spec();
  for (std::size_t j = 0; j < hs.rank(); ++j) {
    inst.h_decomposition.generators.push_back(inst.H.generator(j));
    inst.h_decomposition.orders.push_back(hs.orders[j]);
  }
  return inst;
}

}  // namespace lhn::solvable
