#include <lhn/errors.hpp>
#include <lhn/io.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>

namespace lhn::io {

namespace {

using groups::GroupBackend;
using groups::GroupElement;
using groups::Realization;

template <class F>
auto guarded(const char* what, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw SchemaError(std::string(what) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string(what) + ": " + e.what());
  }
}

void expect_schema(const json& j, const std::string& kind) {
  if (!j.is_object()) throw SchemaError("expected a JSON object");
  if (!j.contains("schema") || !j.contains("version")) throw SchemaError("missing schema or version field");
  const auto got = j.at("schema").get<std::string>();
  if (!kind.empty() && got != kind) throw SchemaError("expected schema " + kind + ", found " + got);
  if (j.at("version").get<int>() != kVersion) {
    throw SchemaError("unsupported " + got + " version " + std::to_string(j.at("version").get<int>()));
  }
}

json header(const std::string& kind) { return json{{"schema", kind}, {"version", kVersion}}; }

SchemeKind scheme_from_name(const std::string& s) {
  if (s == "abelian") return SchemeKind::abelian;
  if (s == "solvable") return SchemeKind::solvable;
  throw SchemaError("unknown scheme '" + s + "'");
}

json elements_to_json(const GroupBackend& g, const std::vector<GroupElement>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(element_to_json(g, x));
  return out;
}

std::vector<GroupElement> elements_from_json(const GroupBackend& g, const json& j) {
  std::vector<GroupElement> out;
  for (const auto& e : j) out.push_back(element_from_json(g, e));
  return out;
}

std::vector<groups::Index> indices(const std::vector<GroupElement>& xs) {
  std::vector<groups::Index> out;
  for (const auto& x : xs) out.push_back(std::get<groups::Index>(x));
  return out;
}

void require_table(const GroupBackend& g, const char* which) {
  if (g.realization() != Realization::table) {
    throw BackendMismatch(std::string("solvable keys need a table group for ") + which);
  }
}

}  // namespace

json integer_to_json(const Integer& x) { return x.get_str(); }

Integer integer_from_json(const json& j) {
  if (j.is_number_integer()) return Integer(std::to_string(j.get<long long>()));
  const auto s = j.get<std::string>();
  const std::size_t start = !s.empty() && s[0] == '-' ? 1 : 0;
  if (s.size() == start || s.find_first_not_of("0123456789", start) != std::string::npos) {
    throw SchemaError("not a decimal integer: '" + s + "'");
  }
  return Integer(s);
}

json integers_to_json(const IntVector& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(integer_to_json(x));
  return out;
}

IntVector integers_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("expected an array of integers");
  IntVector out;
  for (const auto& x : j) out.push_back(integer_from_json(x));
  return out;
}

json spec_to_json(const AbelianGroupSpec& spec) { return integers_to_json(spec.orders); }

AbelianGroupSpec spec_from_json(const json& j) {
  return guarded("group orders", [&] {
    auto orders = integers_from_json(j);
    for (const auto& d : orders) {
      if (d < 1) throw SchemaError("cyclic factor orders must be positive");
    }
    return AbelianGroupSpec(std::move(orders));
  });
}

json group_to_json(const GroupBackend& g) {
  json j;
  j["backend"] = groups::realization_name(g.realization());
  switch (g.realization()) {
    case Realization::transparent:
    case Realization::packed:
      j["orders"] = spec_to_json(g.spec());
      break;
    case Realization::units_mod_n: {
      const auto* u = g.units();
      j["modulus"] = integer_to_json(u->modulus);
      json f = json::array();
      for (const auto& pp : u->factorization) f.push_back({integer_to_json(pp.prime), pp.exponent});
      j["factorization"] = f;
      j["orders"] = spec_to_json(g.spec());
      j["residues"] = integers_to_json(u->residues);
      break;
    }
    case Realization::table: {
      const auto* t = g.table();
      const auto& perms = t->permutation_generators();
      if (!perms.empty() && groups::FiniteGroupTable::from_permutations(perms).rows() == t->rows()) {
        j["permutations"] = perms;
      } else {
        j["rows"] = t->rows();
        if (!t->labels().empty()) j["labels"] = t->labels();
      }
      break;
    }
  }
  return j;
}

GroupBackend group_from_json(const json& j) {
  return guarded("group", [&] {
    const auto backend = j.at("backend").get<std::string>();
    if (backend == "transparent") return groups::make_transparent(spec_from_json(j.at("orders")));
    if (backend == "packed") return groups::make_packed_2group(spec_from_json(j.at("orders")));
    if (backend == "units_mod_n") {
      const Integer n = integer_from_json(j.at("modulus"));
      algebra::Factorization f;
      for (const auto& e : j.at("factorization")) {
        f.push_back({integer_from_json(e.at(0)), e.at(1).get<unsigned long>()});
      }
      if (algebra::multiply_out(f) != n) throw SchemaError("factorization does not multiply to the modulus");
      for (const auto& pp : f) {
        if (!algebra::is_probable_prime(pp.prime)) throw SchemaError("factorization entry " + pp.prime.get_str() + " is not prime");
      }
      return groups::make_units_mod_n(n, f, spec_from_json(j.at("orders")), integers_from_json(j.at("residues")));
    }
    if (backend == "table") {
      groups::FiniteGroupTable t;
      if (j.contains("permutations")) {
        t = groups::FiniteGroupTable::from_permutations(
            j.at("permutations").get<std::vector<std::vector<groups::Index>>>());
      } else {
        auto labels = j.value("labels", std::vector<std::string>{});
        t = groups::FiniteGroupTable::from_table(j.at("rows").get<std::vector<std::vector<groups::Index>>>(),
                                                 std::move(labels));
      }
      return groups::make_table_backend(std::make_shared<const groups::FiniteGroupTable>(std::move(t)));
    }
    throw SchemaError("unknown backend '" + backend + "'");
  });
}

json element_to_json(const GroupBackend& g, const GroupElement& x) {
  switch (g.realization()) {
    case Realization::transparent:
      return integers_to_json(std::get<IntVector>(x));
    case Realization::packed:
      return integers_to_json(g.trapdoor_log(x));
    case Realization::units_mod_n:
      return integer_to_json(std::get<Integer>(x));
    case Realization::table:
      return std::get<groups::Index>(x);
  }
  return nullptr;
}

GroupElement element_from_json(const GroupBackend& g, const json& j) {
  return guarded("group element", [&]() -> GroupElement {
    GroupElement x;
    switch (g.realization()) {
      case Realization::transparent:
        if (!j.is_array()) throw BackendMismatch("expected an exponent vector");
        x = integers_from_json(j);
        break;
      case Realization::packed: {
        if (!j.is_array()) throw BackendMismatch("expected an exponent vector");
        auto e = integers_from_json(j);
        if (e.size() != g.spec().rank()) throw SchemaError("exponent vector has the wrong length");
        for (std::size_t i = 0; i < e.size(); ++i) {
          if (e[i] < 0 || e[i] >= g.spec().orders[i]) throw SchemaError("exponent out of range");
        }
        x = g.from_exponents(e);
        break;
      }
      case Realization::units_mod_n:
        if (!j.is_string() && !j.is_number_integer()) throw BackendMismatch("expected a residue");
        x = integer_from_json(j);
        break;
      case Realization::table:
        if (!j.is_number_integer()) throw BackendMismatch("expected a table index");
        x = j.get<groups::Index>();
        break;
    }
    g.check_element(x);
    return x;
  });
}

json hom_to_json(const scheme::HomMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.a.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.a.cols(); ++c) row.push_back(integer_to_json(m.a(r, c)));
    rows.push_back(row);
  }
  return {{"source", spec_to_json(m.source)}, {"target", spec_to_json(m.target)}, {"matrix", rows}};
}

scheme::HomMatrix hom_from_json(const json& j) {
  return guarded("homomorphism", [&] {
    auto m = scheme::HomMatrix::zero(spec_from_json(j.at("source")), spec_from_json(j.at("target")));
    const auto& rows = j.at("matrix");
    if (rows.size() != m.a.rows()) throw SchemaError("homomorphism matrix has the wrong shape");
    for (std::size_t r = 0; r < m.a.rows(); ++r) {
      if (rows[r].size() != m.a.cols()) throw SchemaError("homomorphism matrix has the wrong shape");
      for (std::size_t c = 0; c < m.a.cols(); ++c) m.a(r, c) = integer_from_json(rows[r][c]);
    }
    try {
      m.validate();
    } catch (const ConstructionError& e) {
      throw SchemaError(e.what());
    }
    return m;
  });
}

const char* scheme_name(SchemeKind k) { return k == SchemeKind::abelian ? "abelian" : "solvable"; }

json params_to_json(const ParamFile& p) {
  json j = header("lhn.params");
  j["scheme"] = scheme_name(p.scheme);
  j["lambda"] = p.lambda;
  j["distribution"] = p.distribution;
  if (!p.preset.empty()) j["preset"] = p.preset;
  j["G"] = group_to_json(p.G);
  j["H"] = group_to_json(p.H);
  if (p.scheme == SchemeKind::abelian) j["K"] = spec_to_json(p.K);
  if (p.m) j["m"] = *p.m;
  return j;
}

ParamFile params_from_json(const json& j) {
  return guarded("params", [&] {
    expect_schema(j, "lhn.params");
    ParamFile p;
    p.scheme = scheme_from_name(j.at("scheme").get<std::string>());
    p.lambda = j.at("lambda").get<unsigned>();
    p.distribution = j.value("distribution", std::string("uniform"));
    if (p.distribution != "uniform") throw SchemaError("unknown distribution '" + p.distribution + "'");
    p.preset = j.value("preset", std::string());
    p.G = group_from_json(j.at("G"));
    p.H = group_from_json(j.at("H"));
    if (p.scheme == SchemeKind::abelian) {
      p.K = spec_from_json(j.at("K"));
    } else {
      require_table(p.G, "G");
      require_table(p.H, "H");
    }
    if (j.contains("m")) p.m = j.at("m").get<std::size_t>();
    return p;
  });
}

PublicFile make_public(scheme::PublicKey pk) {
  PublicFile f;
  f.scheme = SchemeKind::abelian;
  f.G = pk.G;
  f.H = pk.H;
  f.abelian = std::move(pk);
  return f;
}

PublicFile make_public(solvable::PublicKey pk) {
  PublicFile f;
  f.scheme = SchemeKind::solvable;
  f.G = groups::make_table_backend(pk.G);
  f.H = groups::make_table_backend(pk.H);
  f.solvable = std::move(pk);
  return f;
}

json public_to_json(const PublicFile& pk) {
  json j = header("lhn.public_key");
  j["scheme"] = scheme_name(pk.scheme);
  j["G"] = group_to_json(pk.G);
  j["H"] = group_to_json(pk.H);
  if (pk.scheme == SchemeKind::abelian) {
    const auto& k = pk.abelian;
    j["g"] = elements_to_json(pk.G, k.g);
    j["ell"] = elements_to_json(pk.H, k.ell);
    j["orders"] = integers_to_json(k.orders);
    j["tau"] = element_to_json(pk.H, k.tau);
  } else {
    const auto& k = pk.solvable;
    j["g"] = k.g;
    j["ell"] = k.ell;
    j["tau"] = k.tau;
  }
  return j;
}

PublicFile public_from_json(const json& j) {
  return guarded("public key", [&] {
    expect_schema(j, "lhn.public_key");
    const auto kind = scheme_from_name(j.at("scheme").get<std::string>());
    auto G = group_from_json(j.at("G"));
    auto H = group_from_json(j.at("H"));
    if (kind == SchemeKind::abelian) {
      scheme::PublicKey k;
      k.G = G;
      k.H = H;
      k.g = elements_from_json(G, j.at("g"));
      k.ell = elements_from_json(H, j.at("ell"));
      k.orders = integers_from_json(j.at("orders"));
      k.tau = element_from_json(H, j.at("tau"));
      if (k.g.size() != k.ell.size() || k.g.size() != k.orders.size()) {
        throw SchemaError("public key: g, ell and orders differ in length");
      }
      return make_public(std::move(k));
    }
    require_table(G, "G");
    require_table(H, "H");
    solvable::PublicKey k;
    k.G = G.table_ptr();
    k.H = H.table_ptr();
    k.layers = solvable::build_layer_data(*k.G);
    k.g = indices(elements_from_json(G, j.at("g")));
    k.ell = indices(elements_from_json(H, j.at("ell")));
    k.tau = std::get<groups::Index>(element_from_json(H, j.at("tau")));
    if (k.g != k.layers.flat_generators()) {
      throw SchemaError("public key: g does not match the derived layer generators of G");
    }
    if (k.ell.size() != k.g.size()) throw SchemaError("public key: g and ell differ in length");
    PublicFile f;
    f.scheme = kind;
    f.G = G;
    f.H = H;
    f.solvable = std::move(k);
    return f;
  });
}

json secret_to_json(const PublicFile& pk, const SecretFile& sk) {
  if (pk.scheme != sk.scheme) throw BackendMismatch("secret and public key schemes differ");
  json j = header("lhn.secret_key");
  j["scheme"] = scheme_name(sk.scheme);
  if (sk.scheme == SchemeKind::abelian) {
    const auto& k = sk.abelian;
    j["K"] = spec_to_json(k.K);
    j["phi"] = hom_to_json(k.phi);
    j["psi"] = hom_to_json(k.psi);
    json kg = json::array();
    for (const auto& v : k.kernel_gens) kg.push_back(integers_to_json(v));
    j["kernel_generators"] = kg;
    j["noise"] = elements_to_json(pk.H, k.noise);
  } else {
    const auto& k = sk.solvable;
    j["phi"] = k.phi;
    j["kernel"] = k.kernel;
    j["noise"] = k.noise;
  }
  return j;
}

SecretFile secret_from_json(const json& j, const PublicFile& pk) {
  return guarded("secret key", [&] {
    expect_schema(j, "lhn.secret_key");
    SecretFile sk;
    sk.scheme = scheme_from_name(j.at("scheme").get<std::string>());
    if (sk.scheme != pk.scheme) throw BackendMismatch("secret and public key schemes differ");
    if (sk.scheme == SchemeKind::abelian) {
      auto& k = sk.abelian;
      k.G = pk.G;
      k.H = pk.H;
      k.K = spec_from_json(j.at("K"));
      k.phi = hom_from_json(j.at("phi"));
      k.psi = hom_from_json(j.at("psi"));
      if (k.phi.source != pk.G.spec() || k.phi.target != pk.H.spec() || k.psi.source != pk.H.spec() ||
          k.psi.target != k.K) {
        throw BackendMismatch("secret key homomorphisms do not match the public groups");
      }
      for (const auto& v : j.at("kernel_generators")) k.kernel_gens.push_back(integers_from_json(v));
      k.noise = elements_from_json(pk.H, j.at("noise"));
      return sk;
    }
    auto& k = sk.solvable;
    const auto& g = *pk.solvable.G;
    const auto& h = *pk.solvable.H;
    k.phi = j.at("phi").get<std::vector<groups::Index>>();
    k.kernel = j.at("kernel").get<groups::ElementSet>();
    k.noise = j.at("noise").get<std::vector<groups::Index>>();
    if (k.phi.size() != g.order()) throw BackendMismatch("phi does not cover G");
    for (auto x : k.phi) {
      if (x >= h.order()) throw SchemaError("phi image outside H");
    }
    std::sort(k.kernel.begin(), k.kernel.end());
    if (k.kernel.empty() || k.kernel.back() >= h.order()) throw SchemaError("kernel is not a subset of H");
    groups::ElementSet all(h.order());
    std::iota(all.begin(), all.end(), groups::Index{0});
    if (groups::subgroup_closure(h, k.kernel) != k.kernel || !groups::is_normal_in(h, k.kernel, all)) {
      throw SchemaError("kernel is not a normal subgroup of H");
    }
    k.K = solvable::quotient_table(h, k.kernel);
    return sk;
  });
}

json ciphertext_to_json(const PublicFile& pk, const scheme::Ciphertext& ct) {
  json j = header("lhn.ciphertext");
  j["g"] = element_to_json(pk.G, ct.g);
  j["h"] = element_to_json(pk.H, ct.h);
  return j;
}

scheme::Ciphertext ciphertext_from_json(const json& j, const PublicFile& pk) {
  return guarded("ciphertext", [&] {
    expect_schema(j, "lhn.ciphertext");
    return scheme::Ciphertext{element_from_json(pk.G, j.at("g")), element_from_json(pk.H, j.at("h"))};
  });
}

json truth_to_json(int bit) {
  json j = header("lhn.truth");
  j["bit"] = bit;
  return j;
}

int truth_from_json(const json& j) {
  return guarded("truth", [&] {
    expect_schema(j, "lhn.truth");
    const int b = j.at("bit").get<int>();
    if (b != 0 && b != 1) throw SchemaError("truth bit must be 0 or 1");
    return b;
  });
}

json report_to_json(const attack::AttackReport& r, std::optional<int> truth,
                    const std::optional<ReportError>& error) {
  json j = header("lhn.attack_report");
  j["strategy"] = r.strategy;
  json stages = json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"name", s.name}, {"seconds", s.seconds}, {"ops", s.ops}, {"verdict", s.verdict}});
  }
  j["stages"] = stages;
  j["total_ops"] = r.total_ops();
  j["assumptions"] = {{"A1", r.flags.a1},
                      {"A2", r.flags.a2},
                      {"A3", r.flags.a3 ? json(*r.flags.a3) : json(nullptr)},
                      {"A4", r.flags.a4}};
  j["bit"] = r.bit ? json(*r.bit) : json(nullptr);
  if (truth) {
    j["truth"] = *truth;
    j["success"] = r.bit.has_value() && *r.bit == *truth;
  } else {
    j["success"] = nullptr;
  }
  if (error) {
    j["error"] = {{"kind", error->kind}, {"label", error->label}, {"message", error->message}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

json security_to_json(const scheme::SecurityReport& r) {
  json j = header("lhn.security_report");
  j["lambda"] = r.lambda;
  j["S1"] = {{"pass", r.s1}, {"hom_G_H", integer_to_json(r.hom_gh)}, {"hom_H_K_minus", integer_to_json(r.hom_hk_minus)}};
  j["S3"] = {{"pass", r.s3}, {"subgroups_of_H", integer_to_json(r.subgroup_count)}, {"exact", r.subgroup_count_exact}};
  j["S4"] = {{"pass", r.s4}};
  j["classically_attackable"] = r.classically_attackable;
  j["attack_log2_work"] = r.attack_log2_work;
  j["tau_outside_commutator"] = r.tau_outside_commutator;
  j["warnings"] = r.warnings;
  j["verdict"] = r.failed() ? "fail" : r.warned() ? "warn" : "pass";
  return j;
}

json read_file(const std::filesystem::path& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  guarded("file header", [&] {
    expect_schema(j, kind);
    return 0;
  });
  return j;
}

void write_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace lhn::io
