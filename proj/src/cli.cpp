#include <lhn/cli.hpp>
#include <lhn/errors.hpp>
#include <lhn/presets.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

namespace lhn::cli {

namespace {

using attack::AttackInstance;
using attack::AttackReport;
using groups::FiniteGroupTable;
using io::json;
using io::PublicFile;
using io::SchemeKind;
using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

AbelianGroupSpec parse_orders(const std::string& s) {
  IntVector orders;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw SchemaError("bad cyclic factor order '" + item + "' in '" + s + "'");
    }
    orders.emplace_back(item);
  }
  if (orders.empty()) throw SchemaError("empty order list");
  return AbelianGroupSpec(orders);
}

solvable::TablePtr share(FiniteGroupTable t) { return std::make_shared<const FiniteGroupTable>(std::move(t)); }

groups::GroupBackend table_backend(FiniteGroupTable t) { return groups::make_table_backend(share(std::move(t))); }

FiniteGroupTable times_c2(const FiniteGroupTable& g) {
  return FiniteGroupTable::direct_product(g, FiniteGroupTable::from_abelian(AbelianGroupSpec{{2}}));
}

// Runs body as one report stage; the stage is kept when body throws.
template <class F>
auto timed_stage(AttackReport& report, const std::string& name, attack::OpCounter& counter, F&& body) {
  const auto start = Clock::now();
  const auto ops0 = counter.ops();
  std::string verdict = "ok";
  try {
    auto result = body(verdict);
    report.stages.push_back({name, since(start), counter.ops() - ops0, verdict});
    return result;
  } catch (const BudgetExceeded& e) {
    report.stages.push_back({name, since(start), counter.ops() - ops0, std::string("budget exceeded: ") + e.what()});
    throw;
  } catch (const std::exception& e) {
    report.stages.push_back({name, since(start), counter.ops() - ops0, std::string("failed: ") + e.what()});
    throw;
  }
}

int index2_attack(const AttackInstance& inst, std::optional<std::uint64_t> budget, Rng& rng, AttackReport& report) {
  attack::OpCounter counter(budget);
  report.flags = inst.flags;
  auto theta = timed_stage(report, "index-2 search", counter, [&](std::string& verdict) {
    auto t = attack::search_index2_theta(inst, rng, 16, counter);
    if (!t) throw AssumptionFailure("index2", "no index-2 subgroup of H contains the noise but not tau");
    verdict = "theta found";
    return *t;
  });
  const int bit = timed_stage(report, "index-2 decrypt", counter, [&](std::string& verdict) {
    const int b = attack::recover_bit_index2(inst, theta, counter);
    verdict = "bit " + std::to_string(b);
    return b;
  });
  report.bit = bit;
  return bit;
}

int abelian_attack(AttackInstance inst, const std::string& strategy, std::optional<std::uint64_t> budget, Rng& rng,
                   AttackReport& report) {
  attack::AttackOptions opts;
  opts.budget = budget;
  if (strategy == "theorem1") {
    report.strategy = "theorem1";
    return attack::recover_bit(inst, opts, &report);
  }
  if (strategy == "kernel") {
    report.strategy = "kernel";
    return attack::recover_bit_via_kernel(inst, opts, &report);
  }
  if (strategy == "index2") {
    report.strategy = "index2";
    return index2_attack(inst, budget, rng, report);
  }
  // auto
  if (!inst.flags.a1 && inst.H.abelian()) {
    attack::OpCounter counter(budget);
    inst = timed_stage(report, "abelianize G", counter, [&](std::string& verdict) {
      verdict = "G replaced by its abelianization";
      return attack::convert_instance(inst, attack::theta_identity(inst.H), counter);
    });
  }
  try {
    report.strategy = "theorem1";
    const int bit = attack::recover_bit(inst, opts, &report);
    report.strategy = "auto: theorem1";
    return bit;
  } catch (const AssumptionFailure& e) {
    if (e.label() != "A3") throw;
  }
  report.strategy = "auto: theorem1, then index2";
  auto flags = report.flags;
  const int bit = index2_attack(inst, budget, rng, report);
  report.flags = flags;
  return bit;
}

std::string format_seconds(double s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << s;
  return os.str();
}

void print_report(std::ostream& out, const AttackOutcome& o, std::optional<int> truth) {
  const auto& r = o.report;
  out << "strategy  " << r.strategy << '\n';
  for (const auto& s : r.stages) {
    out << "  " << std::left << std::setw(20) << s.name << std::right << std::setw(10) << format_seconds(s.seconds)
        << " s " << std::setw(14) << s.ops << " ops  " << s.verdict << '\n';
  }
  out << "total ops " << r.total_ops() << '\n';
  if (r.bit) {
    out << "bit       " << *r.bit;
    if (truth) out << (*r.bit == *truth ? "  (matches ground truth)" : "  (WRONG, truth " + std::to_string(*truth) + ")");
    out << '\n';
  }
  if (o.error) out << o.error->kind << ": " << o.error->message << '\n';
}

// Solvable keys get the same S1/S3/S4 questions answered by enumeration.
json validate_solvable(const solvable::PublicKey& pk, unsigned lambda, int& code) {
  const auto& g = *pk.G;
  const auto& h = *pk.H;
  const double homs = static_cast<double>(solvable::enumerate_homs(g, pk.g, h).size());
  const double normals = static_cast<double>(solvable::normal_subgroups(h).size());
  const auto closure = groups::normal_closure(h, pk.ell);
  const bool s4 = std::binary_search(closure.begin(), closure.end(), pk.tau);
  const auto derived = groups::commutator_subgroup(h, [&] {
    groups::ElementSet all(h.order());
    std::iota(all.begin(), all.end(), groups::Index{0});
    return all;
  }());
  const bool tau_in_commutator = std::binary_search(derived.begin(), derived.end(), pk.tau);
  const double target = std::ldexp(1.0, static_cast<int>(std::min(lambda, 1000u)));
  json j{{"schema", "lhn.security_report"}, {"version", io::kVersion}, {"lambda", lambda}};
  j["S1"] = {{"pass", homs >= target}, {"hom_G_H", static_cast<std::uint64_t>(homs)}};
  j["S3"] = {{"pass", normals >= target}, {"normal_subgroups_of_H", static_cast<std::uint64_t>(normals)}, {"exact", true}};
  j["S4"] = {{"pass", s4}};
  j["classically_attackable"] = false;
  j["tau_outside_commutator"] = !tau_in_commutator;
  json warnings = json::array();
  if (!tau_in_commutator) {
    warnings.push_back("tau is not in [H,H]: it is advisable (but likely not sufficient) to sample tau from [H,H]");
  }
  warnings.push_back("desk-scale table groups: the normal form is found by exhaustive search");
  j["warnings"] = warnings;
  const bool fail = !(homs >= target && normals >= target && s4);
  j["verdict"] = fail ? "fail" : "warn";
  code = fail ? kValidateFail : kValidateWarn;
  return j;
}

std::vector<std::string> expand_ct_args(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const auto& a : args) {
    if (!a.empty() && a[0] == '@') {
      std::ifstream in(a.substr(1));
      if (!in) throw SchemaError("cannot read list file " + a.substr(1));
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(line);
      }
    } else {
      out.push_back(a);
    }
  }
  return out;
}

void parse_m_range(const std::string& s, std::size_t& lo, std::size_t& hi, std::size_t& step) {
  std::vector<std::size_t> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw SchemaError("bad --m-range '" + s + "' (expected lo:hi[:step])");
    }
    parts.push_back(std::stoul(item));
  }
  if (parts.empty() || parts.size() > 3) throw SchemaError("bad --m-range '" + s + "' (expected lo:hi[:step])");
  lo = parts[0];
  hi = parts.size() > 1 ? parts[1] : lo;
  step = parts.size() > 2 ? parts[2] : 2;
  if (lo < 1 || hi < lo || step < 1) throw SchemaError("bad --m-range '" + s + "'");
}

}  // namespace

io::ParamFile gen_params(const PresetOptions& o, Rng& rng) {
  io::ParamFile p;
  p.lambda = o.lambda;
  p.preset = o.preset;
  p.m = o.generators;
  if (o.preset == "cyclic64") {
    const unsigned bits = o.bits ? o.bits : 16;
    p.G = presets::realize(presets::cyclic_2power(64, bits, rng));
    p.H = presets::realize(presets::cyclic_2power(64, bits, rng));
    p.K = AbelianGroupSpec{{Integer(1) << 64}};
    return p;
  }
  if (o.preset == "c2m") {
    const unsigned bits = o.bits ? o.bits : 20;
    p.G = presets::realize(presets::c2m(o.m, bits, rng));
    p.H = presets::realize(presets::c2m(o.m, bits, rng));
    p.K = AbelianGroupSpec{{2}};
    return p;
  }
  if (o.preset == "explicit") {
    if (o.G.rank() == 0 || o.H.rank() == 0 || o.K.rank() == 0) {
      throw SchemaError("explicit parameters need --G, --H and --K");
    }
    auto make = [&](const AbelianGroupSpec& s) {
      if (o.backend == "transparent") return groups::make_transparent(s);
      if (o.backend == "packed") return groups::make_packed_2group(s);
      throw SchemaError("explicit backend must be transparent or packed, not '" + o.backend + "'");
    };
    p.G = make(o.G);
    p.H = make(o.H);
    p.K = o.K;
    return p;
  }
  p.scheme = SchemeKind::solvable;
  if (o.preset == "s3") {
    p.G = table_backend(groups::symmetric_group(3));
    p.H = table_backend(times_c2(groups::symmetric_group(3)));
  } else if (o.preset == "s4") {
    p.G = table_backend(groups::symmetric_group(4));
    p.H = table_backend(times_c2(groups::symmetric_group(4)));
  } else if (o.preset == "d4") {
    p.G = p.H = table_backend(groups::dihedral_group(4));
  } else if (o.preset == "q8") {
    p.G = p.H = table_backend(groups::quaternion_group());
  } else if (o.preset == "agl13") {
    p.G = table_backend(groups::affine_group(13));
    p.H = table_backend(times_c2(groups::affine_group(13)));
  } else {
    throw SchemaError("unknown preset '" + o.preset + "'");
  }
  return p;
}

KeyFiles keygen(const io::ParamFile& p, Rng& rng) {
  KeyFiles k;
  if (p.scheme == SchemeKind::solvable) {
    auto kp = solvable::keygen(p.G.table_ptr(), p.H.table_ptr(), rng);
    k.pk = io::make_public(std::move(kp.pk));
    k.sk.scheme = SchemeKind::solvable;
    k.sk.solvable = std::move(kp.sk);
    return k;
  }
  scheme::KeygenOptions opts;
  if (p.m) {
    opts.m = p.m;
    opts.generators = scheme::GeneratorChoice::uniform;
  }
  auto kp = scheme::keygen(p.G, p.H, p.K, rng, opts);
  k.pk = io::make_public(std::move(kp.pk));
  k.sk.scheme = SchemeKind::abelian;
  k.sk.abelian = std::move(kp.sk);
  return k;
}

scheme::Ciphertext encrypt(const PublicFile& pk, int bit, Rng& rng) {
  if (bit != 0 && bit != 1) throw SchemaError("plaintext bit must be 0 or 1");
  return pk.scheme == SchemeKind::abelian ? scheme::encrypt(pk.abelian, bit, rng)
                                          : solvable::encrypt(pk.solvable, bit, rng);
}

int decrypt(const PublicFile& pk, const io::SecretFile& sk, const scheme::Ciphertext& ct) {
  if (pk.scheme != sk.scheme) throw BackendMismatch("secret and public key schemes differ");
  return pk.scheme == SchemeKind::abelian ? scheme::decrypt(sk.abelian, ct)
                                          : solvable::decrypt(sk.solvable, pk.solvable, ct);
}

scheme::Ciphertext add(const PublicFile& pk, const scheme::Ciphertext& a, const scheme::Ciphertext& b) {
  if (pk.scheme == SchemeKind::abelian) return scheme::ct_add(pk.abelian, a, b);
  // tau is central and the kernel normal, so the product still decrypts to the XOR.
  return {pk.G.mul(a.g, b.g), pk.H.mul(a.h, b.h)};
}

AttackOutcome run_attack(const PublicFile& pk, const scheme::Ciphertext& ct, const std::string& strategy,
                         std::optional<std::uint64_t> budget, Rng& rng) {
  static const std::vector<std::string> known{"auto", "theorem1", "kernel", "index2", "solvable"};
  if (std::find(known.begin(), known.end(), strategy) == known.end()) {
    throw SchemaError("unknown strategy '" + strategy + "'");
  }
  AttackOutcome o;
  auto& r = o.report;
  try {
    if (pk.scheme == SchemeKind::solvable) {
      if (strategy == "auto" || strategy == "solvable") {
        r.strategy = "solvable";
        solvable::recover_bit(pk.solvable, ct, &r);
      } else {
        abelian_attack(solvable::attack_instance(pk.solvable, ct), strategy, budget, rng, r);
      }
    } else {
      if (strategy == "solvable") {
        r.strategy = "solvable";
        throw AssumptionFailure("strategy", "the solvable attack needs a table-group public key");
      }
      abelian_attack(attack::make_instance(pk.abelian, ct), strategy, budget, rng, r);
    }
  } catch (const AssumptionFailure& e) {
    o.error = io::ReportError{"assumption", e.label(), e.what()};
    o.exit_code = kAssumption;
  } catch (const BudgetExceeded& e) {
    o.error = io::ReportError{"budget", "", std::string(e.what()) + " (needs " + std::to_string(e.needed()) +
                                                 " operations, budget " + std::to_string(e.budget()) + ")"};
    o.exit_code = kBudget;
  } catch (const Refusal& e) {
    o.error = io::ReportError{"refusal", "", e.what()};
    o.exit_code = kRefusal;
  }
  if (o.error) r.bit.reset();
  return o;
}

BenchResult bench_edlp(std::size_t lo, std::size_t hi, std::size_t step, std::size_t trials, std::uint64_t seed,
                       unsigned bits) {
  BenchResult out;
  constexpr std::size_t kMaxM = 48;  // table of 2^24 entries
  for (std::size_t m = lo; m <= hi; m += step) {
    if (m > kMaxM) {
      out.warnings.push_back("m range truncated at " + std::to_string(m - step) +
                             ": the table for m = " + std::to_string(m) + " exceeds the memory budget");
      break;
    }
    std::seed_seq sq{seed, static_cast<std::uint64_t>(m)};
    Rng rng(sq);
    auto g = presets::realize(presets::c2m(m, bits, rng));
    attack::Decomposition d;
    for (std::size_t i = 0; i < m; ++i) {
      d.generators.push_back(g.pow(g.generator(i), g.spec().orders[i] / 2));
      d.orders.push_back(2);
    }
    BenchRow row;
    row.m = m;
    row.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
      IntVector e(m);
      auto x = g.identity();
      for (std::size_t i = 0; i < m; ++i) {
        e[i] = static_cast<unsigned long>(rng() & 1);
        if (e[i] != 0) x = g.mul(x, d.generators[i]);
      }
      attack::EdlpSolver solver(g, d);
      attack::OpCounter counter;
      const auto start = Clock::now();
      auto res = solver.solve(x, counter);
      row.mean_seconds += since(start);
      row.mean_ops += static_cast<double>(counter.ops());
      if (res.exponents != e) throw std::logic_error("bench-edlp: solver returned a wrong logarithm");
    }
    if (trials) {
      row.mean_ops /= static_cast<double>(trials);
      row.mean_seconds /= static_cast<double>(trials);
    }
    out.rows.push_back(row);
  }
  for (std::size_t i = 1; i < out.rows.size(); ++i) out.ratios.push_back(out.rows[i].mean_ops / out.rows[i - 1].mean_ops);
  if (out.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(out.rows.size());
    for (const auto& r : out.rows) {
      const double x = static_cast<double>(r.m), y = std::log2(r.mean_ops);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.fitted_ratio = std::exp2(slope * static_cast<double>(step));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lhn: homomorphic encryption over finite groups, and attacks on it"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  bool as_json = false;
  std::string params_path, pub_path, sec_path, out_path, truth_path, strategy = "auto", m_range = "16:28";
  std::vector<std::string> ct_paths;
  std::optional<std::uint64_t> budget;
  unsigned lambda = 128;
  std::size_t trials = 5;
  PresetOptions preset;
  std::string g_orders, h_orders, k_orders;
  std::optional<int> bit;
  unsigned bench_bits = 20;

  auto common = [&](CLI::App* c) {
    c->add_option("--seed", seed, "RNG seed");
    c->add_flag("--json", as_json, "machine-readable output on stdout");
  };

  auto* gen = app.add_subcommand("gen-params", "write a parameter file");
  common(gen);
  gen->add_option("--preset", preset.preset, "cyclic64, c2m, explicit, s3, s4, d4, q8, agl13")->required();
  gen->add_option("--m", preset.m, "number of primes for c2m");
  gen->add_option("--bits", preset.bits, "prime bits (c2m) or cofactor bits (cyclic64)");
  gen->add_option("--G", g_orders, "explicit cyclic orders of G, e.g. 8,4");
  gen->add_option("--H", h_orders, "explicit cyclic orders of H");
  gen->add_option("--K", k_orders, "explicit cyclic orders of K");
  gen->add_option("--backend", preset.backend, "transparent or packed (explicit preset)");
  gen->add_option("--gens", preset.generators, "draw this many uniform public generators");
  gen->add_option("--lambda", lambda, "security parameter");
  gen->add_option("--out", out_path, "parameter file")->required();

  auto* kg = app.add_subcommand("keygen", "generate a key pair");
  common(kg);
  kg->add_option("--params", params_path)->required();
  kg->add_option("--pub", pub_path, "public key output")->required();
  kg->add_option("--sec", sec_path, "secret key output")->required();

  auto* enc = app.add_subcommand("encrypt", "encrypt one bit");
  common(enc);
  enc->add_option("--pub", pub_path)->required();
  enc->add_option("--bit", bit, "plaintext bit")->required();
  enc->add_option("--out", out_path, "ciphertext output")->required();
  enc->add_option("--truth", truth_path, "also write the bit to this sidecar file");

  auto* dec = app.add_subcommand("decrypt", "decrypt a ciphertext");
  common(dec);
  dec->add_option("--pub", pub_path)->required();
  dec->add_option("--sec", sec_path)->required();
  dec->add_option("--ct", ct_paths)->required()->expected(1);

  auto* add_cmd = app.add_subcommand("add", "homomorphically add ciphertexts (@file reads a list)");
  common(add_cmd);
  add_cmd->add_option("--pub", pub_path)->required();
  add_cmd->add_option("--ct", ct_paths)->required()->expected(1, -1);
  add_cmd->add_option("--out", out_path)->required();

  auto* atk = app.add_subcommand("attack", "recover the bit from public data");
  common(atk);
  atk->add_option("--pub", pub_path)->required();
  atk->add_option("--ct", ct_paths)->required()->expected(1);
  atk->add_option("--strategy", strategy, "auto, theorem1, kernel, index2 or solvable");
  atk->add_option("--budget-ops", budget, "group-operation budget");
  atk->add_option("--truth", truth_path, "ground-truth sidecar");
  atk->add_option("--out", out_path, "report output");

  auto* val = app.add_subcommand("validate", "check the security requirements of a key");
  common(val);
  val->add_option("--pub", pub_path)->required();
  val->add_option("--sec", sec_path)->required();
  val->add_option("--lambda", lambda, "security parameter");

  auto* bench = app.add_subcommand("bench-edlp", "eDLP operation counts on C_2^m");
  common(bench);
  bench->add_option("--m-range", m_range, "lo:hi[:step]");
  bench->add_option("--trials", trials);
  bench->add_option("--bits", bench_bits, "prime bits");
  bench->add_option("--out", out_path, "table output");

  std::vector<std::string> argv_store{"lhn"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Rng rng(seed);
  try {
    if (gen->parsed()) {
      preset.lambda = lambda;
      if (!g_orders.empty()) preset.G = parse_orders(g_orders);
      if (!h_orders.empty()) preset.H = parse_orders(h_orders);
      if (!k_orders.empty()) preset.K = parse_orders(k_orders);
      auto p = gen_params(preset, rng);
      const auto j = io::params_to_json(p);
      io::write_file(out_path, j);
      if (as_json) {
        out << j.dump() << '\n';
      } else {
        out << "wrote " << out_path << ": " << io::scheme_name(p.scheme) << " scheme, G " << p.G.description()
            << ", H " << p.H.description() << '\n';
      }
      return kOk;
    }
    if (kg->parsed()) {
      auto p = io::params_from_json(io::read_file(params_path, "lhn.params"));
      auto keys = keygen(p, rng);
      io::write_file(pub_path, io::public_to_json(keys.pk));
      io::write_file(sec_path, io::secret_to_json(keys.pk, keys.sk));
      if (!as_json) out << "wrote " << pub_path << " and " << sec_path << '\n';
      return kOk;
    }
    auto load_pub = [&] { return io::public_from_json(io::read_file(pub_path, "lhn.public_key")); };
    auto load_ct = [&](const PublicFile& pk, const std::string& path) {
      return io::ciphertext_from_json(io::read_file(path, "lhn.ciphertext"), pk);
    };
    if (enc->parsed()) {
      auto pk = load_pub();
      auto ct = encrypt(pk, *bit, rng);
      io::write_file(out_path, io::ciphertext_to_json(pk, ct));
      if (!truth_path.empty()) io::write_file(truth_path, io::truth_to_json(*bit));
      if (!as_json) out << "wrote " << out_path << '\n';
      return kOk;
    }
    if (dec->parsed()) {
      auto pk = load_pub();
      auto sk = io::secret_from_json(io::read_file(sec_path, "lhn.secret_key"), pk);
      const int b = decrypt(pk, sk, load_ct(pk, ct_paths.at(0)));
      if (as_json) {
        out << json{{"bit", b}}.dump() << '\n';
      } else {
        out << b << '\n';
      }
      return kOk;
    }
    if (add_cmd->parsed()) {
      auto pk = load_pub();
      const auto paths = expand_ct_args(ct_paths);
      if (paths.empty()) throw SchemaError("add needs at least one ciphertext");
      auto acc = load_ct(pk, paths[0]);
      for (std::size_t i = 1; i < paths.size(); ++i) acc = add(pk, acc, load_ct(pk, paths[i]));
      io::write_file(out_path, io::ciphertext_to_json(pk, acc));
      if (!as_json) out << "folded " << paths.size() << " ciphertexts into " << out_path << '\n';
      return kOk;
    }
    if (atk->parsed()) {
      auto pk = load_pub();
      auto ct = load_ct(pk, ct_paths.at(0));
      std::optional<int> truth;
      if (!truth_path.empty()) truth = io::truth_from_json(io::read_file(truth_path, "lhn.truth"));
      auto outcome = run_attack(pk, ct, strategy, budget, rng);
      const auto j = io::report_to_json(outcome.report, truth, outcome.error);
      if (!out_path.empty()) io::write_file(out_path, j);
      if (as_json) {
        out << j.dump() << '\n';
      } else {
        print_report(out, outcome, truth);
      }
      return outcome.exit_code;
    }
    if (val->parsed()) {
      auto pk = load_pub();
      auto sk = io::secret_from_json(io::read_file(sec_path, "lhn.secret_key"), pk);
      json j;
      int code = kOk;
      if (pk.scheme == SchemeKind::abelian) {
        auto r = scheme::validate_security(pk.abelian, sk.abelian, lambda);
        j = io::security_to_json(r);
        code = r.failed() ? kValidateFail : r.warned() ? kValidateWarn : kOk;
      } else {
        j = validate_solvable(pk.solvable, lambda, code);
      }
      if (as_json) {
        out << j.dump() << '\n';
      } else {
        out << "lambda " << lambda << '\n';
        for (const char* s : {"S1", "S3", "S4"}) {
          out << s << "  " << (j[s]["pass"].get<bool>() ? "pass" : "FAIL");
          for (const auto& [k, v] : j[s].items()) {
            if (k != "pass") out << "  " << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump());
          }
          out << '\n';
        }
        for (const auto& w : j["warnings"]) out << "warning: " << w.get<std::string>() << '\n';
        out << "verdict " << j["verdict"].get<std::string>() << '\n';
      }
      return code;
    }
    if (bench->parsed()) {
      std::size_t lo = 0, hi = 0, step = 2;
      parse_m_range(m_range, lo, hi, step);
      auto res = bench_edlp(lo, hi, step, trials, seed, bench_bits);
      json rows = json::array();
      for (const auto& r : res.rows) {
        rows.push_back({{"m", r.m}, {"trials", r.trials}, {"mean_ops", r.mean_ops}, {"mean_seconds", r.mean_seconds}});
      }
      json j{{"schema", "lhn.bench_edlp"}, {"version", io::kVersion}, {"seed", seed},         {"rows", rows},
             {"ratios", res.ratios},        {"fitted_ratio", res.fitted_ratio}, {"warnings", res.warnings}};
      if (!out_path.empty()) io::write_file(out_path, j);
      if (as_json) {
        out << j.dump() << '\n';
      } else {
        out << std::setw(4) << "m" << std::setw(16) << "mean ops" << std::setw(14) << "mean s" << std::setw(10)
            << "ratio" << '\n';
        for (std::size_t i = 0; i < res.rows.size(); ++i) {
          const auto& r = res.rows[i];
          out << std::setw(4) << r.m << std::setw(16) << std::fixed << std::setprecision(1) << r.mean_ops
              << std::setw(14) << std::setprecision(5) << r.mean_seconds;
          if (i > 0) out << std::setw(10) << std::setprecision(3) << res.ratios[i - 1];
          out << '\n';
        }
        out << "fitted ratio per step of " << step << ": " << std::setprecision(3) << res.fitted_ratio << '\n';
        for (const auto& w : res.warnings) out << "warning: " << w << '\n';
      }
      return kOk;
    }
  } catch (const BackendMismatch& e) {
    err << "backend mismatch: " << e.what() << '\n';
    return kMismatch;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kSchema;
  } catch (const KeygenError& e) {
    err << "keygen failed (" << e.requirement() << "): " << e.what() << '\n';
    return kKeygen;
  } catch (const ConstructionError& e) {
    err << "construction error: " << e.what() << '\n';
    return kKeygen;
  } catch (const AssumptionFailure& e) {
    err << "assumption failure: " << e.what() << '\n';
    return kAssumption;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const Refusal& e) {
    err << "refused: " << e.what() << '\n';
    return kRefusal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace lhn::cli
