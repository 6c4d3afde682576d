// Thin layer over the CLI library. Documents cross the boundary as JSON text,
// the same format the lhn tool reads and writes.
#include <lhn/cli.hpp>
#include <lhn/errors.hpp>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace lhn;
using io::json;

namespace {

AbelianGroupSpec to_spec(const std::vector<std::string>& orders) {
  IntVector v;
  for (const auto& s : orders) v.push_back(io::integer_from_json(json(s)));
  return AbelianGroupSpec(v);
}

io::PublicFile parse_pub(const std::string& s) { return io::public_from_json(json::parse(s)); }

scheme::Ciphertext parse_ct(const io::PublicFile& pk, const std::string& s) {
  return io::ciphertext_from_json(json::parse(s), pk);
}

// json::parse errors are not SchemaError; route everything through the io guards.
template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw SchemaError(e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_lhn, m) {
  m.doc() = "Additively homomorphic encryption over finite groups, and attacks on it";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  auto schema = py::register_exception<SchemaError>(m, "SchemaError", error.ptr());
  py::register_exception<BackendMismatch>(m, "BackendMismatch", schema.ptr());
  py::register_exception<ConstructionError>(m, "ConstructionError", error.ptr());
  py::register_exception<KeygenError>(m, "KeygenError", error.ptr());
  py::register_exception<AssumptionFailure>(m, "AssumptionFailure", error.ptr());
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", error.ptr());
  py::register_exception<Refusal>(m, "Refusal", error.ptr());

  m.def(
      "gen_params",
      [](const std::string& preset, std::uint64_t seed, std::size_t m_, unsigned bits, const std::string& backend,
         const std::vector<std::string>& G, const std::vector<std::string>& H, const std::vector<std::string>& K,
         unsigned lambda, std::optional<std::size_t> generators) {
        cli::PresetOptions o;
        o.preset = preset;
        o.m = m_;
        o.bits = bits;
        o.backend = backend;
        o.G = to_spec(G);
        o.H = to_spec(H);
        o.K = to_spec(K);
        o.lambda = lambda;
        o.generators = generators;
        Rng rng(seed);
        return io::params_to_json(cli::gen_params(o, rng)).dump();
      },
      py::arg("preset"), py::arg("seed") = 0, py::arg("m") = 20, py::arg("bits") = 0,
      py::arg("backend") = "transparent", py::arg("G") = std::vector<std::string>{},
      py::arg("H") = std::vector<std::string>{}, py::arg("K") = std::vector<std::string>{}, py::arg("lam") = 128,
      py::arg("generators") = std::nullopt);

  m.def(
      "keygen",
      [](const std::string& params, std::uint64_t seed) {
        return guarded([&] {
          Rng rng(seed);
          auto keys = cli::keygen(io::params_from_json(json::parse(params)), rng);
          return std::make_pair(io::public_to_json(keys.pk).dump(), io::secret_to_json(keys.pk, keys.sk).dump());
        });
      },
      py::arg("params"), py::arg("seed") = 0);

  m.def(
      "encrypt",
      [](const std::string& pub, int bit, std::uint64_t seed) {
        return guarded([&] {
          if (bit != 0 && bit != 1) throw SchemaError("bit must be 0 or 1");
          auto pk = parse_pub(pub);
          Rng rng(seed);
          return io::ciphertext_to_json(pk, cli::encrypt(pk, bit, rng)).dump();
        });
      },
      py::arg("pub"), py::arg("bit"), py::arg("seed") = 0);

  m.def(
      "decrypt",
      [](const std::string& pub, const std::string& sec, const std::string& ct) {
        return guarded([&] {
          auto pk = parse_pub(pub);
          auto sk = io::secret_from_json(json::parse(sec), pk);
          return cli::decrypt(pk, sk, parse_ct(pk, ct));
        });
      },
      py::arg("pub"), py::arg("sec"), py::arg("ct"));

  m.def(
      "add",
      [](const std::string& pub, const std::vector<std::string>& cts) {
        return guarded([&] {
          if (cts.empty()) throw SchemaError("add needs at least one ciphertext");
          auto pk = parse_pub(pub);
          auto acc = parse_ct(pk, cts[0]);
          for (std::size_t i = 1; i < cts.size(); ++i) acc = cli::add(pk, acc, parse_ct(pk, cts[i]));
          return io::ciphertext_to_json(pk, acc).dump();
        });
      },
      py::arg("pub"), py::arg("cts"));

  // Attack failures are reported in the document, not raised.
  m.def(
      "attack",
      [](const std::string& pub, const std::string& ct, const std::string& strategy,
         std::optional<std::uint64_t> budget, std::uint64_t seed, std::optional<int> truth) {
        return guarded([&] {
          auto pk = parse_pub(pub);
          auto c = parse_ct(pk, ct);
          Rng rng(seed);
          auto outcome = cli::run_attack(pk, c, strategy, budget, rng);
          return std::make_pair(io::report_to_json(outcome.report, truth, outcome.error).dump(), outcome.exit_code);
        });
      },
      py::arg("pub"), py::arg("ct"), py::arg("strategy") = "auto", py::arg("budget") = std::nullopt,
      py::arg("seed") = 0, py::arg("truth") = std::nullopt);

  m.def(
      "bench_edlp",
      [](std::size_t lo, std::size_t hi, std::size_t step, std::size_t trials, std::uint64_t seed, unsigned bits) {
        py::gil_scoped_release release;
        auto res = cli::bench_edlp(lo, hi, step, trials, seed, bits);
        json rows = json::array();
        for (const auto& r : res.rows) {
          rows.push_back({{"m", r.m}, {"trials", r.trials}, {"mean_ops", r.mean_ops}, {"mean_seconds", r.mean_seconds}});
        }
        return json{{"rows", rows},
                    {"ratios", res.ratios},
                    {"fitted_ratio", res.fitted_ratio},
                    {"warnings", res.warnings}}
            .dump();
      },
      py::arg("lo"), py::arg("hi"), py::arg("step") = 2, py::arg("trials") = 5, py::arg("seed") = 0,
      py::arg("bits") = 20);

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run an lhn subcommand in-process; returns (exit code, stdout, stderr).");
}
