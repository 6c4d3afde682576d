#pragma once

#include <lhn/io.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lhn::cli {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kSchema = 3,
  kMismatch = 4,
  kAssumption = 5,
  kBudget = 6,
  kRefusal = 7,
  kKeygen = 8,
  kValidateWarn = 10,
  kValidateFail = 11,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main(int argc, char** argv);

struct PresetOptions {
  std::string preset;  // cyclic64, c2m, explicit, s3, s4, d4, q8, agl13
  std::size_t m = 20;
  unsigned bits = 0;  // prime size for c2m, cofactor size for cyclic64; 0 = default
  std::string backend = "transparent";
  AbelianGroupSpec G, H, K;
  unsigned lambda = 128;
  std::optional<std::size_t> generators;
};
io::ParamFile gen_params(const PresetOptions& o, Rng& rng);

struct KeyFiles {
  io::PublicFile pk;
  io::SecretFile sk;
};
KeyFiles keygen(const io::ParamFile& p, Rng& rng);
scheme::Ciphertext encrypt(const io::PublicFile& pk, int bit, Rng& rng);
int decrypt(const io::PublicFile& pk, const io::SecretFile& sk, const scheme::Ciphertext& ct);
scheme::Ciphertext add(const io::PublicFile& pk, const scheme::Ciphertext& a, const scheme::Ciphertext& b);

struct AttackOutcome {
  attack::AttackReport report;
  std::optional<io::ReportError> error;
  int exit_code = kOk;
};
// strategy: theorem1, kernel, index2, solvable or auto.
AttackOutcome run_attack(const io::PublicFile& pk, const scheme::Ciphertext& ct, const std::string& strategy,
                         std::optional<std::uint64_t> budget, Rng& rng);

struct BenchRow {
  std::size_t m = 0;
  std::size_t trials = 0;
  double mean_ops = 0;
  double mean_seconds = 0;
};
struct BenchResult {
  std::vector<BenchRow> rows;
  // mean_ops[i + 1] / mean_ops[i]
  std::vector<double> ratios;
  // Per-step ratio from a least-squares fit of log2(ops) against m.
  double fitted_ratio = 0;
  std::vector<std::string> warnings;
};
// eDLP on the 2-Sylow C_2^m of the c2m preset, for m = lo, lo + step, ..., hi.
BenchResult bench_edlp(std::size_t lo, std::size_t hi, std::size_t step, std::size_t trials,
                       std::uint64_t seed, unsigned bits = 20);

}  // namespace lhn::cli
