#pragma once

#include <lhn/attack.hpp>
#include <lhn/scheme.hpp>
#include <lhn/solvable.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

// JSON files. Every document carries "schema" (the file kind) and "version".
// Big integers are decimal strings; table elements are plain indices.
namespace lhn::io {

using nlohmann::json;

inline constexpr int kVersion = 1;

json integer_to_json(const Integer& x);
Integer integer_from_json(const json& j);
json integers_to_json(const IntVector& v);
IntVector integers_from_json(const json& j);

json spec_to_json(const AbelianGroupSpec& spec);
AbelianGroupSpec spec_from_json(const json& j);

json group_to_json(const groups::GroupBackend& g);
groups::GroupBackend group_from_json(const json& j);

json element_to_json(const groups::GroupBackend& g, const groups::GroupElement& x);
groups::GroupElement element_from_json(const groups::GroupBackend& g, const json& j);

json hom_to_json(const scheme::HomMatrix& m);
scheme::HomMatrix hom_from_json(const json& j);

enum class SchemeKind { abelian, solvable };
const char* scheme_name(SchemeKind k);

struct ParamFile {
  SchemeKind scheme = SchemeKind::abelian;
  groups::GroupBackend G;
  groups::GroupBackend H;
  AbelianGroupSpec K;  // abelian scheme only
  unsigned lambda = 128;
  std::string distribution = "uniform";
  std::string preset;
  std::optional<std::size_t> m;  // uniform public generators when set
};

json params_to_json(const ParamFile& p);
ParamFile params_from_json(const json& j);

struct PublicFile {
  SchemeKind scheme = SchemeKind::abelian;
  scheme::PublicKey abelian;
  solvable::PublicKey solvable;
  // Backends of G and H in either case.
  groups::GroupBackend G;
  groups::GroupBackend H;
};
PublicFile make_public(scheme::PublicKey pk);
PublicFile make_public(solvable::PublicKey pk);

struct SecretFile {
  SchemeKind scheme = SchemeKind::abelian;
  scheme::SecretKey abelian;
  solvable::SecretKey solvable;
};

json public_to_json(const PublicFile& pk);
PublicFile public_from_json(const json& j);
json secret_to_json(const PublicFile& pk, const SecretFile& sk);
// The secret key refers to the groups of its public key.
SecretFile secret_from_json(const json& j, const PublicFile& pk);

json ciphertext_to_json(const PublicFile& pk, const scheme::Ciphertext& ct);
scheme::Ciphertext ciphertext_from_json(const json& j, const PublicFile& pk);

// Ground truth for scoring, kept apart from the ciphertext.
json truth_to_json(int bit);
int truth_from_json(const json& j);

struct ReportError {
  std::string kind;  // assumption, budget, refusal, ...
  std::string label;
  std::string message;
};
json report_to_json(const attack::AttackReport& r, std::optional<int> truth,
                    const std::optional<ReportError>& error);

json security_to_json(const scheme::SecurityReport& r);

// Throws SchemaError on unreadable or malformed files, or when "schema" is
// not `kind` (unless kind is empty).
json read_file(const std::filesystem::path& path, const std::string& kind = "");
void write_file(const std::filesystem::path& path, const json& j);

}  // namespace lhn::io
