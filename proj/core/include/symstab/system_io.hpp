#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "symstab/phase_space.hpp"

namespace symstab {

/// Load failure anchored to a line of the system file. Parse-kind errors
/// are malformed input; validation-kind errors are well-formed files whose
/// contents fail an invariant (Jacobi, equivariance, ...).
class LoadError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation };

  LoadError(std::string origin, int line, std::string message,
            std::vector<CheckResult> checks = {}, Kind kind = Kind::Parse)
      : std::runtime_error(origin + ":" + std::to_string(line) + ": " + message),
        origin_(std::move(origin)),
        line_(line),
        detail_(std::move(message)),
        checks_(std::move(checks)),
        kind_(kind) {}

  const std::string& origin() const { return origin_; }
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }
  /// Validator results when the file parsed but failed validation.
  const std::vector<CheckResult>& checks() const { return checks_; }
  bool validation() const { return kind_ == Kind::Validation; }

 private:
  std::string origin_;
  int line_;
  std::string detail_;
  std::vector<CheckResult> checks_;
  Kind kind_;
};

struct LoadedSystem {
  SystemDef system;
  std::string canonical_text;  // normalized form: whitespace/comments/order erased
  std::uint64_t digest = 0;    // FNV-1a 64 over canonical_text
  std::string origin;
};

LoadedSystem load_system_text(std::string_view text, std::string origin = "<memory>");
LoadedSystem load_system_file(const std::filesystem::path& path);

std::string digest_hex(std::uint64_t digest);

/// Bundled example systems (EX16, SO3-oscillator, trivial-oscillator).
const std::vector<std::string>& builtin_system_names();
bool is_builtin_system(std::string_view name);
/// Full system-file text; throws std::invalid_argument for unknown names.
std::string builtin_system_text(std::string_view name);
LoadedSystem builtin_system(std::string_view name);

}  // namespace symstab
