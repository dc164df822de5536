#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "opial/distribution.hpp"
#include "opial/error.hpp"
#include "opial/node_function.hpp"

namespace opial::cli {

enum class Command { verify, oracle_diff, sharpness, converge, search };
enum class Format { json, csv };

std::string_view to_string(Command command);
std::optional<Command> parse_command(std::string_view text);

struct RunConfig {
  Command command = Command::verify;
  std::string dist_path;
  std::string psi_spec = "constant";
  std::string chi_spec = "constant";
  std::string functional = "thm1-lower";
  int n = 1;
  double c = std::numeric_limits<double>::quiet_NaN();
  std::size_t m = 64;
  std::vector<std::size_t> grids;  // converge; empty means 16,64,256,1024
  std::optional<double> tol;       // verify 1e-10, search 1e-9
  double oracle_tol = 1e-12;
  std::uint64_t seed = 1;
  std::string out_path;  // empty: stdout
  Format format = Format::json;

  // Extras beyond the core grammar.
  double p = 0.0;            // Troy exponent
  std::size_t k = 0;         // r4-split lower block size
  std::size_t trials = 1000;
  std::size_t m_max = 30;
  bool project_zero_mean = false;
};

/// Spec problem located by a JSON pointer (or "line:col" for syntax errors).
class SpecError : public InvalidArgument {
 public:
  SpecError(const std::string& where, const std::string& what)
      : InvalidArgument(where + ": " + what), where_(where) {}
  [[nodiscard]] const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Parses text as JSON, mapping syntax errors to SpecError("<origin>:line:col").
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

Distribution parse_distribution(const nlohmann::json& doc);
/// {"atoms": [[x, p], ...], "pieces": [{"lo", "hi", "mass"}, ...]} in sorted, merged form.
nlohmann::json canonical_json(const Distribution& dist);

NodeFunction parse_node_function(const nlohmann::json& doc, const std::string& pointer = "");
nlohmann::json to_json(const NodeFunction& fn);

/// A family name ("constant", "identity", "cos_pi_F"), inline JSON, or a file path.
NodeFunction load_node_function(const std::string& spec);

Distribution load_distribution(const std::string& path);

/// Oracle summand budget, honouring OPIAL_BUDGET.
std::uint64_t oracle_budget();

/// Executes one command. Returns 0 (verified), 2 (violation) or 1 (usage or
/// spec error). Reports go to config.out_path, written atomically, or to `out`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int main_entry(int argc, char** argv);

}  // namespace opial::cli
