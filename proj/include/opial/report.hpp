#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace opial {

enum class FunctionalId {
  thm1_lower,
  thm1_upper,
  corollary,
  thm2,
  thm3,
  weighted_lower,
  weighted_upper,
  wirtinger,
  o9_1,
  o9_2,
  o15,
  o18,
  rtwo,
  r4_split,
  troy,
};

/// Stable external name ("thm1-lower", "o9-2", ...).
std::string_view to_string(FunctionalId id);
std::optional<FunctionalId> parse_functional_id(std::string_view text);
std::vector<FunctionalId> all_functional_ids();

/// One evaluated inequality instance lhs <= [middle <=] rhs.
struct IneqReport {
  FunctionalId functional = FunctionalId::thm1_lower;
  int order = 0;  // n for thm2, 0 otherwise
  double lhs = 0.0;
  std::optional<double> middle;
  double rhs = 0.0;
  std::vector<std::pair<std::string, double>> extra_terms;
  double slack = 0.0;  // rhs - tightest_lhs()
  double ratio = 0.0;  // tightest_lhs() / rhs, 0 when rhs == 0
  bool equality = false;
  std::size_t m = 0;
  bool exact = true;
  double tolerance = 1e-10;
  std::vector<std::string> notes;

  /// The term closest to rhs: middle when the chain has one, else lhs.
  [[nodiscard]] double tightest_lhs() const noexcept { return middle.value_or(lhs); }

  /// Every link of the chain holds up to `rel_tol` relative to the larger side.
  [[nodiscard]] bool holds(double rel_tol) const noexcept;

  [[nodiscard]] bool has_note(std::string_view note) const;
};

/// Fills slack, ratio and the equality flag from the terms.
IneqReport make_report(FunctionalId id, double lhs, std::optional<double> middle, double rhs,
                       std::size_t m, bool exact, double equality_tol);

nlohmann::json to_json(const IneqReport& report);

/// Relative difference |a - b| / max(|a|, |b|); 0 when a == b.
double relative_difference(double a, double b) noexcept;

}  // namespace opial
