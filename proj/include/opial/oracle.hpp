#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "opial/distribution.hpp"
#include "opial/report.hpp"

namespace opial::oracle {

/// Default cap on summand evaluations per enumeration.
inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

struct Request {
  FunctionalId functional = FunctionalId::thm1_lower;
  std::span<const double> psi;
  std::span<const double> chi;  // weighted functionals only
  int n = 1;                    // thm2 only
  double split = std::numeric_limits<double>::quiet_NaN();  // corollary only
  std::uint64_t budget = kDefaultBudget;
};

struct Terms {
  double lhs = 0.0;
  std::optional<double> middle;
  double rhs = 0.0;
};

/// Literal summation over all index tuples with indicator weights. Supports
/// thm1-lower/upper, corollary, thm2, thm3, weighted-lower/upper and wirtinger.
/// Shares no code with the fast evaluators.
Terms enumerate_functional(const QuantizedModel& model, const Request& request);

/// Probability masses of the order regions of R^3 under F x F x F.
struct PartitionMasses {
  double u = 0.0;   // all three coordinates distinct
  double v1 = 0.0;  // two smallest tie, third strictly larger
  double v2 = 0.0;  // smallest strictly below a tied pair
  double w = 0.0;   // all equal
};

PartitionMasses partition_masses(const QuantizedModel& model,
                                 std::uint64_t budget = kDefaultBudget);

/// Addends of the second-order decomposition of (E|psi|)^2, integrand
/// |psi(x0) psi(x2)| over triples (x0, x1, x2).
struct Two3Decomposition {
  // Single representative region per class, weighted by the class size.
  double u_addend = 0.0;   // 6 * integral over x0 < x1 < x2
  double v1_addend = 0.0;  // 3 * integral over x0 = x1 < x2
  double v2_addend = 0.0;  // 3 * integral over x0 < x1 = x2
  double w_addend = 0.0;   // integral over x0 = x1 = x2
  double sum = 0.0;        // of the four addends above
  double target = 0.0;     // (E|psi|)^2
  double rel_err = 0.0;    // relative_difference(sum, target)
  bool reconstructs = false;

  // Integrals over the full unions U3, V1, V2, W; these always add up to
  // the target.
  double u_region = 0.0;
  double v1_region = 0.0;
  double v2_region = 0.0;
  double w_region = 0.0;
  double region_rel_err = 0.0;
};

Two3Decomposition check_two3_decomposition(const QuantizedModel& model, std::span<const double> psi,
                                           double tol = 1e-12,
                                           std::uint64_t budget = kDefaultBudget);

/// Sum over tuples with x_{perm[0]} < ... < x_{perm[n]} of the tuple mass
/// times |psi(x_{perm[0]}) psi(x_{perm[n]})| (permute_integrand) or times the
/// fixed-coordinate integrand |psi(x_0) psi(x_n)|.
double permutation_region_sum(const QuantizedModel& model, std::span<const double> psi,
                              std::span<const int> perm, bool permute_integrand = true,
                              std::uint64_t budget = kDefaultBudget);

/// Number of summands an enumeration of `functional` on m nodes evaluates.
std::uint64_t summand_count(FunctionalId functional, std::size_t m, int n = 1);

}  // namespace opial::oracle
