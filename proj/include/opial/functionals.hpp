#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "opial/distribution.hpp"
#include "opial/node_function.hpp"
#include "opial/report.hpp"

namespace opial {

/// Which side of the diagonal the half-tie indicator looks at:
/// below uses 1{y < x} + 1/2 1{y = x}, above uses 1{y > x} + 1/2 1{y = x}.
enum class Direction { below, above };

struct EvalOptions {
  double equality_tol = 1e-10;  // relative, see IneqReport::equality
  double zero_mean_tol = 1e-10;
  int max_order = 6;              // cap on n for the nested integral
  bool project_zero_mean = false; // Wirtinger: subtract the mean instead of failing
};

/// T_i = sum_{j<i} p_j psi_j + p_i psi_i / 2 (below), mirrored for above.
std::vector<double> half_tie_transform(const QuantizedModel& model, std::span<const double> psi,
                                       Direction direction);

/// lhs = E|T(X) psi(X)|, middle = E|psi(X) psi(Y)| {tie-weighted indicator},
/// rhs = E psi^2 / 2.
IneqReport opial_terms(const QuantizedModel& model, std::span<const double> psi,
                       Direction direction, const EvalOptions& options = {});

/// Two-sided split at c on an atomic model: below-form on X <= c plus
/// above-form on X > c, each under its conditional law.
IneqReport corollary_terms(const QuantizedModel& model, std::span<const double> psi, double c,
                           const EvalOptions& options = {});

/// Same split for a general distribution. Each conditional law is quantized
/// at resolution m; psi is resolved on the combined node set.
IneqReport corollary_split(const Distribution& dist, const NodeFunction& psi, double c,
                           std::size_t m, const EvalOptions& options = {});

/// n-fold nested integral over strictly ordered arguments (no tie weights).
std::vector<double> nested_integral(const QuantizedModel& model, std::span<const double> psi, int n,
                                    const EvalOptions& options = {});

/// E|I_n(X) psi(X)| against E psi^2 / (n+1)!.
IneqReport theorem2_terms(const QuantizedModel& model, std::span<const double> psi, int n,
                          const EvalOptions& options = {});

/// Atom-corrected second-order form:
/// 6 E[J(X)|psi(X)|] + 3 E[J_D(X)|psi(X)|] against E[psi^2 (1 - p(X)^2)].
IneqReport theorem3_terms(const QuantizedModel& model, std::span<const double> psi,
                          const EvalOptions& options = {});

/// Weighted chain with a nonnegative weight chi at the outer node. Also emits
/// monotone_bound = E[psi^2 chi] / 2, flagged applicable when chi is
/// nonincreasing (below) or nondecreasing (above).
IneqReport weighted_opial_terms(const QuantizedModel& model, std::span<const double> psi,
                                std::span<const double> chi, Direction direction,
                                const EvalOptions& options = {});

struct TroyComparison {
  double p_exp = 0.0;
  std::size_t m = 0;
  double our_lhs = 0.0;
  double our_middle = 0.0;
  double our_rhs = 0.0;
  double troy_rhs = 0.0;
  IneqReport weighted;  // the underlying weighted-lower report
};

/// F = uniform(0, 1) quantized at m, chi(x) = x^p_exp. Compares the weighted
/// bound with the closed-form constant 1 / (2 sqrt(p + 1)).
TroyComparison troy_comparison(double p_exp, const NodeFunction& psi, std::size_t m,
                               const EvalOptions& options = {});

/// Report view of a TroyComparison: lhs against the closed-form constant,
/// with the sharp weighted bound as an extra term.
IneqReport troy_report(const TroyComparison& comparison, const EvalOptions& options = {});

/// E[(sum_{y < X} p(y) psi(y))^2] against E psi^2 / pi^2, for E psi = 0.
IneqReport wirtinger_terms(const QuantizedModel& model, std::span<const double> psi,
                           const EvalOptions& options = {});

enum class DiscreteIdentity { o9_1, o9_2, o15, o18, rtwo, r4_split };

FunctionalId functional_of(DiscreteIdentity which);

/// Classical discrete forms evaluated literally on a sequence a_1..a_N.
/// r4_split needs 1 <= split < N (the lower block size K).
IneqReport discrete_identities(std::span<const double> a, DiscreteIdentity which,
                               const EvalOptions& options = {}, std::size_t split = 0);

}  // namespace opial
