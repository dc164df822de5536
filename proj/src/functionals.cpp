#include "opial/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "opial/error.hpp"
#include "opial/summation.hpp"

namespace opial {

namespace {

void require_size(const QuantizedModel& model, std::span<const double> values, const char* what) {
  if (values.size() != model.size()) {
    throw InvalidArgument(std::string(what) + " has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(model.size()) + " (node count)");
  }
}

/// Visits node indices in the order the half-tie indicator accumulates:
/// ascending for below, descending for above.
template <typename Visit>
void for_each_node(std::size_t count, Direction direction, Visit&& visit) {
  if (direction == Direction::below) {
    for (std::size_t i = 0; i < count; ++i) visit(i);
  } else {
    for (std::size_t i = count; i-- > 0;) visit(i);
  }
}

Direction opposite(Direction direction) {
  return direction == Direction::below ? Direction::above : Direction::below;
}

double half_second_moment(std::span<const double> p, std::span<const double> psi) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] * psi[i] * psi[i];
  return 0.5 * sum.value();
}

/// Zero-sum test scaled by the L2 size of the sequence, so that it does not
/// depend on the units of psi.
bool is_centered(double mean, double second_moment, double tol) {
  return std::abs(mean) <= tol * std::max(1.0, std::sqrt(second_moment));
}

IneqReport corollary_from_halves(const QuantizedModel& lower, std::span<const double> psi_lower,
                                 const QuantizedModel& upper, std::span<const double> psi_upper,
                                 double p, std::size_t m, bool exact,
                                 const EvalOptions& options) {
  const IneqReport lo = opial_terms(lower, psi_lower, Direction::below, options);
  const IneqReport hi = opial_terms(upper, psi_upper, Direction::above, options);
  IneqReport report =
      make_report(FunctionalId::corollary, lo.lhs + hi.lhs, *lo.middle + *hi.middle,
                  lo.rhs + hi.rhs, m, exact, options.equality_tol);
  report.extra_terms = {{"p", p},
                        {"lhs_lower", lo.lhs},
                        {"lhs_upper", hi.lhs},
                        {"rhs_lower", lo.rhs},
                        {"rhs_upper", hi.rhs}};
  return report;
}

}  // namespace

std::vector<double> half_tie_transform(const QuantizedModel& model, std::span<const double> psi,
                                       Direction direction) {
  require_size(model, psi, "psi");
  const auto p = model.mass();
  std::vector<double> out(model.size());
  CompensatedSum run;
  for_each_node(model.size(), direction, [&](std::size_t i) {
    out[i] = run.value() + 0.5 * p[i] * psi[i];
    run += p[i] * psi[i];
  });
  return out;
}

IneqReport opial_terms(const QuantizedModel& model, std::span<const double> psi,
                       Direction direction, const EvalOptions& options) {
  const auto transform = half_tie_transform(model, psi, direction);
  const auto p = model.mass();

  CompensatedSum lhs;
  CompensatedSum middle;
  CompensatedSum run_abs;
  for_each_node(model.size(), direction, [&](std::size_t i) {
    const double a = std::abs(psi[i]);
    lhs += p[i] * std::abs(transform[i] * psi[i]);
    middle += p[i] * a * (run_abs.value() + 0.5 * p[i] * a);
    run_abs += p[i] * a;
  });

  const auto id =
      direction == Direction::below ? FunctionalId::thm1_lower : FunctionalId::thm1_upper;
  return make_report(id, lhs.value(), middle.value(), half_second_moment(p, psi),
                     model.source_m(), model.is_exact(), options.equality_tol);
}

IneqReport corollary_terms(const QuantizedModel& model, std::span<const double> psi, double c,
                           const EvalOptions& options) {
  require_size(model, psi, "psi");
  const auto support = model.support();
  const auto split = static_cast<std::size_t>(
      std::upper_bound(support.begin(), support.end(), c) - support.begin());
  const double p = model.cdf(c);
  if (split == 0 || split == model.size() || !(p > kProbabilityTolerance) ||
      !(p < 1.0 - kProbabilityTolerance)) {
    throw PreconditionError("corollary: P(X <= c) must lie strictly between 0 and 1");
  }
  const QuantizedModel lower = model.slice(0, split);
  const QuantizedModel upper = model.slice(split, model.size() - split);
  return corollary_from_halves(lower, psi.first(split), upper, psi.subspan(split), p,
                               model.source_m(), model.is_exact(), options);
}

IneqReport corollary_split(const Distribution& dist, const NodeFunction& psi, double c,
                           std::size_t m, const EvalOptions& options) {
  const auto [lower_law, p] = conditional_truncate(dist, c, Side::lower);
  const auto [upper_law, q] = conditional_truncate(dist, c, Side::upper);
  (void)q;
  const QuantizedModel lower = quantize(lower_law, m);
  const QuantizedModel upper = quantize(upper_law, m);
  const QuantizedModel joined = QuantizedModel::concatenate(lower, p, upper);
  const std::vector<double> values = resolve(psi, joined);
  const std::span<const double> all(values);
  return corollary_from_halves(lower, all.first(lower.size()), upper, all.subspan(lower.size()), p,
                               dist.has_pieces() ? m : 0, !dist.has_pieces(), options);
}

std::vector<double> nested_integral(const QuantizedModel& model, std::span<const double> psi, int n,
                                    const EvalOptions& options) {
  require_size(model, psi, "psi");
  if (n < 1) throw InvalidArgument("nested integral order n must be at least 1");
  if (n > options.max_order) {
    throw PreconditionError("nested integral order n=" + std::to_string(n) +
                            " exceeds the configured cap " + std::to_string(options.max_order));
  }
  const auto p = model.mass();
  std::vector<double> current(psi.begin(), psi.end());
  std::vector<double> next(model.size());
  for (int k = 0; k < n; ++k) {
    CompensatedSum run;
    for (std::size_t i = 0; i < model.size(); ++i) {
      next[i] = run.value();
      run += p[i] * current[i];
    }
    std::swap(current, next);
  }
  return current;
}

IneqReport theorem2_terms(const QuantizedModel& model, std::span<const double> psi, int n,
                          const EvalOptions& options) {
  const auto integral = nested_integral(model, psi, n, options);
  const auto p = model.mass();
  CompensatedSum lhs;
  for (std::size_t i = 0; i < model.size(); ++i) lhs += p[i] * std::abs(integral[i] * psi[i]);
  double factorial = 1.0;
  for (int k = 2; k <= n + 1; ++k) factorial *= k;
  IneqReport report =
      make_report(FunctionalId::thm2, lhs.value(), std::nullopt,
                  2.0 * half_second_moment(p, psi) / factorial, model.source_m(), model.is_exact(),
                  options.equality_tol);
  report.order = n;
  if (model.is_exact()) report.notes.emplace_back("atoms-force-strict");
  return report;
}

IneqReport theorem3_terms(const QuantizedModel& model, std::span<const double> psi,
                          const EvalOptions& options) {
  require_size(model, psi, "psi");
  const auto p = model.mass();
  // below_abs = sum_{k<i} p_k |psi_k|, j_value = sum_{j<i} p_j below_abs_j,
  // tie_sq = sum_{j<i} p_j^2 |psi_j|.
  CompensatedSum below_abs;
  CompensatedSum j_value;
  CompensatedSum tie_sq;
  CompensatedSum j_term;
  CompensatedSum jd_term;
  CompensatedSum rhs;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double a = std::abs(psi[i]);
    const double jd = tie_sq.value() + p[i] * below_abs.value();
    j_term += p[i] * j_value.value() * a;
    jd_term += p[i] * jd * a;
    rhs += p[i] * psi[i] * psi[i] * (1.0 - p[i] * p[i]);

    j_value += p[i] * below_abs.value();
    below_abs += p[i] * a;
    tie_sq += p[i] * p[i] * a;
  }
  IneqReport report =
      make_report(FunctionalId::thm3, 6.0 * j_term.value() + 3.0 * jd_term.value(), std::nullopt,
                  rhs.value(), model.source_m(), model.is_exact(), options.equality_tol);
  report.extra_terms = {{"j_term", 6.0 * j_term.value()}, {"jd_term", 3.0 * jd_term.value()}};
  return report;
}

IneqReport weighted_opial_terms(const QuantizedModel& model, std::span<const double> psi,
                                std::span<const double> chi, Direction direction,
                                const EvalOptions& options) {
  require_size(model, chi, "chi");
  for (double w : chi) {
    if (!(w >= 0.0)) throw InvalidArgument("weight chi must be nonnegative at every node");
  }
  const auto transform = half_tie_transform(model, psi, direction);
  const auto p = model.mass();
  const std::size_t count = model.size();

  // trailing[i] = sum over nodes after i (in accumulation order) of p chi,
  // plus half of node i's own p chi.
  std::vector<double> trailing(count);
  CompensatedSum after;
  for_each_node(count, opposite(direction), [&](std::size_t i) {
    trailing[i] = after.value() + 0.5 * p[i] * chi[i];
    after += p[i] * chi[i];
  });

  CompensatedSum lhs;
  CompensatedSum middle;
  CompensatedSum rhs;
  CompensatedSum monotone;
  CompensatedSum run_abs;
  CompensatedSum run_mass;
  for_each_node(count, direction, [&](std::size_t i) {
    const double a = std::abs(psi[i]);
    const double sq = psi[i] * psi[i];
    lhs += p[i] * std::abs(transform[i] * psi[i]) * chi[i];
    middle += p[i] * a * (run_abs.value() + 0.5 * p[i] * a) * chi[i];
    rhs += p[i] * sq * (chi[i] * (run_mass.value() + 0.5 * p[i]) + trailing[i]);
    monotone += p[i] * sq * chi[i];
    run_abs += p[i] * a;
    run_mass += p[i];
  });

  bool monotone_applies = true;
  for (std::size_t i = 1; i < count; ++i) {
    const bool ok = direction == Direction::below ? chi[i] <= chi[i - 1] : chi[i] >= chi[i - 1];
    monotone_applies = monotone_applies && ok;
  }

  const auto id =
      direction == Direction::below ? FunctionalId::weighted_lower : FunctionalId::weighted_upper;
  IneqReport report = make_report(id, lhs.value(), middle.value(), 0.5 * rhs.value(),
                                  model.source_m(), model.is_exact(), options.equality_tol);
  report.extra_terms = {{"monotone_bound", 0.5 * monotone.value()}};
  if (monotone_applies) report.notes.emplace_back("monotone-bound-applies");
  return report;
}

TroyComparison troy_comparison(double p_exp, const NodeFunction& psi, std::size_t m,
                               const EvalOptions& options) {
  if (!(p_exp > -1.0) || !std::isfinite(p_exp)) {
    throw PreconditionError("troy comparison needs exponent p > -1");
  }
  const QuantizedModel model = quantize(make_uniform_interval(0.0, 1.0), m);
  const std::vector<double> values = resolve(psi, model);
  std::vector<double> chi(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) chi[i] = std::pow(model.support()[i], p_exp);

  TroyComparison out;
  out.p_exp = p_exp;
  out.m = m;
  out.weighted = weighted_opial_terms(model, values, chi, Direction::below, options);
  out.our_lhs = out.weighted.lhs;
  out.our_middle = *out.weighted.middle;
  out.our_rhs = out.weighted.rhs;
  out.troy_rhs = 2.0 * half_second_moment(model.mass(), values) / (2.0 * std::sqrt(p_exp + 1.0));
  return out;
}

IneqReport troy_report(const TroyComparison& comparison, const EvalOptions& options) {
  IneqReport report = make_report(FunctionalId::troy, comparison.our_lhs, std::nullopt,
                                  comparison.troy_rhs, comparison.m, false, options.equality_tol);
  report.extra_terms = {{"p", comparison.p_exp}, {"sharp_rhs", comparison.our_rhs}};
  return report;
}

IneqReport wirtinger_terms(const QuantizedModel& model, std::span<const double> psi,
                           const EvalOptions& options) {
  require_size(model, psi, "psi");
  const auto p = model.mass();
  std::vector<double> values(psi.begin(), psi.end());

  CompensatedSum mean;
  for (std::size_t i = 0; i < values.size(); ++i) mean += p[i] * values[i];
  if (options.project_zero_mean) {
    const double shift = mean.value();
    for (double& v : values) v -= shift;
  } else if (!is_centered(mean.value(), 2.0 * half_second_moment(p, values),
                          options.zero_mean_tol)) {
    throw PreconditionError("wirtinger: E psi = " + std::to_string(mean.value()) +
                            " is not zero; pass the projection flag to center psi");
  }

  CompensatedSum run;
  CompensatedSum lhs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double s = run.value();
    lhs += p[i] * s * s;
    run += p[i] * values[i];
  }
  constexpr double kInvPiSquared = 1.0 / (std::numbers::pi * std::numbers::pi);
  IneqReport report = make_report(FunctionalId::wirtinger, lhs.value(), std::nullopt,
                                  2.0 * half_second_moment(p, values) * kInvPiSquared,
                                  model.source_m(), model.is_exact(), options.equality_tol);
  if (model.is_exact()) report.notes.emplace_back("heuristic");
  return report;
}

FunctionalId functional_of(DiscreteIdentity which) {
  switch (which) {
    case DiscreteIdentity::o9_1: return FunctionalId::o9_1;
    case DiscreteIdentity::o9_2: return FunctionalId::o9_2;
    case DiscreteIdentity::o15: return FunctionalId::o15;
    case DiscreteIdentity::o18: return FunctionalId::o18;
    case DiscreteIdentity::rtwo: return FunctionalId::rtwo;
    case DiscreteIdentity::r4_split: return FunctionalId::r4_split;
  }
  return FunctionalId::o9_1;
}

IneqReport discrete_identities(std::span<const double> a, DiscreteIdentity which,
                               const EvalOptions& options, std::size_t split) {
  const std::size_t n = a.size();
  if (n == 0) throw InvalidArgument("discrete identity needs at least one term");
  for (double v : a) {
    if (!std::isfinite(v)) throw InvalidArgument("discrete identity terms must be finite");
  }
  const double nd = static_cast<double>(n);

  CompensatedSum total;
  CompensatedSum squares;
  for (double v : a) {
    total += v;
    squares += v * v;
  }
  if ((which == DiscreteIdentity::o15 || which == DiscreteIdentity::o18) &&
      !is_centered(total.value() / nd, squares.value() / nd, options.zero_mean_tol)) {
    throw PreconditionError(std::string(to_string(functional_of(which))) +
                            " requires sum a_i = 0, got " + std::to_string(total.value()));
  }

  CompensatedSum lhs;
  double rhs = 0.0;
  switch (which) {
    case DiscreteIdentity::o9_1: {
      CompensatedSum prefix;
      for (double v : a) {
        prefix += v;
        lhs += std::abs(v * prefix.value());
      }
      rhs = 0.5 * (nd + 1.0) * squares.value();
      break;
    }
    case DiscreteIdentity::o9_2: {
      CompensatedSum prefix;
      for (double v : a) {
        prefix += std::abs(v);
        lhs += std::abs(v) * prefix.value();
      }
      rhs = 0.5 * (nd + 1.0) * squares.value();
      break;
    }
    case DiscreteIdentity::o15: {
      CompensatedSum prefix;
      for (double v : a) {
        lhs += std::abs(v * (prefix.value() + 0.5 * v));
        prefix += v;
      }
      rhs = 0.25 * nd * squares.value();
      break;
    }
    case DiscreteIdentity::o18: {
      CompensatedSum prefix;
      for (double v : a) {
        lhs += std::abs(v * prefix.value());
        prefix += v;
      }
      rhs = 0.5 * static_cast<double>((n + 1) / 2) * squares.value();
      break;
    }
    case DiscreteIdentity::rtwo: {
      // lagged = sum_{j<i} (i - j)|a_j|, advanced by the running sum of |a_j|.
      CompensatedSum prefix;
      CompensatedSum lagged;
      for (double v : a) {
        lagged += prefix.value();
        lhs += std::abs(v) * lagged.value();
        prefix += std::abs(v);
      }
      lhs = CompensatedSum(6.0 * lhs.value());
      rhs = (nd * nd - 1.0) * squares.value();
      break;
    }
    case DiscreteIdentity::r4_split: {
      if (split == 0 || split >= n) {
        throw PreconditionError("r4-split needs a block size K with 1 <= K < N");
      }
      const double k = static_cast<double>(split);
      const double rest = nd - k;
      CompensatedSum lower;
      CompensatedSum lower_sq;
      CompensatedSum prefix;
      for (std::size_t i = 0; i < split; ++i) {
        prefix += a[i];
        lower += std::abs(a[i] * (prefix.value() - 0.5 * a[i]));
        lower_sq += a[i] * a[i];
      }
      CompensatedSum upper;
      CompensatedSum upper_sq;
      CompensatedSum suffix;
      for (std::size_t i = n; i-- > split;) {
        upper += std::abs(a[i] * (suffix.value() + 0.5 * a[i]));
        suffix += a[i];
        upper_sq += a[i] * a[i];
      }
      lhs = CompensatedSum(lower.value() / (k * k) + upper.value() / (rest * rest));
      rhs = lower_sq.value() / (2.0 * k) + upper_sq.value() / (2.0 * rest);
      break;
    }
  }
  return make_report(functional_of(which), lhs.value(), std::nullopt, rhs, n, true,
                     options.equality_tol);
}

}  // namespace opial
