#include "opial/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "opial/error.hpp"

namespace opial::oracle {

namespace {

std::uint64_t saturating_power(std::uint64_t base, int exponent) {
  std::uint64_t out = 1;
  for (int k = 0; k < exponent; ++k) {
    if (base != 0 && out > std::numeric_limits<std::uint64_t>::max() / base) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    out *= base;
  }
  return out;
}

void require_budget(std::uint64_t needed, std::uint64_t budget, std::string_view what) {
  if (needed > budget) {
    throw BudgetExceeded(std::string(what) + ": enumeration needs " + std::to_string(needed) +
                         " summands, budget is " + std::to_string(budget));
  }
}

void require_length(std::span<const double> values, std::size_t m, const char* what) {
  if (values.size() != m) {
    throw InvalidArgument(std::string("oracle: ") + what + " has " +
                          std::to_string(values.size()) + " values, expected " +
                          std::to_string(m));
  }
}

/// Indicator weight 1{y < x} + 1/2 1{y = x} (below) or its mirror (above).
double tie_weight(double y, double x, bool below) {
  if (y == x) return 0.5;
  return (below ? y < x : y > x) ? 1.0 : 0.0;
}

Terms opial_pairs(const QuantizedModel& model, std::span<const double> psi, bool below) {
  const auto x = model.support();
  const auto p = model.mass();
  const std::size_t m = model.size();
  Terms t;
  double middle = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double w = tie_weight(x[j], x[i], below);
      inner += p[j] * psi[j] * w;
      middle += p[i] * p[j] * std::abs(psi[i] * psi[j]) * w;
    }
    t.lhs += p[i] * std::abs(inner * psi[i]);
    t.rhs += 0.5 * p[i] * psi[i] * psi[i];
  }
  t.middle = middle;
  return t;
}

Terms corollary_pairs(const QuantizedModel& model, std::span<const double> psi, double c) {
  const auto x = model.support();
  const auto p = model.mass();
  const std::size_t m = model.size();
  double lower_mass = 0.0;
  double upper_mass = 0.0;
  for (std::size_t i = 0; i < m; ++i) (x[i] <= c ? lower_mass : upper_mass) += p[i];
  if (!(lower_mass > kProbabilityTolerance) || !(upper_mass > kProbabilityTolerance)) {
    throw PreconditionError("oracle corollary: P(X <= c) must lie strictly between 0 and 1");
  }

  Terms t;
  double middle = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const bool i_low = x[i] <= c;
    const double cond = i_low ? lower_mass : upper_mass;
    double inner = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if ((x[j] <= c) != i_low) continue;
      inner += p[j] / cond * psi[j] * tie_weight(x[j], x[i], i_low);
      // Both halves use the below-form indicator in the middle term.
      middle += p[i] / cond * p[j] / cond * std::abs(psi[i] * psi[j]) *
                tie_weight(x[j], x[i], true);
    }
    t.lhs += p[i] / cond * std::abs(inner * psi[i]);
    t.rhs += 0.5 * p[i] * psi[i] * psi[i] / cond;
  }
  t.middle = middle;
  return t;
}

Terms nested_tuples(const QuantizedModel& model, std::span<const double> psi, int n) {
  const auto x = model.support();
  const auto p = model.mass();
  const std::size_t m = model.size();
  Terms t;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  for (std::size_t outer = 0; outer < m; ++outer) {
    double inner = 0.0;
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      bool chain = true;
      double weight = 1.0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double next = k + 1 < idx.size() ? x[idx[k + 1]] : x[outer];
        chain = chain && x[idx[k]] < next;
        weight *= p[idx[k]];
      }
      if (chain) inner += weight * psi[idx[0]];
      std::size_t pos = 0;
      while (pos < idx.size() && ++idx[pos] == m) idx[pos++] = 0;
      if (pos == idx.size()) break;
    }
    t.lhs += p[outer] * std::abs(inner * psi[outer]);
  }
  double factorial = 1.0;
  for (int k = 2; k <= n + 1; ++k) factorial *= k;
  for (std::size_t i = 0; i < m; ++i) t.rhs += p[i] * psi[i] * psi[i];
  t.rhs /= factorial;
  return t;
}

Terms second_order_triples(const QuantizedModel& model, std::span<const double> psi) {
  const auto x = model.support();
  const auto p = model.mass();
  const std::size_t m = model.size();
  Terms t;
  double triple_tie = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        const double mass = p[i] * p[j] * p[k];
        const double term = mass * std::abs(psi[i]) * std::abs(psi[k]);
        if (x[i] < x[j] && x[j] < x[k]) t.lhs += 6.0 * term;
        if (x[i] == x[j] && x[j] < x[k]) t.lhs += 3.0 * term;
        if (x[i] < x[j] && x[j] == x[k]) t.lhs += 3.0 * term;
        if (x[i] == x[j] && x[j] == x[k]) triple_tie += mass * psi[i] * psi[k];
      }
    }
  }
  double second = 0.0;
  for (std::size_t i = 0; i < m; ++i) second += p[i] * psi[i] * psi[i];
  t.rhs = second - triple_tie;
  return t;
}

Terms weighted_pairs(const QuantizedModel& model, std::span<const double> psi,
                     std::span<const double> chi, bool below) {
  const auto x = model.support();
  const auto p = model.mass();
  const std::size_t m = model.size();
  Terms t;
  double middle = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double w = tie_weight(x[j], x[i], below);
      const double w_mirror = tie_weight(x[j], x[i], !below);
      inner += p[j] * psi[j] * w;
      middle += p[i] * p[j] * std::abs(psi[i] * psi[j]) * chi[i] * w;
      t.rhs += 0.5 * p[i] * p[j] * psi[i] * psi[i] * (chi[i] * w + chi[j] * w_mirror);
    }
    t.lhs += p[i] * std::abs(inner * psi[i]) * chi[i];
  }
  t.middle = middle;
  return t;
}

Terms wirtinger_pairs(const QuantizedModel& model, std::span<const double> psi) {
  const auto x = model.support();
  const auto p = model.mass();
  const std::size_t m = model.size();
  Terms t;
  for (std::size_t i = 0; i < m; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (x[j] < x[i]) inner += p[j] * psi[j];
    }
    t.lhs += p[i] * inner * inner;
    t.rhs += p[i] * psi[i] * psi[i] / (std::numbers::pi * std::numbers::pi);
  }
  return t;
}

}  // namespace

std::uint64_t summand_count(FunctionalId functional, std::size_t m, int n) {
  switch (functional) {
    case FunctionalId::thm2: return saturating_power(m, n + 1);
    case FunctionalId::thm3: return saturating_power(m, 3);
    default: return saturating_power(m, 2);
  }
}

Terms enumerate_functional(const QuantizedModel& model, const Request& request) {
  const std::size_t m = model.size();
  require_length(request.psi, m, "psi");
  if (request.functional == FunctionalId::thm2 && request.n < 1) {
    throw InvalidArgument("oracle: thm2 needs n >= 1");
  }
  require_budget(summand_count(request.functional, m, request.n), request.budget,
                 to_string(request.functional));

  switch (request.functional) {
    case FunctionalId::thm1_lower: return opial_pairs(model, request.psi, true);
    case FunctionalId::thm1_upper: return opial_pairs(model, request.psi, false);
    case FunctionalId::corollary:
      if (!std::isfinite(request.split)) throw InvalidArgument("oracle: corollary needs a split c");
      return corollary_pairs(model, request.psi, request.split);
    case FunctionalId::thm2: return nested_tuples(model, request.psi, request.n);
    case FunctionalId::thm3: return second_order_triples(model, request.psi);
    case FunctionalId::weighted_lower:
    case FunctionalId::weighted_upper:
      require_length(request.chi, m, "chi");
      return weighted_pairs(model, request.psi, request.chi,
                            request.functional == FunctionalId::weighted_lower);
    case FunctionalId::wirtinger: return wirtinger_pairs(model, request.psi);
    default:
      throw InvalidArgument("oracle: no enumeration for functional " +
                            std::string(to_string(request.functional)));
  }
}

PartitionMasses partition_masses(const QuantizedModel& model, std::uint64_t budget) {
  const std::size_t m = model.size();
  require_budget(saturating_power(m, 3), budget, "partition_masses");
  const auto x = model.support();
  const auto p = model.mass();
  PartitionMasses out;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        std::array<double, 3> v{x[i], x[j], x[k]};
        std::sort(v.begin(), v.end());
        const double mass = p[i] * p[j] * p[k];
        if (v[0] < v[1] && v[1] < v[2]) {
          out.u += mass;
        } else if (v[0] == v[1] && v[1] < v[2]) {
          out.v1 += mass;
        } else if (v[0] < v[1] && v[1] == v[2]) {
          out.v2 += mass;
        } else {
          out.w += mass;
        }
      }
    }
  }
  return out;
}

Two3Decomposition check_two3_decomposition(const QuantizedModel& model, std::span<const double> psi,
                                           double tol, std::uint64_t budget) {
  const std::size_t m = model.size();
  require_length(psi, m, "psi");
  require_budget(saturating_power(m, 3), budget, "check_two3_decomposition");
  const auto x = model.support();
  const auto p = model.mass();

  double u_ordered = 0.0;
  double v1_ordered = 0.0;
  double v2_ordered = 0.0;
  Two3Decomposition out;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < m; ++k) {
        const double term = p[i] * p[j] * p[k] * std::abs(psi[i] * psi[k]);
        const double x0 = x[i];
        const double x1 = x[j];
        const double x2 = x[k];
        if (x0 < x1 && x1 < x2) u_ordered += term;
        if (x0 == x1 && x1 < x2) v1_ordered += term;
        if (x0 < x1 && x1 == x2) v2_ordered += term;
        if (x0 == x1 && x1 == x2) out.w_addend += term;

        std::array<double, 3> v{x0, x1, x2};
        std::sort(v.begin(), v.end());
        if (v[0] < v[1] && v[1] < v[2]) {
          out.u_region += term;
        } else if (v[0] == v[1] && v[1] < v[2]) {
          out.v1_region += term;
        } else if (v[0] < v[1] && v[1] == v[2]) {
          out.v2_region += term;
        } else {
          out.w_region += term;
        }
      }
    }
  }
  out.u_addend = 6.0 * u_ordered;
  out.v1_addend = 3.0 * v1_ordered;
  out.v2_addend = 3.0 * v2_ordered;
  out.sum = out.u_addend + out.v1_addend + out.v2_addend + out.w_addend;

  double mean_abs = 0.0;
  for (std::size_t i = 0; i < m; ++i) mean_abs += p[i] * std::abs(psi[i]);
  out.target = mean_abs * mean_abs;
  out.rel_err = relative_difference(out.sum, out.target);
  out.reconstructs = out.rel_err <= tol;
  out.region_rel_err = relative_difference(
      out.u_region + out.v1_region + out.v2_region + out.w_region, out.target);
  return out;
}

double permutation_region_sum(const QuantizedModel& model, std::span<const double> psi,
                              std::span<const int> perm, bool permute_integrand,
                              std::uint64_t budget) {
  const std::size_t m = model.size();
  require_length(psi, m, "psi");
  const std::size_t arity = perm.size();
  if (arity < 2) throw InvalidArgument("permutation_region_sum: need at least two coordinates");
  std::vector<bool> seen(arity, false);
  for (int v : perm) {
    if (v < 0 || static_cast<std::size_t>(v) >= arity || seen[static_cast<std::size_t>(v)]) {
      throw InvalidArgument("permutation_region_sum: not a permutation of 0..n");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
  require_budget(saturating_power(m, static_cast<int>(arity)), budget, "permutation_region_sum");

  const auto x = model.support();
  const auto p = model.mass();
  std::vector<std::size_t> idx(arity, 0);
  double total = 0.0;
  while (true) {
    bool chain = true;
    for (std::size_t k = 0; k + 1 < arity; ++k) {
      chain = chain && x[idx[static_cast<std::size_t>(perm[k])]] <
                           x[idx[static_cast<std::size_t>(perm[k + 1])]];
    }
    if (chain) {
      double weight = 1.0;
      for (std::size_t k : idx) weight *= p[k];
      const std::size_t head = permute_integrand ? static_cast<std::size_t>(perm.front()) : 0;
      const std::size_t tail =
          permute_integrand ? static_cast<std::size_t>(perm.back()) : arity - 1;
      const double first = psi[idx[head]];
      const double last = psi[idx[tail]];
      total += weight * std::abs(first * last);
    }
    std::size_t pos = 0;
    while (pos < arity && ++idx[pos] == m) idx[pos++] = 0;
    if (pos == arity) break;
  }
  return total;
}

}  // namespace opial::oracle
