#include "opial/sharpness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "opial/error.hpp"
#include "opial/summation.hpp"

namespace opial::sharpness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double opial_ratio(const QuantizedModel& model, std::span<const double> psi, Direction direction) {
  const IneqReport report = opial_terms(model, psi, direction);
  return report.rhs == 0.0 ? 0.0 : *report.middle / report.rhs;
}

double weighted_norm(std::span<const double> p, std::span<const double> v) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < v.size(); ++i) sum += p[i] * v[i] * v[i];
  return std::sqrt(sum.value());
}

double weighted_mean(std::span<const double> p, std::span<const double> v) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < v.size(); ++i) sum += p[i] * v[i];
  return sum.value();
}

void center(std::span<const double> p, std::vector<double>& v) {
  const double mean = weighted_mean(p, v);
  for (double& x : v) x -= mean;
}

void normalize(std::span<const double> p, std::vector<double>& v) {
  const double norm = weighted_norm(p, v);
  for (double& x : v) x /= norm;
}

double relative_spread(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0.0 ? *hi / *lo - 1.0 : std::numeric_limits<double>::infinity();
}

/// y = D^{-1} M psi, plus the Rayleigh numerator sum p s^2 on the side.
/// s = strict prefix of p psi, y_j = sum_{i>j} p_i s_i.
double apply_wirtinger_operator(std::span<const double> p, std::span<const double> psi,
                                std::vector<double>& y) {
  const std::size_t m = p.size();
  std::vector<double> s(m);
  CompensatedSum run;
  CompensatedSum numerator;
  for (std::size_t i = 0; i < m; ++i) {
    s[i] = run.value();
    numerator += p[i] * s[i] * s[i];
    run += p[i] * psi[i];
  }
  CompensatedSum tail;
  for (std::size_t j = m; j-- > 0;) {
    y[j] = tail.value();
    tail += p[j] * s[j];
  }
  return numerator.value();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string number_list(std::span<const double> values) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  return os.str();
}

}  // namespace

ExtremalResult maximize_ratio_opial(const QuantizedModel& model, Direction direction,
                                    const AscentOptions& options, std::span<const double> start) {
  const auto p = model.mass();
  const std::size_t m = model.size();
  std::vector<double> psi(m);
  if (!start.empty()) {
    if (start.size() != m) throw InvalidArgument("maximize_ratio_opial: start has wrong length");
    std::transform(start.begin(), start.end(), psi.begin(), [](double v) { return std::abs(v); });
    if (std::all_of(psi.begin(), psi.end(), [](double v) { return v == 0.0; })) {
      throw InvalidArgument("maximize_ratio_opial: start vector is zero");
    }
  } else {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> draw(0.1, 1.1);
    for (double& v : psi) v = draw(rng);
  }
  normalize(p, psi);

  ExtremalResult result;
  double ratio = opial_ratio(model, psi, direction);
  result.trace.emplace_back(0, ratio);

  // first = sum p psi, second = sum p psi^2 over all nodes.
  for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    if (m == 1 || relative_spread(psi) <= options.spread_tol) {
      result.converged = true;
      break;
    }
    std::vector<double> candidate = psi;
    double first = weighted_mean(p, candidate);
    double second = weighted_norm(p, candidate);
    second *= second;
    for (std::size_t i = 0; i < m; ++i) {
      const double others_first = first - p[i] * candidate[i];
      const double others_second = second - p[i] * candidate[i] * candidate[i];
      if (!(others_first > 0.0) || !(others_second > 0.0)) continue;
      // (a + p t)^2 / (b + p t^2) peaks at t = b / a.
      const double t = others_second / others_first;
      first = others_first + p[i] * t;
      second = others_second + p[i] * t * t;
      candidate[i] = t;
    }
    normalize(p, candidate);
    const double next = opial_ratio(model, candidate, direction);
    result.iterations = sweep;
    if (!(next >= ratio)) {
      // No improving step left at working precision.
      result.converged = true;
      break;
    }
    const bool stalled = next == ratio;
    psi = std::move(candidate);
    ratio = next;
    result.trace.emplace_back(sweep, ratio);
    if (stalled) {
      result.converged = true;
      break;
    }
  }
  result.psi_star = std::move(psi);
  result.ratio_star = ratio;
  return result;
}

WirtingerConstant wirtinger_best_constant(const QuantizedModel& model, const PowerOptions& options) {
  const std::size_t m = model.size();
  if (m < 2) throw PreconditionError("wirtinger_best_constant: need at least two nodes");
  const auto p = model.mass();

  WirtingerConstant out;
  std::vector<double> y(m);
  if (m == 2) {
    // The zero-mean subspace is spanned by (p_2, -p_1).
    std::vector<double> psi{p[1], -p[0]};
    normalize(p, psi);
    out.c_m = apply_wirtinger_operator(p, psi, y);
    out.extremal.psi_star = std::move(psi);
    out.extremal.ratio_star = out.c_m;
    out.extremal.converged = true;
    out.extremal.trace.emplace_back(0, out.c_m);
    return out;
  }

  std::vector<double> psi = model.midpoint_cdf();
  center(p, psi);
  normalize(p, psi);

  double best = -1.0;
  double previous = kNaN;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const double lambda = apply_wirtinger_operator(p, psi, y);  // E psi^2 == 1

    // Residual of (M - lambda D) psi, projected onto the zero-mean dual space.
    std::vector<double> r(m);
    CompensatedSum r_total;
    for (std::size_t j = 0; j < m; ++j) {
      r[j] = p[j] * (y[j] - lambda * psi[j]);
      r_total += r[j];
    }
    double r_norm = 0.0;
    double d_norm = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double rj = r[j] - p[j] * r_total.value();
      r_norm += rj * rj;
      d_norm += p[j] * psi[j] * p[j] * psi[j];
    }
    const double residual = std::sqrt(r_norm) / std::sqrt(d_norm);

    best = std::max(best, lambda);
    out.extremal.trace.emplace_back(it, best);
    out.extremal.iterations = it;
    if (lambda >= best) {
      out.extremal.psi_star = psi;
      out.residual = residual;
    }
    const bool settled =
        std::isfinite(previous) && std::abs(lambda - previous) <= options.ratio_tol * lambda;
    if (settled && residual <= options.residual_tol) {
      out.extremal.converged = true;
      break;
    }
    previous = lambda;

    psi = y;
    center(p, psi);
    normalize(p, psi);
  }
  if (!out.extremal.converged) {
    throw ConvergenceError("wirtinger_best_constant: no convergence after " +
                           std::to_string(options.max_iterations) + " iterations");
  }
  out.c_m = best;
  out.extremal.ratio_star = best;
  return out;
}

WirtingerConstant wirtinger_best_constant(std::size_t m, const PowerOptions& options) {
  if (m < 2) throw PreconditionError("wirtinger_best_constant: need m >= 2");
  return wirtinger_best_constant(quantize(make_uniform_interval(0.0, 1.0), m), options);
}

ConvergenceTable convergence_study(FunctionalId functional, int n, std::span<const std::size_t> grids,
                                   const EvalOptions& options) {
  if (grids.empty()) throw InvalidArgument("convergence_study: empty grid list");
  for (std::size_t k = 0; k < grids.size(); ++k) {
    if (grids[k] == 0 || (k > 0 && grids[k] <= grids[k - 1])) {
      throw InvalidArgument("convergence_study: grids must be positive and strictly increasing");
    }
  }

  ConvergenceTable table;
  table.functional = functional;
  table.n = functional == FunctionalId::thm2 ? n : 0;
  table.target = 1.0;
  if (functional == FunctionalId::wirtinger) {
    table.target = 1.0 / (std::numbers::pi * std::numbers::pi);
  }

  const Distribution uniform = make_uniform_interval(0.0, 1.0);
  for (std::size_t m : grids) {
    ConvergenceRow row;
    row.m = m;
    const QuantizedModel model = quantize(uniform, m);
    const std::vector<double> ones(model.size(), 1.0);
    switch (functional) {
      case FunctionalId::thm1_lower: row.value = opial_terms(model, ones, Direction::below, options).ratio; break;
      case FunctionalId::thm1_upper: row.value = opial_terms(model, ones, Direction::above, options).ratio; break;
      case FunctionalId::corollary:
        row.value = corollary_split(uniform, NodeFunction::constant(), 0.5, m, options).ratio;
        break;
      case FunctionalId::thm2: {
        const IneqReport report = theorem2_terms(model, ones, n, options);
        double factorial = 1.0;
        for (int k = 2; k <= n + 1; ++k) factorial *= k;
        row.value = report.lhs * factorial;
        break;
      }
      case FunctionalId::thm3: row.value = theorem3_terms(model, ones, options).ratio; break;
      case FunctionalId::wirtinger: row.value = wirtinger_best_constant(m).c_m; break;
      default:
        throw InvalidArgument("convergence_study: unsupported functional " +
                              std::string(to_string(functional)));
    }
    row.error = std::abs(row.value - table.target);
    row.local_order = kNaN;
    if (!table.rows.empty()) {
      const ConvergenceRow& prev = table.rows.back();
      if (prev.error > 0.0 && row.error > 0.0) {
        row.local_order = std::log(prev.error / row.error) /
                          std::log(static_cast<double>(m) / static_cast<double>(prev.m));
      }
    }
    table.rows.push_back(row);
  }

  // Least-squares slope of -log(error) against log(m).
  std::vector<std::pair<double, double>> points;
  for (const auto& row : table.rows) {
    if (row.error > 0.0) points.emplace_back(std::log(static_cast<double>(row.m)), -std::log(row.error));
  }
  table.fitted_order = kNaN;
  if (points.size() >= 2) {
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : points) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto& [x, y] : points) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    table.fitted_order = sxy / sxx;
  }
  return table;
}

nlohmann::json to_json(const ConvergenceTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"m", row.m},
                    {"value", row.value},
                    {"error", row.error},
                    {"local_order", row.local_order}});
  }
  nlohmann::json out;
  out["functional"] = std::string(to_string(table.functional));
  if (table.functional == FunctionalId::thm2) out["n"] = table.n;
  out["target"] = table.target;
  out["rows"] = std::move(rows);
  out["fitted_order"] = table.fitted_order;
  return out;
}

std::string to_csv(const ConvergenceTable& table) {
  std::ostringstream os;
  os.precision(17);
  os << "m,value,error,fitted_order\n";
  for (const auto& row : table.rows) {
    os << row.m << ',' << row.value << ',' << row.error << ',';
    if (std::isfinite(row.local_order)) os << row.local_order;
    os << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const ExtremalResult& result) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& [it, ratio] : result.trace) trace.push_back({it, ratio});
  return {{"psi_star", result.psi_star},
          {"ratio_star", result.ratio_star},
          {"iterations", result.iterations},
          {"converged", result.converged},
          {"trace", std::move(trace)}};
}

Instance random_instance(FunctionalId functional, const SearchOptions& options, std::size_t trial) {
  if (options.m_max == 0) throw InvalidArgument("search: m_max must be positive");
  std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(trial)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  const bool needs_split = functional == FunctionalId::corollary ||
                           functional == FunctionalId::r4_split;
  const std::size_t m_min = needs_split ? 2 : 1;
  if (options.m_max < m_min) throw InvalidArgument("search: m_max too small for this functional");
  std::uniform_int_distribution<std::size_t> size_draw(m_min, options.m_max);

  Instance inst;
  inst.trial = trial;
  const std::size_t m = size_draw(rng);
  inst.support.resize(m);
  inst.mass.resize(m);
  double x = normal(rng);
  for (std::size_t i = 0; i < m; ++i) {
    inst.support[i] = x;
    x += 1e-3 + expo(rng);
  }
  double total = 0.0;
  for (double& w : inst.mass) {
    w = 1e-9 + expo(rng);
    total += w;
  }
  for (double& w : inst.mass) w /= total;

  inst.psi.resize(m);
  for (double& v : inst.psi) v = normal(rng);
  inst.chi.resize(m);
  for (double& v : inst.chi) v = expo(rng);

  if (needs_split) {
    std::uniform_int_distribution<std::size_t> cut(0, m - 2);
    const std::size_t k = cut(rng);
    inst.split = inst.support[k];
    inst.block = k + 1;
  }
  inst.n = options.n > 0 ? options.n : static_cast<int>(trial % 3) + 1;
  return inst;
}

IneqReport evaluate_instance(FunctionalId functional, const Instance& inst, const EvalOptions& eval) {
  const QuantizedModel model = QuantizedModel::from_atoms(inst.support, inst.mass);
  switch (functional) {
    case FunctionalId::thm1_lower: return opial_terms(model, inst.psi, Direction::below, eval);
    case FunctionalId::thm1_upper: return opial_terms(model, inst.psi, Direction::above, eval);
    case FunctionalId::corollary: return corollary_terms(model, inst.psi, inst.split, eval);
    case FunctionalId::thm2: return theorem2_terms(model, inst.psi, inst.n, eval);
    case FunctionalId::thm3: return theorem3_terms(model, inst.psi, eval);
    case FunctionalId::weighted_lower:
      return weighted_opial_terms(model, inst.psi, inst.chi, Direction::below, eval);
    case FunctionalId::weighted_upper:
      return weighted_opial_terms(model, inst.psi, inst.chi, Direction::above, eval);
    case FunctionalId::wirtinger: {
      EvalOptions projected = eval;
      projected.project_zero_mean = true;
      return wirtinger_terms(model, inst.psi, projected);
    }
    case FunctionalId::o9_1: return discrete_identities(inst.psi, DiscreteIdentity::o9_1, eval);
    case FunctionalId::o9_2: return discrete_identities(inst.psi, DiscreteIdentity::o9_2, eval);
    case FunctionalId::rtwo: return discrete_identities(inst.psi, DiscreteIdentity::rtwo, eval);
    case FunctionalId::r4_split:
      return discrete_identities(inst.psi, DiscreteIdentity::r4_split, eval, inst.block);
    case FunctionalId::o15:
    case FunctionalId::o18: {
      std::vector<double> a = inst.psi;
      const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
      for (double& v : a) v -= mean;
      const auto which =
          functional == FunctionalId::o15 ? DiscreteIdentity::o15 : DiscreteIdentity::o18;
      return discrete_identities(a, which, eval);
    }
    case FunctionalId::troy:
      break;
  }
  throw InvalidArgument("search: no random instance class for functional " +
                        std::string(to_string(functional)));
}

SearchResult search_counterexample(FunctionalId functional, const SearchOptions& options,
                                   const EvalOptions& eval) {
  SearchResult result;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const Instance inst = random_instance(functional, options, trial);
    IneqReport report = evaluate_instance(functional, inst, eval);
    result.trials_run = trial + 1;
    if (!report.holds(options.tol)) {
      Counterexample found;
      found.heuristic = report.has_note("heuristic");
      found.instance = inst;
      found.report = std::move(report);
      result.counterexample = std::move(found);
      break;
    }
  }
  return result;
}

nlohmann::json to_json(const Instance& instance) {
  nlohmann::json out{{"trial", instance.trial},
                     {"support", instance.support},
                     {"mass", instance.mass},
                     {"psi", instance.psi},
                     {"chi", instance.chi},
                     {"split", instance.split},
                     {"block", instance.block},
                     {"n", instance.n}};
  out["summary"] = number_list(instance.psi);
  return out;
}

}  // namespace opial::sharpness
