#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "opial/distribution.hpp"
#include "opial/functionals.hpp"
#include "opial/report.hpp"

namespace opial::sharpness {

struct ExtremalResult {
  std::vector<double> psi_star;
  double ratio_star = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::pair<std::size_t, double>> trace;  // (iteration, ratio), nondecreasing
};

struct AscentOptions {
  std::size_t max_sweeps = 100'000;
  double spread_tol = 1e-12;  // stop once max/min - 1 falls below this
  std::uint64_t seed = 1;
};

/// Maximizes middle/rhs of the first-order chain over psi. The objective
/// depends on |psi| only, so the search runs on the positive cone with
/// E psi^2 = 1, one exact coordinate maximization at a time.
ExtremalResult maximize_ratio_opial(const QuantizedModel& model, Direction direction,
                                    const AscentOptions& options = {},
                                    std::span<const double> start = {});

struct PowerOptions {
  std::size_t max_iterations = 100'000;
  double ratio_tol = 1e-12;     // relative change of the Rayleigh quotient
  double residual_tol = 1e-10;  // relative to ||D psi||
};

struct WirtingerConstant {
  double c_m = 0.0;
  double residual = 0.0;  // ||(M - c_m D) psi*|| on the zero-mean subspace / ||D psi*||
  ExtremalResult extremal;
};

/// Largest value of E[(sum_{y<X} p(y) psi(y))^2] / E psi^2 over E psi = 0,
/// i.e. the top eigenvalue of M psi = c D psi with D = diag(p), M = A^T D A
/// and A the strict cumulative operator, restricted to p^T psi = 0.
WirtingerConstant wirtinger_best_constant(const QuantizedModel& model,
                                          const PowerOptions& options = {});

/// Same for uniform(0, 1) quantized at m.
WirtingerConstant wirtinger_best_constant(std::size_t m, const PowerOptions& options = {});

struct ConvergenceRow {
  std::size_t m = 0;
  double value = 0.0;
  double error = 0.0;
  double local_order = 0.0;  // NaN on the first row or when an error is 0
};

struct ConvergenceTable {
  FunctionalId functional = FunctionalId::thm2;
  int n = 0;
  double target = 0.0;
  std::vector<ConvergenceRow> rows;
  double fitted_order = 0.0;  // least-squares slope of -log(error) on log(m)
};

/// Refinement study on uniform(0, 1) with psi = 1 (thm1-*, corollary, thm2,
/// thm3) or the best zero-mean psi (wirtinger).
ConvergenceTable convergence_study(FunctionalId functional, int n, std::span<const std::size_t> grids,
                                   const EvalOptions& options = {});

nlohmann::json to_json(const ConvergenceTable& table);
std::string to_csv(const ConvergenceTable& table);
nlohmann::json to_json(const ExtremalResult& result);

struct SearchOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::size_t m_max = 30;
  double tol = 1e-9;  // relative violation threshold
  int n = 0;          // thm2 order; 0 cycles through 1, 2, 3
};

struct Instance {
  std::size_t trial = 0;
  std::vector<double> support;
  std::vector<double> mass;
  std::vector<double> psi;
  std::vector<double> chi;
  double split = 0.0;
  std::size_t block = 0;
  int n = 0;
};

struct Counterexample {
  Instance instance;
  IneqReport report;
  bool heuristic = false;  // out-of-class input (Wirtinger on atoms)
};

struct SearchResult {
  std::size_t trials_run = 0;
  std::optional<Counterexample> counterexample;
};

/// Random instances for one functional; stops at the first report whose chain
/// fails by more than tol (relative). Trial seeds derive from the master seed.
SearchResult search_counterexample(FunctionalId functional, const SearchOptions& options,
                                   const EvalOptions& eval = {});

/// Evaluates `functional` on a generated instance.
IneqReport evaluate_instance(FunctionalId functional, const Instance& instance,
                             const EvalOptions& eval = {});

/// Deterministic random instance for trial `trial`.
Instance random_instance(FunctionalId functional, const SearchOptions& options, std::size_t trial);

nlohmann::json to_json(const Instance& instance);

}  // namespace opial::sharpness
