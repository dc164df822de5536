#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace opial {

/// Absolute tolerance for every probability comparison (total mass, split
/// probabilities). Support comparisons are exact.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Default cap on QuantizedModel node count.
inline constexpr std::size_t kDefaultNodeLimit = 50'000'000;

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

/// Uniform density mass/(hi - lo) on the open interval (lo, hi).
struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.0;
};

/// A probability law on the real line made of point masses and
/// piecewise-uniform densities.
///
/// Construction validates: nonnegative masses, total mass 1 within
/// kProbabilityTolerance, lo < hi for every piece, pairwise disjoint pieces
/// (shared endpoints allowed) and no atom strictly inside a piece. Atoms are
/// stored sorted with duplicate locations merged; pieces are stored sorted.
class Distribution {
 public:
  static Distribution create(std::vector<Atom> atoms, std::vector<Piece> pieces);

  [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
  [[nodiscard]] std::span<const Piece> pieces() const noexcept { return pieces_; }
  [[nodiscard]] bool has_pieces() const noexcept { return !pieces_.empty(); }

  /// P(X <= x)
  [[nodiscard]] double cdf(double x) const;
  /// P(X < x)
  [[nodiscard]] double left_cdf(double x) const;
  /// P(X = x)
  [[nodiscard]] double point_mass(double x) const;

 private:
  Distribution(std::vector<Atom> atoms, std::vector<Piece> pieces)
      : atoms_(std::move(atoms)), pieces_(std::move(pieces)) {}

  double continuous_mass_below(double x) const;

  std::vector<Atom> atoms_;
  std::vector<Piece> pieces_;
};

/// Atomic distribution; duplicate points have their masses merged.
Distribution make_discrete(std::span<const double> points, std::span<const double> probs);

/// Uniform on {1, ..., n}.
Distribution make_uniform_discrete(std::size_t n);

/// Uniform density on (a, b).
Distribution make_uniform_interval(double a, double b);

/// Pure-atom form every evaluator runs on.
///
/// support is strictly increasing, every mass is positive and the masses sum
/// to 1 within kProbabilityTolerance. is_exact is true when the source had no
/// continuous part, so evaluations carry no discretization error.
class QuantizedModel {
 public:
  /// Validating constructor for pure-atom models built by hand or by tests.
  static QuantizedModel from_atoms(std::vector<double> support, std::vector<double> mass);

  [[nodiscard]] std::size_t size() const noexcept { return support_.size(); }
  [[nodiscard]] std::span<const double> support() const noexcept { return support_; }
  [[nodiscard]] std::span<const double> mass() const noexcept { return mass_; }
  [[nodiscard]] bool is_exact() const noexcept { return is_exact_; }
  /// Atomization resolution used for continuous pieces (0 when exact).
  [[nodiscard]] std::size_t source_m() const noexcept { return source_m_; }

  /// Midpoint CDF F(x-) + p(x)/2 at every node.
  [[nodiscard]] std::vector<double> midpoint_cdf() const;

  /// Cumulative mass P(X <= x) of the atomic model.
  [[nodiscard]] double cdf(double x) const;

  /// Conditional model on nodes [first, first + count), masses renormalized.
  /// Keeps the exactness flag and resolution of the parent.
  [[nodiscard]] QuantizedModel slice(std::size_t first, std::size_t count) const;

  /// weight * lower + (1 - weight) * upper, where every node of `lower` lies
  /// strictly left of every node of `upper`.
  static QuantizedModel concatenate(const QuantizedModel& lower, double weight,
                                    const QuantizedModel& upper);

  /// Image under x -> alpha x + beta, alpha > 0. Masses are untouched.
  [[nodiscard]] QuantizedModel affine(double alpha, double beta) const;

 private:
  friend QuantizedModel quantize(const Distribution&, std::size_t, std::size_t);

  QuantizedModel(std::vector<double> support, std::vector<double> mass, bool exact,
                 std::size_t source_m);

  std::vector<double> support_;
  std::vector<double> mass_;
  bool is_exact_ = true;
  std::size_t source_m_ = 0;
};

/// Replace every piece of mass w by m atoms of mass w/m at the conditional
/// quantile midpoints lo + (hi - lo)(k - 1/2)/m. Atoms pass through.
QuantizedModel quantize(const Distribution& dist, std::size_t m,
                        std::size_t node_limit = kDefaultNodeLimit);

enum class Side { lower, upper };

/// Conditional law of X given X <= c (lower) or X > c (upper) together with
/// the probability of the conditioning event. A piece containing c is split at
/// c; an atom at c belongs to the lower side.
std::pair<Distribution, double> conditional_truncate(const Distribution& dist, double c,
                                                     Side side);

}  // namespace opial
