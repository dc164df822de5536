#include "opial/distribution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "opial/error.hpp"
#include "opial/summation.hpp"

namespace opial {

namespace {

// Shortest text that reads back to the same double.
std::string number_text(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, end) : std::string("?");
}

std::string interval_text(const Piece& piece) {
  return "(" + number_text(piece.lo) + ", " + number_text(piece.hi) + ")";
}

}  // namespace

Distribution Distribution::create(std::vector<Atom> atoms, std::vector<Piece> pieces) {
  CompensatedSum total;
  for (const Atom& atom : atoms) {
    if (!std::isfinite(atom.location)) {
      throw InvalidArgument("atom location must be finite");
    }
    if (!std::isfinite(atom.mass) || atom.mass < 0.0) {
      throw InvalidArgument("atom at " + number_text(atom.location) +
                            " has negative or non-finite mass " + number_text(atom.mass));
    }
    total += atom.mass;
  }
  for (const Piece& piece : pieces) {
    if (!std::isfinite(piece.lo) || !std::isfinite(piece.hi)) {
      throw InvalidArgument("piece endpoints must be finite");
    }
    if (!(piece.lo < piece.hi)) {
      throw InvalidArgument("piece " + interval_text(piece) + " needs lo < hi");
    }
    if (!std::isfinite(piece.mass) || piece.mass < 0.0) {
      throw InvalidArgument("piece " + interval_text(piece) + " has negative or non-finite mass " +
                            number_text(piece.mass));
    }
    total += piece.mass;
  }
  if (std::abs(total.value() - 1.0) > kProbabilityTolerance) {
    throw InvalidArgument("total mass " + number_text(total.value()) +
                          " differs from 1 by more than 1e-12");
  }

  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const Atom& atom : atoms) {
    if (!merged.empty() && merged.back().location == atom.location) {
      merged.back().mass += atom.mass;
    } else {
      merged.push_back(atom);
    }
  }

  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    if (pieces[i].lo < pieces[i - 1].hi) {
      throw InvalidArgument("piece " + interval_text(pieces[i]) + " overlaps piece " +
                            interval_text(pieces[i - 1]));
    }
  }
  for (const Atom& atom : merged) {
    for (const Piece& piece : pieces) {
      if (piece.lo < atom.location && atom.location < piece.hi) {
        throw InvalidArgument("atom at " + number_text(atom.location) +
                              " lies inside piece " + interval_text(piece));
      }
    }
  }
  return Distribution(std::move(merged), std::move(pieces));
}

double Distribution::continuous_mass_below(double x) const {
  CompensatedSum sum;
  for (const Piece& piece : pieces_) {
    if (x >= piece.hi) {
      sum += piece.mass;
    } else if (x > piece.lo) {
      sum += piece.mass * (x - piece.lo) / (piece.hi - piece.lo);
    }
  }
  return sum.value();
}

double Distribution::cdf(double x) const {
  CompensatedSum sum(continuous_mass_below(x));
  for (const Atom& atom : atoms_) {
    if (atom.location > x) break;
    sum += atom.mass;
  }
  return std::clamp(sum.value(), 0.0, 1.0);
}

double Distribution::left_cdf(double x) const {
  CompensatedSum sum(continuous_mass_below(x));
  for (const Atom& atom : atoms_) {
    if (atom.location >= x) break;
    sum += atom.mass;
  }
  return std::clamp(sum.value(), 0.0, 1.0);
}

double Distribution::point_mass(double x) const {
  const auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), x,
      [](const Atom& atom, double value) { return atom.location < value; });
  return (it != atoms_.end() && it->location == x) ? it->mass : 0.0;
}

Distribution make_discrete(std::span<const double> points, std::span<const double> probs) {
  if (points.size() != probs.size()) {
    throw InvalidArgument("make_discrete: " + std::to_string(points.size()) + " points but " +
                          std::to_string(probs.size()) + " probabilities");
  }
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    atoms.push_back({points[i], probs[i]});
  }
  return Distribution::create(std::move(atoms), {});
}

Distribution make_uniform_discrete(std::size_t n) {
  if (n == 0) throw InvalidArgument("make_uniform_discrete: n must be positive");
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    atoms.push_back({static_cast<double>(i), 1.0 / static_cast<double>(n)});
  }
  return Distribution::create(std::move(atoms), {});
}

Distribution make_uniform_interval(double a, double b) {
  if (!(a < b)) {
    throw InvalidArgument("make_uniform_interval: need a < b, got a=" + number_text(a) +
                          ", b=" + number_text(b));
  }
  return Distribution::create({}, {Piece{a, b, 1.0}});
}

QuantizedModel::QuantizedModel(std::vector<double> support, std::vector<double> mass, bool exact,
                               std::size_t source_m)
    : support_(std::move(support)), mass_(std::move(mass)), is_exact_(exact), source_m_(source_m) {}

QuantizedModel QuantizedModel::from_atoms(std::vector<double> support, std::vector<double> mass) {
  if (support.size() != mass.size()) {
    throw InvalidArgument("QuantizedModel: support and mass lengths differ");
  }
  if (support.empty()) throw InvalidArgument("QuantizedModel: no nodes");
  CompensatedSum total;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!std::isfinite(support[i])) throw InvalidArgument("QuantizedModel: non-finite node");
    if (i > 0 && !(support[i - 1] < support[i])) {
      throw InvalidArgument("QuantizedModel: support must be strictly increasing");
    }
    if (!std::isfinite(mass[i]) || !(mass[i] > 0.0)) {
      throw InvalidArgument("QuantizedModel: masses must be positive");
    }
    total += mass[i];
  }
  if (std::abs(total.value() - 1.0) > kProbabilityTolerance) {
    throw InvalidArgument("QuantizedModel: masses sum to " + number_text(total.value()));
  }
  return QuantizedModel(std::move(support), std::move(mass), true, 0);
}

std::vector<double> QuantizedModel::midpoint_cdf() const {
  std::vector<double> out(size());
  CompensatedSum below;
  for (std::size_t i = 0; i < size(); ++i) {
    out[i] = below.value() + 0.5 * mass_[i];
    below += mass_[i];
  }
  return out;
}

double QuantizedModel::cdf(double x) const {
  CompensatedSum sum;
  for (std::size_t i = 0; i < size() && support_[i] <= x; ++i) sum += mass_[i];
  return sum.value();
}

QuantizedModel QuantizedModel::slice(std::size_t first, std::size_t count) const {
  if (count == 0 || first > size() || count > size() - first) {
    throw InvalidArgument("slice: node range out of bounds or empty");
  }
  CompensatedSum kept;
  for (std::size_t i = first; i < first + count; ++i) kept += mass_[i];
  const double total = kept.value();
  std::vector<double> support(support_.begin() + first, support_.begin() + first + count);
  std::vector<double> mass(mass_.begin() + first, mass_.begin() + first + count);
  for (double& p : mass) p /= total;
  return QuantizedModel(std::move(support), std::move(mass), is_exact_, source_m_);
}

QuantizedModel QuantizedModel::concatenate(const QuantizedModel& lower, double weight,
                                           const QuantizedModel& upper) {
  if (!(weight > 0.0 && weight < 1.0)) {
    throw InvalidArgument("concatenate: weight must lie in (0, 1)");
  }
  if (!(lower.support_.back() < upper.support_.front())) {
    throw InvalidArgument("concatenate: lower nodes must precede upper nodes");
  }
  std::vector<double> support(lower.support_);
  support.insert(support.end(), upper.support_.begin(), upper.support_.end());
  std::vector<double> mass;
  mass.reserve(support.size());
  for (double p : lower.mass_) mass.push_back(weight * p);
  for (double p : upper.mass_) mass.push_back((1.0 - weight) * p);
  return QuantizedModel(std::move(support), std::move(mass), lower.is_exact_ && upper.is_exact_,
                        std::max(lower.source_m_, upper.source_m_));
}

QuantizedModel QuantizedModel::affine(double alpha, double beta) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw InvalidArgument("affine: need finite alpha > 0");
  }
  std::vector<double> mapped(support_.size());
  std::transform(support_.begin(), support_.end(), mapped.begin(),
                 [=](double x) { return alpha * x + beta; });
  for (std::size_t i = 1; i < mapped.size(); ++i) {
    if (!(mapped[i - 1] < mapped[i])) {
      throw InvalidArgument("affine: map collapses distinct nodes in floating point");
    }
  }
  return QuantizedModel(std::move(mapped), mass_, is_exact_, source_m_);
}

QuantizedModel quantize(const Distribution& dist, std::size_t m, std::size_t node_limit) {
  if (m == 0) throw InvalidArgument("quantize: m must be at least 1");
  const std::size_t piece_count = dist.pieces().size();
  if (piece_count > 0 && m > (node_limit - dist.atoms().size()) / piece_count) {
    throw InvalidArgument("quantize: m=" + std::to_string(m) + " with " +
                          std::to_string(piece_count) + " pieces exceeds the node limit " +
                          std::to_string(node_limit));
  }

  std::vector<Atom> nodes;
  nodes.reserve(dist.atoms().size() + m * piece_count);
  for (const Atom& atom : dist.atoms()) {
    if (atom.mass > 0.0) nodes.push_back(atom);
  }
  const double md = static_cast<double>(m);
  for (const Piece& piece : dist.pieces()) {
    if (!(piece.mass > 0.0)) continue;
    const double width = piece.hi - piece.lo;
    const double each = piece.mass / md;
    for (std::size_t k = 1; k <= m; ++k) {
      nodes.push_back({piece.lo + width * (static_cast<double>(k) - 0.5) / md, each});
    }
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });

  std::vector<double> support(nodes.size());
  std::vector<double> mass(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    support[i] = nodes[i].location;
    mass[i] = nodes[i].mass;
    if (i > 0 && !(support[i - 1] < support[i])) {
      throw InvalidArgument("quantize: resolution too fine for the piece width in floating point");
    }
  }
  return QuantizedModel(std::move(support), std::move(mass), !dist.has_pieces(),
                        dist.has_pieces() ? m : 0);
}

std::pair<Distribution, double> conditional_truncate(const Distribution& dist, double c,
                                                     Side side) {
  if (!std::isfinite(c)) throw PreconditionError("conditional_truncate: c must be finite");
  const double p = dist.cdf(c);
  if (!(p > kProbabilityTolerance) || !(p < 1.0 - kProbabilityTolerance)) {
    throw PreconditionError("conditional_truncate: P(X <= c) = " + number_text(p) +
                            " leaves an empty conditional law");
  }

  const bool lower = side == Side::lower;
  std::vector<Atom> atoms;
  std::vector<Piece> pieces;
  CompensatedSum kept;
  for (const Atom& atom : dist.atoms()) {
    if ((atom.location <= c) == lower) {
      atoms.push_back(atom);
      kept += atom.mass;
    }
  }
  for (const Piece& piece : dist.pieces()) {
    Piece part = piece;
    if (piece.hi <= c) {
      if (!lower) continue;
    } else if (piece.lo >= c) {
      if (lower) continue;
    } else {
      const double below = piece.mass * (c - piece.lo) / (piece.hi - piece.lo);
      if (lower) {
        part = {piece.lo, c, below};
      } else {
        part = {c, piece.hi, piece.mass - below};
      }
    }
    pieces.push_back(part);
    kept += part.mass;
  }

  const double total = kept.value();
  for (Atom& atom : atoms) atom.mass /= total;
  for (Piece& piece : pieces) piece.mass /= total;
  return {Distribution::create(std::move(atoms), std::move(pieces)), total};
}

}  // namespace opial
