#include "opial/node_function.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "opial/error.hpp"

namespace opial {

NodeFunction NodeFunction::constant(double level) {
  NodeFunction fn;
  fn.kind = NodeKind::constant;
  fn.level = level;
  return fn;
}

NodeFunction NodeFunction::identity() {
  NodeFunction fn;
  fn.kind = NodeKind::identity;
  return fn;
}

NodeFunction NodeFunction::cos_pi_F() {
  NodeFunction fn;
  fn.kind = NodeKind::cos_pi_F;
  return fn;
}

NodeFunction NodeFunction::step(double threshold, double low, double high) {
  NodeFunction fn;
  fn.kind = NodeKind::step;
  fn.threshold = threshold;
  fn.low = low;
  fn.high = high;
  return fn;
}

NodeFunction NodeFunction::from_values(std::vector<double> values) {
  NodeFunction fn;
  fn.kind = NodeKind::values;
  fn.values = std::move(values);
  return fn;
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::values: return "values";
    case NodeKind::constant: return "constant";
    case NodeKind::identity: return "identity";
    case NodeKind::cos_pi_F: return "cos_pi_F";
    case NodeKind::step: return "step";
  }
  return "unknown";
}

std::vector<double> resolve(const NodeFunction& fn, const QuantizedModel& model) {
  const auto support = model.support();
  std::vector<double> out(model.size());
  switch (fn.kind) {
    case NodeKind::values:
      if (fn.values.size() != model.size()) {
        throw InvalidArgument("values-kind function has " + std::to_string(fn.values.size()) +
                              " values, expected " + std::to_string(model.size()) +
                              " (node count)");
      }
      out = fn.values;
      break;
    case NodeKind::constant:
      out.assign(model.size(), fn.level);
      break;
    case NodeKind::identity:
      out.assign(support.begin(), support.end());
      break;
    case NodeKind::cos_pi_F: {
      const auto mid = model.midpoint_cdf();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::cos(std::numbers::pi * mid[i]);
      break;
    }
    case NodeKind::step:
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = support[i] <= fn.threshold ? fn.low : fn.high;
      }
      break;
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw InvalidArgument("node function produced a non-finite value");
  }
  return out;
}

}  // namespace opial
