#pragma once

#include <string_view>
#include <vector>

#include "opial/distribution.hpp"

namespace opial {

enum class NodeKind { values, constant, identity, cos_pi_F, step };

/// A function attached to the nodes of a QuantizedModel: either an explicit
/// value vector or one of a few named families.
struct NodeFunction {
  NodeKind kind = NodeKind::constant;
  std::vector<double> values;  // kind == values
  double level = 1.0;          // kind == constant
  double threshold = 0.0;      // kind == step: x <= threshold -> low, else high
  double low = 0.0;
  double high = 0.0;

  static NodeFunction constant(double level = 1.0);
  static NodeFunction identity();
  static NodeFunction cos_pi_F();
  static NodeFunction step(double threshold, double low, double high);
  static NodeFunction from_values(std::vector<double> values);
};

std::string_view to_string(NodeKind kind);

/// Node values of `fn` on `model`. cos_pi_F uses the midpoint CDF
/// F(x-) + p(x)/2 of the model. Throws InvalidArgument when a value vector
/// does not match the node count.
std::vector<double> resolve(const NodeFunction& fn, const QuantizedModel& model);

}  // namespace opial
