#pragma once

#include <cstddef>
#include <string>

#include "segopt/cost.hpp"
#include "segopt/envelope.hpp"
#include "segopt/market.hpp"
#include "segopt/oracle.hpp"

namespace segopt {

struct InstanceOptions {
  std::size_t h_grid = kDefaultHGrid;
  std::size_t lambda_steps = 101;
  double mesh = 1.0 / 64.0;
  double q_step = kDefaultQStep;
  std::size_t oset_den = 50;
};

struct ProblemInstance {
  ValueGrid grid;
  Market xstar;
  CostSpec cost;
  InstanceOptions options;
};

// JSON document with keys values, weights, cost and optional options. Unknown
// keys, out-of-range options and invalid components raise InvalidInstance
// with a "line L: " prefix pointing at the offending key.
ProblemInstance parse_instance_text(const std::string& text);
ProblemInstance parse_instance(const std::string& path);

// Canonical JSON with 12 significant digits; parse(emit(x)) reproduces x.
std::string emit_instance(const ProblemInstance& inst);

// Shortest of %.12g; used by every emitter.
std::string fmt(double v);

}  // namespace segopt
