#pragma once
// Nelder-Mead simplex search, stated as maximization.

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

namespace adaptune {

struct SimplexOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  /// Additive step of the initial simplex along every coordinate axis.
  double init_step = 0.25;
  int max_evals = 2000;
  double f_tol = 1e-5;
  double x_tol = 1e-6;
  /// Re-seeds around the incumbent (step init_step / 4) after convergence.
  int restarts = 1;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SimplexOptions&, const SimplexOptions&) = default;
};

nlohmann::json to_json(const SimplexOptions& o);
SimplexOptions simplex_options_from_json(const nlohmann::json& j);

/// Objective values at or below this are treated as failures.
inline constexpr double kPenalty = -1e30;

struct TracePoint {
  int eval_index;
  double best_value;
};

struct OptResult {
  std::vector<double> best_point;
  double best_value = kPenalty;
  int evaluations = 0;
  bool converged = false;
  /// One entry per evaluation: best value seen so far (non-decreasing).
  std::vector<TracePoint> trace;
};

using Objective = std::function<double(std::span<const double>)>;

/// Maximizes `objective` from `x0`. Non-finite objective values count as
/// kPenalty. Never exceeds opts.max_evals evaluations.
OptResult nelder_mead(const Objective& objective, std::vector<double> x0, const SimplexOptions& opts);

/// Last trace entry (the global best seen).
TracePoint best_of_trace(const OptResult& result);

}  // namespace adaptune
