#include "adaptune/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adaptune/image.hpp"

namespace adaptune {

void SimplexOptions::validate() const {
  if (!(reflection > 0.0)) throw ArgumentError("reflection must be > 0");
  if (!(expansion > 1.0)) throw ArgumentError("expansion must be > 1");
  if (!(contraction > 0.0 && contraction < 1.0)) throw ArgumentError("contraction must be in (0,1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ArgumentError("shrink must be in (0,1)");
  if (!(init_step > 0.0)) throw ArgumentError("init_step must be > 0");
  if (max_evals < 1) throw ArgumentError("max_evals must be >= 1");
  if (restarts < 0) throw ArgumentError("restarts must be >= 0");
}

nlohmann::json to_json(const SimplexOptions& o) {
  return {{"reflection", o.reflection}, {"expansion", o.expansion}, {"contraction", o.contraction},
          {"shrink", o.shrink},         {"init_step", o.init_step}, {"max_evals", o.max_evals},
          {"f_tol", o.f_tol},           {"x_tol", o.x_tol},         {"restarts", o.restarts},
          {"seed", o.seed}};
}

SimplexOptions simplex_options_from_json(const nlohmann::json& j) {
  SimplexOptions o;
  o.reflection = j.value("reflection", o.reflection);
  o.expansion = j.value("expansion", o.expansion);
  o.contraction = j.value("contraction", o.contraction);
  o.shrink = j.value("shrink", o.shrink);
  o.init_step = j.value("init_step", o.init_step);
  o.max_evals = j.value("max_evals", o.max_evals);
  o.f_tol = j.value("f_tol", o.f_tol);
  o.x_tol = j.value("x_tol", o.x_tol);
  o.restarts = j.value("restarts", o.restarts);
  o.seed = j.value("seed", o.seed);
  o.validate();
  return o;
}

namespace {

// Works on costs (negated objective); lower is better.
class Search {
 public:
  Search(const Objective& f, const SimplexOptions& o, OptResult& r) : f_(f), opts_(o), result_(r) {}

  bool exhausted() const { return result_.evaluations >= opts_.max_evals; }

  double cost(std::span<const double> x) {
    double v = f_(x);
    if (!std::isfinite(v) || v < kPenalty) v = kPenalty;
    ++result_.evaluations;
    if (result_.trace.empty() || v > result_.best_value) {
      result_.best_value = v;
      result_.best_point.assign(x.begin(), x.end());
    }
    result_.trace.push_back({result_.evaluations, result_.best_value});
    return -v;
  }

  // One simplex run from `x0` with axis steps `step`; returns true on
  // tolerance convergence, false when the budget ran out.
  bool run(const std::vector<double>& x0, double step, double f0_cost, bool have_f0) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> v(n + 1, x0);
    std::vector<double> fv(n + 1);
    if (have_f0) {
      fv[0] = f0_cost;
    } else {
      if (exhausted()) return false;
      fv[0] = cost(v[0]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (exhausted()) return false;
      v[i + 1][i] += step;
      fv[i + 1] = cost(v[i + 1]);
    }
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    for (;;) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

      double fspread = fv[worst] - fv[best];
      double xspread = 0.0;
      for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t d = 0; d < n; ++d) xspread = std::max(xspread, std::abs(v[i][d] - v[best][d]));
      if (fspread < opts_.f_tol && xspread < opts_.x_tol) return true;
      if (exhausted()) return false;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= n; ++i)
        if (i != worst)
          for (std::size_t d = 0; d < n; ++d) centroid[d] += v[i][d];
      for (double& c : centroid) c /= static_cast<double>(n);

      for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + opts_.reflection * (centroid[d] - v[worst][d]);
      const double fr = cost(xr);
      if (fr < fv[best]) {
        if (exhausted()) {
          v[worst] = xr, fv[worst] = fr;
          return false;
        }
        for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + opts_.expansion * (xr[d] - centroid[d]);
        const double fe = cost(xe);
        if (fe < fr)
          v[worst] = xe, fv[worst] = fe;
        else
          v[worst] = xr, fv[worst] = fr;
        continue;
      }
      if (fr < fv[second]) {
        v[worst] = xr, fv[worst] = fr;
        continue;
      }
      if (exhausted()) return false;
      const bool outside = fr < fv[worst];
      for (std::size_t d = 0; d < n; ++d)
        xc[d] = outside ? centroid[d] + opts_.contraction * (xr[d] - centroid[d])
                        : centroid[d] + opts_.contraction * (v[worst][d] - centroid[d]);
      const double fc = cost(xc);
      if (outside ? fc <= fr : fc < fv[worst]) {
        v[worst] = xc, fv[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        if (exhausted()) return false;
        for (std::size_t d = 0; d < n; ++d) v[i][d] = v[best][d] + opts_.shrink * (v[i][d] - v[best][d]);
        fv[i] = cost(v[i]);
      }
    }
  }

 private:
  const Objective& f_;
  const SimplexOptions& opts_;
  OptResult& result_;
};

}  // namespace

OptResult nelder_mead(const Objective& objective, std::vector<double> x0, const SimplexOptions& opts) {
  opts.validate();
  if (x0.empty()) throw ArgumentError("Nelder-Mead needs at least one dimension");
  for (double v : x0)
    if (!std::isfinite(v)) throw ArgumentError("Nelder-Mead start point must be finite");
  OptResult result;
  Search search(objective, opts, result);
  result.converged = search.run(x0, opts.init_step, 0.0, false);
  for (int r = 0; r < opts.restarts && result.converged && !search.exhausted(); ++r) {
    const std::vector<double> incumbent = result.best_point;
    result.converged = search.run(incumbent, opts.init_step / 4.0, -result.best_value, true);
  }
  return result;
}

TracePoint best_of_trace(const OptResult& result) {
  if (result.trace.empty()) throw ArgumentError("empty optimization trace");
  return result.trace.back();
}

}  // namespace adaptune
