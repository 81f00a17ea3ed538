#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "heatplan/solver.hpp"
#include "solver_bounds.hpp"

namespace heatplan {


namespace {

/// Flat decision vector: states 1..T-1 as [x..., y..., heading...].
struct Layout {
  std::size_t n;  // horizon T
  std::size_t free() const { return n - 1; }
  std::size_t size() const { return 3 * free(); }
};

struct Evaluation {
  double objective = 0.0;  // cost + mu * penalty
  double penalty = 0.0;
  double max_excess = 0.0;  // against the exact bounds
  CostBreakdown cost;
  std::vector<double> gradient;
};

class Problem {
 public:
  Problem(const CostModel& model, const Trajectory& reference)
      : model_(model), layout_{reference.size()}, x0_(reference[0].pose.x()),
        y0_(reference[0].pose.y()), h0_(reference[0].pose.heading()),
        ego_speed_(reference[0].speed) {}

  const Layout& layout() const { return layout_; }

  std::vector<double> pack(const Trajectory& tau) const {
    std::vector<double> z(layout_.size());
    const std::size_t m = layout_.free();
    for (std::size_t t = 1; t < layout_.n; ++t) {
      z[t - 1] = tau[t].pose.x();
      z[m + t - 1] = tau[t].pose.y();
      z[2 * m + t - 1] = tau[t].pose.heading();
    }
    return z;
  }

  void unpack(std::span<const double> z, std::vector<double>& x, std::vector<double>& y,
              std::vector<double>& h) const {
    const std::size_t n = layout_.n;
    const std::size_t m = layout_.free();
    x.resize(n);
    y.resize(n);
    h.resize(n);
    x[0] = x0_;
    y[0] = y0_;
    h[0] = h0_;
    for (std::size_t t = 1; t < n; ++t) {
      x[t] = z[t - 1];
      y[t] = z[m + t - 1];
      h[t] = z[2 * m + t - 1];
    }
  }

  Trajectory to_trajectory(std::span<const double> z) const {
    std::vector<double> x, y, h;
    unpack(z, x, y, h);
    KinematicsTape tape;
    tape.forward(x, y, h, model_.reference().dt());
    std::vector<TrajectoryState> states;
    states.reserve(layout_.n);
    states.push_back(model_.reference()[0]);
    for (std::size_t t = 1; t < layout_.n; ++t) {
      states.push_back({Pose2(x[t], y[t], h[t]), tape.speed()[t]});
    }
    return Trajectory(model_.reference().dt(), std::move(states));
  }

  /// Steps with a violated exact bound.
  std::vector<std::size_t> violations(const std::vector<double>& x, const std::vector<double>& y,
                                      const std::vector<double>& h) const {
    KinematicsTape tape;
    tape.forward(x, y, h, model_.reference().dt());
    std::vector<std::size_t> out;
    detail::visit_bounds(tape, ego_speed_, model_.config(), 1.0, nullptr,
                         [&](const char*, std::size_t t, double excess, auto*, double) {
                           if (excess > 1e-9) out.push_back(t);
                         });
    return out;
  }

  Evaluation evaluate(std::span<const double> z, double mu, bool with_gradient) const {
    std::vector<double> x, y, h;
    unpack(z, x, y, h);
    Evaluation e;
    CostGradient g;
    e.cost = model_.evaluate(x, y, h, with_gradient ? &g : nullptr);

    KinematicsTape tape;
    tape.forward(x, y, h, model_.reference().dt());
    KinematicsTape::Seeds seeds;
    seeds.reset(layout_.n);
    const double margin = model_.config().penalty_margin;
    detail::visit_bounds(tape, ego_speed_, model_.config(), margin, &seeds,
                         [&](const char*, std::size_t t, double excess,
                             std::vector<double>* seed, double sign) {
                           e.penalty += excess * excess;
                           if (seed) (*seed)[t] += 2.0 * mu * excess * sign;
                         });
    detail::visit_bounds(tape, ego_speed_, model_.config(), 1.0, nullptr,
                         [&](const char*, std::size_t, double excess, auto*, double) {
                           e.max_excess = std::max(e.max_excess, excess);
                         });
    e.objective = e.cost.total + mu * e.penalty;
    if (with_gradient) {
      if (mu > 0.0 && e.penalty > 0.0) tape.backward(seeds, g.x, g.y, g.heading);
      const std::size_t m = layout_.free();
      e.gradient.resize(layout_.size());
      for (std::size_t t = 1; t < layout_.n; ++t) {
        e.gradient[t - 1] = g.x[t];
        e.gradient[m + t - 1] = g.y[t];
        e.gradient[2 * m + t - 1] = g.heading[t];
      }
    }
    return e;
  }

 private:
  const CostModel& model_;
  Layout layout_;
  double x0_, y0_, h0_, ego_speed_;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

constexpr double kFeasibleSlack = 1e-9;

struct Tracker {
  std::vector<double> best_feasible;
  double best_feasible_cost = std::numeric_limits<double>::infinity();
  std::vector<double> least_violating;
  double least_excess = std::numeric_limits<double>::infinity();
  double least_violating_cost = std::numeric_limits<double>::infinity();

  void offer(std::span<const double> z, const Evaluation& e) {
    if (e.max_excess <= kFeasibleSlack) {
      if (e.cost.total < best_feasible_cost) {
        best_feasible_cost = e.cost.total;
        best_feasible.assign(z.begin(), z.end());
      }
    } else if (e.max_excess < least_excess ||
               (e.max_excess == least_excess && e.cost.total < least_violating_cost)) {
      least_excess = e.max_excess;
      least_violating_cost = e.cost.total;
      least_violating.assign(z.begin(), z.end());
    }
  }
};

[[noreturn]] void raise_non_finite(const Problem& p, std::span<const double> last_valid) {
  std::optional<Trajectory> last;
  try {
    last = p.to_trajectory(last_valid);
  } catch (const std::exception&) {
    last.reset();
  }
  throw SolverError("refine: non-finite cost encountered", std::move(last));
}

struct RoundResult {
  int iterations = 0;
  bool converged = false;
};

/// L-BFGS with Armijo backtracking on one penalty round.
RoundResult minimize(const Problem& p, std::vector<double>& z, double mu, const SolverConfig& c,
                     Tracker& tracker) {
  constexpr std::size_t kMemory = 8;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 40;
  constexpr double kMaxMove = 2.0;

  RoundResult r;
  Evaluation cur = p.evaluate(z, mu, true);
  if (std::isnan(cur.objective)) raise_non_finite(p, z);
  tracker.offer(z, cur);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> d(z.size()), trial(z.size());
  int stalls = 0;
  std::deque<double> recent;  // objective over the last kWindow iterations
  constexpr std::size_t kWindow = 10;

  for (int it = 0; it < c.max_iters; ++it) {
    if (inf_norm(cur.gradient) < c.tolerance) {
      r.converged = true;
      break;
    }
    // Two-loop recursion.
    d = cur.gradient;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], d);
      for (std::size_t j = 0; j < d.size(); ++j) d[j] -= alpha[i] * y_hist[i][j];
    }
    if (!s_hist.empty()) {
      const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (double& v : d) v *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], d);
      for (std::size_t j = 0; j < d.size(); ++j) d[j] += (alpha[i] - beta) * s_hist[i][j];
    }
    for (double& v : d) v = -v;
    double slope = dot(cur.gradient, d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = -cur.gradient[j];
      slope = dot(cur.gradient, d);
    }
    const double dmax = inf_norm(d);
    double step = s_hist.empty() ? std::min(1.0, 0.25 / dmax) : std::min(1.0, kMaxMove / dmax);

    bool accepted = false;
    Evaluation next;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      for (std::size_t j = 0; j < z.size(); ++j) trial[j] = z[j] + step * d[j];
      next = p.evaluate(trial, mu, true);
      if (std::isnan(next.objective)) raise_non_finite(p, z);
      if (std::isfinite(next.objective) &&
          next.objective <= cur.objective + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++r.iterations;
    if (!accepted) break;

    std::vector<double> s(z.size()), yv(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
      s[j] = trial[j] - z[j];
      yv[j] = next.gradient[j] - cur.gradient[j];
    }
    const double sy = dot(s, yv);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double decrease = cur.objective - next.objective;
    z = trial;
    cur = std::move(next);
    tracker.offer(z, cur);
    stalls = decrease <= 1e-12 * std::max(1.0, std::abs(cur.objective)) ? stalls + 1 : 0;
    recent.push_back(cur.objective);
    if (recent.size() > kWindow) {
      recent.pop_front();
      if (recent.front() - recent.back() <= c.tolerance * std::max(1.0, std::abs(cur.objective))) {
        stalls = 3;
      }
    }
    if (stalls >= 3) {
      r.converged = true;
      break;
    }
  }
  return r;
}

/// Local re-smoothing: states within two steps of a violated bound are
/// averaged with their neighbours until the bounds hold or the pass budget
/// runs out.
void project(const Problem& p, std::vector<double>& z, Tracker& tracker) {
  constexpr int kPasses = 60;
  const std::size_t n = p.layout().n;
  const std::size_t m = p.layout().free();
  std::vector<double> x, y, h;
  for (int pass = 0; pass < kPasses; ++pass) {
    const Evaluation e = p.evaluate(z, 0.0, false);
    tracker.offer(z, e);
    if (e.max_excess <= kFeasibleSlack) return;

    p.unpack(z, x, y, h);
    std::vector<bool> bad(n, false);
    for (std::size_t t : p.violations(x, y, h)) {
      for (std::size_t k = (t >= 2 ? t - 2 : 0); k <= std::min(n - 1, t + 2); ++k) bad[k] = true;
    }
    std::vector<double> nx = x, ny = y, nh = h;
    for (std::size_t t = 1; t + 1 < n; ++t) {
      if (!bad[t]) continue;
      nx[t] = 0.25 * x[t - 1] + 0.5 * x[t] + 0.25 * x[t + 1];
      ny[t] = 0.25 * y[t - 1] + 0.5 * y[t] + 0.25 * y[t + 1];
      if (std::hypot(x[t + 1] - x[t - 1], y[t + 1] - y[t - 1]) > 0.2) {
        const double chord = std::atan2(y[t + 1] - y[t - 1], x[t + 1] - x[t - 1]);
        nh[t] = h[t] + 0.5 * normalize_angle(chord - h[t]);
      }
    }
    if (bad[n - 1]) {
      nx[n - 1] = 2.0 * nx[n - 2] - nx[n - 3];
      ny[n - 1] = 2.0 * ny[n - 2] - ny[n - 3];
      nh[n - 1] = nh[n - 2];
    }
    for (std::size_t t = 1; t < n; ++t) {
      z[t - 1] = nx[t];
      z[m + t - 1] = ny[t];
      z[2 * m + t - 1] = nh[t];
    }
  }
  tracker.offer(z, p.evaluate(z, 0.0, false));
}

}  // namespace

RefinementResult refine(const Trajectory& reference, const CollisionDensityMap& density,
                        const SpatialTemporalGrid& heat, const SolverConfig& config) {
  const CostModel model(reference, density, heat, config);
  const Problem problem(model, reference);

  std::vector<double> z = problem.pack(reference);
  Tracker tracker;
  const Evaluation initial = problem.evaluate(z, 0.0, false);
  if (std::isnan(initial.objective) || !std::isfinite(initial.cost.total)) {
    throw SolverError("refine: non-finite cost at the initial plan", reference);
  }
  tracker.offer(z, initial);

  RefinementResult result{reference, {}, initial.cost, 0, false, false, {}, {}};
  double mu = config.penalty_initial;
  bool converged = false;
  for (int round = 0; round < config.penalty_rounds; ++round) {
    const RoundResult r = minimize(problem, z, mu, config, tracker);
    result.iterations += r.iterations;
    converged = r.converged;
    result.best_feasible_history.push_back(tracker.best_feasible_cost);
    mu *= config.penalty_growth;
  }
  const Evaluation last = problem.evaluate(z, 0.0, false);
  if (last.max_excess > kFeasibleSlack) project(problem, z, tracker);

  const std::vector<double>& chosen =
      tracker.best_feasible.empty() ? tracker.least_violating : tracker.best_feasible;
  result.trajectory = problem.to_trajectory(chosen);
  result.breakdown = model.evaluate(result.trajectory);
  result.converged = converged;
  const BoundCheck check = check_hard_bounds(result.trajectory, config);
  result.feasible = check.feasible;
  result.infeasibility = check.first_violation;
  return result;
}

}  // namespace heatplan
