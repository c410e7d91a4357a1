#include "dde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace dde {

namespace {

int cells_for(double len, double delta, const char* what) {
  const int m = static_cast<int>(std::llround(len / delta));
  if (m < 1 || std::abs(m * delta - len) > 1e-9 * std::max(1.0, len))
    throw ValidationError(std::string("grid spacing must divide ") + what);
  return m;
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
  double best = 0.0;
  for (size_t k = 0; k < a.values.size(); ++k)
    best = std::max(best, std::abs(a.values[k] - b.values[k]));
  return best;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Global: return "Global";
    case SolveStatus::BlowUp: return "BlowUp";
    case SolveStatus::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

ExtendedPrehistory extend_prehistory(const Prehistory& phi, double T) {
  if (!(T > 0.0)) throw ValidationError("T must be positive");
  const Grid& pg = phi.fn.grid;
  const double delta = pg.delta();
  const int m = pg.n - 1;
  const int nt = cells_for(T, delta, "T");
  Grid g = make_grid(pg.a, T, m + nt + 1);
  GridFunction fn = zero_grid_function(g, phi.fn.dim);
  std::copy(phi.fn.values.begin(), phi.fn.values.end(), fn.values.begin());
  const auto last = phi.fn.node_values(m);
  for (int i = m + 1; i <= m + nt; ++i)
    std::copy(last.begin(), last.end(), fn.node_values(i).begin());
  return ExtendedPrehistory{std::move(fn)};
}

double contraction_factor(double l_alpha, double rho) {
  return std::sqrt(1.0 + 1.0 / (rho * rho)) * l_alpha /
         std::sqrt(2.0 * rho);
}

double select_rho(double l_alpha, double theta, double rho_max) {
  if (!(theta > 0.0 && theta < 1.0))
    throw ValidationError("contraction target must lie in (0,1)");
  if (l_alpha < 0.0) throw ValidationError("Lipschitz constant must be >= 0");
  const double target = theta * theta;
  auto f = [l_alpha](double rho) {
    return (1.0 + 1.0 / (rho * rho)) * l_alpha * l_alpha / (2.0 * rho);
  };
  if (f(1.0) <= target) return 1.0;
  if (f(rho_max) > target)
    throw RhoOverflow("required weight rate exceeds rho_max");
  double lo = 1.0, hi = rho_max;
  // Absolute width 1e-10 plus a relative term so the loop still terminates
  // when one ulp of hi exceeds the absolute tolerance.
  while (hi - lo > 1e-10 + 4.0 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) <= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

GridFunction gamma_step(const GridFunction& v, const ExtendedPrehistory& phat,
                        const RhsModel& g, double alpha, double rho,
                        double slope_clamp) {
  (void)rho;  // rho enters through the norms, not the integration
  const Grid& grid = phat.fn.grid;
  if (v.grid.n != grid.n || v.dim != phat.fn.dim)
    throw DimensionMismatch("iterate and extended prehistory disagree");
  const double delta = grid.delta();
  const int m = cells_for(g.h, delta, "h");
  const int n = grid.n;
  const int d = v.dim;
  const ValphaSpec spec{alpha, g.h};

  GridFunction u = v;
  for (size_t k = 0; k < u.values.size(); ++k)
    u.values[k] += phat.fn.values[k];

  // Cell slope norms of u, for the projection fast path.
  std::vector<double> slope_norm(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    double s = 0.0;
    const auto a = u.node_values(i);
    const auto b = u.node_values(i + 1);
    for (int c = 0; c < d; ++c) {
      const double dv = (b[c] - a[c]) / delta;
      s += dv * dv;
    }
    slope_norm[i] = std::sqrt(s);
  }

  Grid sg = make_grid(-g.h, 0.0, m + 1);
  HistorySegment seg{zero_grid_function(sg, d), 0.0};

  // Right-hand side samples at nodes t_i >= 0.
  GridFunction w = zero_grid_function(grid, d);
  for (int i = m; i < n; ++i) {
    seg.source_time = grid.node(i);
    std::copy(u.values.begin() + static_cast<size_t>(i - m) * d,
              u.values.begin() + static_cast<size_t>(i + 1) * d,
              seg.fn.values.begin());
    double win = 0.0;
    for (int j = i - m; j < i; ++j) win = std::max(win, slope_norm[j]);
    std::vector<double> val;
    if (win <= alpha * (1.0 + 1e-12)) {
      val = g.eval(seg.source_time, seg);
    } else {
      HistorySegment proj{project_valpha(seg.fn, spec), seg.source_time};
      val = g.eval(seg.source_time, proj);
    }
    if (slope_clamp > 0.0) {
      double nv = 0.0;
      for (int c = 0; c < d; ++c) nv += val[c] * val[c];
      nv = std::sqrt(nv);
      if (nv > slope_clamp)
        for (int c = 0; c < d; ++c) val[c] *= slope_clamp / nv;
    }
    std::copy(val.begin(), val.end(), w.node_values(i).begin());
  }

  // Cumulative trapezoid from t = 0; exact zero on [-h,0].
  GridFunction out = zero_grid_function(grid, d);
  for (int i = m; i + 1 < n; ++i) {
    const auto wi = w.node_values(i);
    const auto wj = w.node_values(i + 1);
    const auto oi = out.node_values(i);
    auto oj = out.node_values(i + 1);
    for (int c = 0; c < d; ++c)
      oj[c] = oi[c] + 0.5 * delta * (wi[c] + wj[c]);
  }
  return out;
}

SolutionRecord solve_local(const Prehistory& phi, const RhsModel& g, double T,
                           double alpha, const SolverConfig& cfg,
                           const GridFunction* initial_iterate) {
  if (phi.fn.dim != g.dim)
    throw DimensionMismatch("prehistory and rhs dimension disagree");
  if (phi.deriv_sup > alpha * (1.0 + 1e-12))
    throw ValidationError("prehistory not in V_alpha");
  const double l_alpha = g.lipschitz_at(alpha);
  const double rho = select_rho(l_alpha, cfg.theta, cfg.rho_max);
  const ExtendedPrehistory phat = extend_prehistory(phi, T);
  const Grid& grid = phat.fn.grid;
  const double delta = grid.delta();
  const int m = cells_for(g.h, delta, "h");
  const int n = grid.n;
  const double origin = grid.a;
  const WeightedNormParams wp{rho};
  const double slope_clamp = 4.0 * alpha;

  GridFunction v = initial_iterate ? *initial_iterate
                                   : zero_grid_function(grid, g.dim);
  if (initial_iterate) {
    if (v.grid.n != n || v.dim != g.dim)
      throw DimensionMismatch("initial iterate has wrong shape");
    for (int i = 0; i <= m; ++i)
      for (int c = 0; c < g.dim; ++c)
        if (v.node_values(i)[c] != 0.0)
          throw ValidationError("initial iterate must vanish on [-h,0]");
  }

  double prev_diff = -1.0;
  double max_ratio = 0.0;
  double last_ratio = 0.0;
  bool have_ratio = false;
  bool converged = false;
  int iters = 0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    GridFunction vnext = gamma_step(v, phat, g, alpha, rho, slope_clamp);
    GridFunction dfn = vnext;
    for (size_t q = 0; q < dfn.values.size(); ++q)
      dfn.values[q] -= v.values[q];
    const double diff = weighted_h1_norm(dfn, wp, origin);
    const double sdiff = sup_diff(vnext, v);
    const double scale = 1.0 + weighted_h1_norm(vnext, wp, origin);
    if (prev_diff > 1e-12 * scale) {
      const double ratio = diff / prev_diff;
      max_ratio = std::max(max_ratio, ratio);
      last_ratio = ratio;
      have_ratio = true;
    }
    prev_diff = diff;
    v = std::move(vnext);
    iters = k + 1;
    if (diff <= cfg.fp_tol && sdiff <= cfg.fp_sup_tol) {
      converged = true;
      break;
    }
  }
  if (!converged && have_ratio && last_ratio >= 1.0)
    throw NoConvergence("Picard iteration hit max_iters with ratio >= 1");

  GridFunction u = v;
  for (size_t q = 0; q < u.values.size(); ++q)
    u.values[q] += phat.fn.values[q];

  // Largest accepted horizon: first cell whose slope exceeds alpha, minus
  // one cell.
  int t1_index = n - 1;
  const double tol_alpha = alpha * (1.0 + 1e-9) + 1e-12;
  for (int i = m; i + 1 < n; ++i) {
    double s = 0.0;
    const auto a = u.node_values(i);
    const auto b = u.node_values(i + 1);
    for (int c = 0; c < g.dim; ++c) {
      const double dv = (b[c] - a[c]) / delta;
      s += dv * dv;
    }
    if (std::sqrt(s) > tol_alpha) {
      t1_index = std::max(m, i - 1);
      break;
    }
  }

  SolutionRecord rec;
  Grid tg = make_grid(grid.a, grid.node(t1_index), t1_index + 1);
  rec.trajectory = make_grid_function(
      tg, g.dim,
      std::vector<double>(u.values.begin(),
                          u.values.begin() +
                              static_cast<size_t>(t1_index + 1) * g.dim));
  rec.T0 = tg.b;
  rec.status = (t1_index == n - 1) ? SolveStatus::Global
                                   : SolveStatus::BudgetExhausted;
  rec.alphas_used = {alpha};
  rec.rho_used = {rho};
  rec.measured_contraction = {max_ratio};
  rec.iterations_last_stage = iters;
  rec.residual = residual(rec, g);
  return rec;
}

SolutionRecord solve_global(const Prehistory& phi, const RhsModel& g,
                            double T, const SolverConfig& cfg) {
  if (!(cfg.alpha1 > phi.deriv_sup))
    throw ValidationError("alpha1 must exceed the prehistory's slope bound");
  SolutionRecord prev;
  bool have_prev = false;
  std::vector<double> alphas, rhos, ratios;
  double overlap_err = 0.0;
  int stall = 0;
  const double delta = phi.fn.grid.delta();

  double alpha = cfg.alpha1;
  const int max_stages = 200;
  for (int stage = 0; stage < max_stages; ++stage) {
    SolutionRecord rec = solve_local(phi, g, T, alpha, cfg);
    alphas.push_back(alpha);
    rhos.push_back(rec.rho_used.front());
    ratios.push_back(rec.measured_contraction.front());

    double tstar = rec.T0;
    if (have_prev) {
      // Stage consistency on the previously accepted interval.
      const int overlap_nodes =
          std::min(prev.trajectory.grid.n, rec.trajectory.grid.n);
      for (int i = 0; i < overlap_nodes; ++i)
        for (int c = 0; c < g.dim; ++c)
          overlap_err = std::max(
              overlap_err, std::abs(rec.trajectory.node_values(i)[c] -
                                    prev.trajectory.node_values(i)[c]));
      // The reached horizon is snapped to the grid, so per-doubling advances
      // are whole cells; "at most one cell" is the stall test that survives
      // the quantization.
      if (tstar - prev.T0 < 1.5 * delta)
        ++stall;
      else
        stall = 0;
      // Monotone continuation: never report a shrinking horizon.
      if (rec.T0 < prev.T0) {
        rec.trajectory = prev.trajectory;
        rec.T0 = prev.T0;
      }
    }

    rec.alphas_used = alphas;
    rec.rho_used = rhos;
    rec.measured_contraction = ratios;
    rec.max_overlap_error = overlap_err;

    if (rec.status == SolveStatus::Global) {
      rec.residual = residual(rec, g);
      return rec;
    }
    prev = std::move(rec);
    have_prev = true;

    if (2.0 * alpha > cfg.alpha_max) {
      prev.status =
          (stall >= 3) ? SolveStatus::BlowUp : SolveStatus::BudgetExhausted;
      prev.residual = residual(prev, g);
      return prev;
    }
    alpha *= 2.0;
  }
  prev.status = SolveStatus::BudgetExhausted;
  return prev;
}

double residual(const SolutionRecord& rec, const RhsModel& g) {
  const GridFunction& u = rec.trajectory;
  const Grid& grid = u.grid;
  const double delta = grid.delta();
  const int m = cells_for(g.h, delta, "h");
  double best = 0.0;
  for (int i = m + 1; i + 1 < grid.n; ++i) {
    const HistorySegment seg = history_at(u, grid.node(i), g.h);
    const auto gv = g.eval(grid.node(i), seg);
    const auto a = u.node_values(i);
    const auto b = u.node_values(i + 1);
    double s = 0.0;
    for (int c = 0; c < g.dim; ++c) {
      const double dv = (b[c] - a[c]) / delta - gv[c];
      s += dv * dv;
    }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

std::string metadata_json(const SolutionRecord& rec) {
  nlohmann::ordered_json j;
  j["status"] = to_string(rec.status);
  j["T0"] = rec.T0;
  j["alphas_used"] = rec.alphas_used;
  j["rho_used"] = rec.rho_used;
  j["measured_contraction"] = rec.measured_contraction;
  j["residual"] = rec.residual;
  return j.dump(2) + "\n";
}

void write_metadata_file(const SolutionRecord& rec, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for writing: " + path);
  os << metadata_json(rec);
}

}  // namespace dde
