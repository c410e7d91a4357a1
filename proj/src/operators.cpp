#include "dde/operators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dde {

namespace {

// Number of cells per history segment; requires delta to divide h.
int history_cells(double delta, double h) {
  const int m = static_cast<int>(std::llround(h / delta));
  if (m < 1 || std::abs(m * delta - h) > 1e-9 * std::max(1.0, h))
    throw ValidationError("grid spacing must divide the delay horizon h");
  return m;
}

double trapezoid_weight(int i, int n) {
  return (i == 0 || i == n - 1) ? 0.5 : 1.0;
}

}  // namespace

GridFunction integrate_rho(const GridFunction& u, WeightedNormParams) {
  const double delta = u.grid.delta();
  GridFunction out = zero_grid_function(u.grid, u.dim);
  for (int i = 0; i + 1 < u.grid.n; ++i) {
    const auto vi = u.node_values(i);
    const auto vj = u.node_values(i + 1);
    const auto oi = out.node_values(i);
    auto oj = out.node_values(i + 1);
    for (int c = 0; c < u.dim; ++c)
      oj[c] = oi[c] + 0.5 * delta * (vi[c] + vj[c]);
  }
  return out;
}

GridFunction discrete_derivative(const GridFunction& u) {
  if (u.grid.n < 2) throw ValidationError("need at least 2 nodes");
  const double delta = u.grid.delta();
  GridFunction out = zero_grid_function(u.grid, u.dim);
  for (int i = 0; i + 1 < u.grid.n; ++i) {
    const auto vi = u.node_values(i);
    const auto vj = u.node_values(i + 1);
    auto oi = out.node_values(i);
    for (int c = 0; c < u.dim; ++c) oi[c] = (vj[c] - vi[c]) / delta;
  }
  auto last = out.node_values(u.grid.n - 1);
  const auto prev = out.node_values(u.grid.n - 2);
  std::copy(prev.begin(), prev.end(), last.begin());
  return out;
}

std::vector<double> cell_averages(const GridFunction& u) {
  std::vector<double> out(static_cast<size_t>(u.grid.n - 1) * u.dim);
  for (int i = 0; i + 1 < u.grid.n; ++i) {
    const auto vi = u.node_values(i);
    const auto vj = u.node_values(i + 1);
    for (int c = 0; c < u.dim; ++c)
      out[static_cast<size_t>(i) * u.dim + c] = 0.5 * (vi[c] + vj[c]);
  }
  return out;
}

HistorySegment history_at(const GridFunction& u, double t, double h) {
  const Grid& g = u.grid;
  const double delta = g.delta();
  if (t < -1e-12 || t > g.b + 4.0 * delta * 1e-12)
    throw OutOfDomain("history time outside [0,T]");
  const int m = history_cells(delta, h);
  Grid sg = make_grid(-h, 0.0, m + 1);
  GridFunction fn = zero_grid_function(sg, u.dim);

  // Fast path: t on a node, segment nodes coincide with trajectory nodes.
  const double pos = (t - g.a) / delta;
  const int i0 = static_cast<int>(std::llround(pos));
  if (i0 - m >= 0 && i0 < g.n && std::abs(pos - i0) < 1e-9) {
    std::copy(u.values.begin() + static_cast<size_t>(i0 - m) * u.dim,
              u.values.begin() + static_cast<size_t>(i0 + 1) * u.dim,
              fn.values.begin());
  } else {
    for (int j = 0; j <= m; ++j) {
      const auto v = eval_at(u, t + sg.node(j));
      std::copy(v.begin(), v.end(), fn.node_values(j).begin());
    }
  }
  return HistorySegment{std::move(fn), t};
}

NormBoundPair theta_norm_estimate(const GridFunction& u, WeightedNormParams p,
                                  double h) {
  if (!(p.rho > 0.0)) throw ValidationError("theta bound requires rho > 0");
  const Grid& g = u.grid;
  const double delta = g.delta();
  const int m = history_cells(delta, h);
  // First node with t >= 0 and a full history behind it.
  int start = static_cast<int>(std::ceil((0.0 - g.a) / delta - 1e-9));
  start = std::max(start, m);
  if (start >= g.n)
    throw ValidationError("trajectory too short for a history segment");

  const double origin = g.a;
  double acc = 0.0;
  const int count = g.n - start;
  for (int i = start; i < g.n; ++i) {
    const double t = g.node(i);
    HistorySegment seg = history_at(u, t, h);
    const double nh1 = weighted_h1_norm(seg.fn, WeightedNormParams{0.0});
    const double w = std::exp(-2.0 * p.rho * (t - origin));
    acc += trapezoid_weight(i - start, count) * delta * nh1 * nh1 * w;
  }
  NormBoundPair r;
  r.lhs = std::sqrt(std::max(acc, 0.0));
  r.rhs = weighted_h1_norm(u, p, origin) / std::sqrt(2.0 * p.rho);
  return r;
}

bool eval_lipschitz_check(const HistorySegment& u, ValphaSpec spec, double s,
                          double t) {
  const double ds = deriv_sup_norm(u.fn);
  if (ds > spec.alpha + 1e-9 * std::max(1.0, spec.alpha))
    throw NotInValpha("segment derivative sup-norm exceeds alpha");
  const auto us = eval_at(u.fn, s);
  const auto ut = eval_at(u.fn, t);
  double d = 0.0;
  for (int c = 0; c < u.fn.dim; ++c) d += (us[c] - ut[c]) * (us[c] - ut[c]);
  d = std::sqrt(d);
  const double bound = spec.alpha * std::abs(s - t);
  return d <= bound + 1e-9 + 1e-9 * bound;
}

double discrete_h1_inner(const GridFunction& u, const GridFunction& v) {
  if (u.grid.n != v.grid.n || u.dim != v.dim)
    throw DimensionMismatch("discrete H1 inner product shape mismatch");
  const double delta = u.grid.delta();
  const int n = u.grid.n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto a = u.node_values(i);
    const auto b = v.node_values(i);
    double dot = 0.0;
    for (int c = 0; c < u.dim; ++c) dot += a[c] * b[c];
    acc += trapezoid_weight(i, n) * delta * dot;
  }
  for (int i = 0; i + 1 < n; ++i) {
    const auto a0 = u.node_values(i);
    const auto a1 = u.node_values(i + 1);
    const auto b0 = v.node_values(i);
    const auto b1 = v.node_values(i + 1);
    double dot = 0.0;
    for (int c = 0; c < u.dim; ++c)
      dot += (a1[c] - a0[c]) * (b1[c] - b0[c]) / (delta * delta);
    acc += delta * dot;
  }
  return acc;
}

double discrete_h1_norm(const GridFunction& u) {
  return std::sqrt(std::max(discrete_h1_inner(u, u), 0.0));
}

double discrete_h1_dist(const GridFunction& u, const GridFunction& v) {
  if (u.grid.n != v.grid.n || u.dim != v.dim)
    throw DimensionMismatch("discrete H1 distance shape mismatch");
  GridFunction d = u;
  for (size_t k = 0; k < d.values.size(); ++k) d.values[k] -= v.values[k];
  return discrete_h1_norm(d);
}

namespace {

// Slope-parametrized quadratic for the metric projection. Unknowns are the
// left value c in R^d and the m cell slopes; node values are recovered as
// psi_i = c + delta * (s_0 + ... + s_{i-1}). The feasible set is a product
// of Euclidean balls of radius alpha, one per cell, so its projection is a
// per-cell radial clamp.
struct ProjectionProblem {
  int n, m, d;
  double delta;
  std::vector<double> w;       // trapezoid node weights
  const GridFunction* phi;
  std::vector<double> sigma;   // slopes of phi

  std::vector<double> node_values(const std::vector<double>& z) const {
    std::vector<double> psi(static_cast<size_t>(n) * d);
    for (int c = 0; c < d; ++c) psi[c] = z[c];
    for (int i = 1; i < n; ++i)
      for (int c = 0; c < d; ++c)
        psi[static_cast<size_t>(i) * d + c] =
            psi[static_cast<size_t>(i - 1) * d + c] +
            delta * z[static_cast<size_t>(i) * d + c];
    return psi;
  }

  double objective(const std::vector<double>& z) const {
    const auto psi = node_values(z);
    double val = 0.0;
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c) {
        const double r = psi[static_cast<size_t>(i) * d + c] -
                         phi->values[static_cast<size_t>(i) * d + c];
        val += w[i] * delta * r * r;
      }
    for (int j = 0; j < m; ++j)
      for (int c = 0; c < d; ++c) {
        const double r = z[static_cast<size_t>(j + 1) * d + c] -
                         sigma[static_cast<size_t>(j) * d + c];
        val += delta * r * r;
      }
    return val;
  }

  // grad has the same layout as z: [c block][slope blocks].
  void gradient(const std::vector<double>& z, std::vector<double>& grad,
                bool include_data) const {
    const auto psi = node_values(z);
    std::vector<double> resid(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c) {
        double r = psi[static_cast<size_t>(i) * d + c];
        if (include_data) r -= phi->values[static_cast<size_t>(i) * d + c];
        resid[static_cast<size_t>(i) * d + c] = w[i] * r;
      }
    // Suffix sums of weighted residuals drive the slope gradients.
    std::vector<double> suffix(d, 0.0);
    std::vector<double> total(d, 0.0);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < d; ++c)
        total[c] += resid[static_cast<size_t>(i) * d + c];
    for (int c = 0; c < d; ++c) grad[c] = 2.0 * delta * total[c];
    std::copy(total.begin(), total.end(), suffix.begin());
    for (int j = 0; j < m; ++j) {
      for (int c = 0; c < d; ++c)
        suffix[c] -= resid[static_cast<size_t>(j) * d + c];
      for (int c = 0; c < d; ++c) {
        double gslope = 2.0 * delta * delta * suffix[c];
        double r = z[static_cast<size_t>(j + 1) * d + c];
        if (include_data) r -= sigma[static_cast<size_t>(j) * d + c];
        gslope += 2.0 * delta * r;
        grad[static_cast<size_t>(j + 1) * d + c] = gslope;
      }
    }
  }

  void clamp_slopes(std::vector<double>& z, double alpha) const {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int c = 0; c < d; ++c) {
        const double v = z[static_cast<size_t>(j + 1) * d + c];
        s += v * v;
      }
      s = std::sqrt(s);
      if (s > alpha) {
        const double scale = alpha / s;
        for (int c = 0; c < d; ++c)
          z[static_cast<size_t>(j + 1) * d + c] *= scale;
      }
    }
  }
};

}  // namespace

GridFunction project_valpha(const GridFunction& phi, ValphaSpec spec) {
  if (!(spec.alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (deriv_sup_norm(phi) <= spec.alpha * (1.0 + 1e-12)) return phi;

  ProjectionProblem prob;
  prob.n = phi.grid.n;
  prob.m = prob.n - 1;
  prob.d = phi.dim;
  prob.delta = phi.grid.delta();
  prob.phi = &phi;
  prob.w.resize(prob.n);
  for (int i = 0; i < prob.n; ++i)
    prob.w[i] = trapezoid_weight(i, prob.n);
  prob.sigma.resize(static_cast<size_t>(prob.m) * prob.d);
  for (int j = 0; j < prob.m; ++j) {
    const auto a = phi.node_values(j);
    const auto b = phi.node_values(j + 1);
    for (int c = 0; c < prob.d; ++c)
      prob.sigma[static_cast<size_t>(j) * prob.d + c] =
          (b[c] - a[c]) / prob.delta;
  }

  const size_t dimz = static_cast<size_t>(prob.n) * prob.d;

  // Largest Hessian eigenvalue by power iteration (the Hessian-vector
  // product is the data-free gradient).
  double lip;
  {
    std::vector<double> v(dimz, 1.0), hv(dimz);
    double lam = 1.0;
    for (int it = 0; it < 60; ++it) {
      prob.gradient(v, hv, /*include_data=*/false);
      double nrm = 0.0;
      for (double x : hv) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) break;
      lam = nrm;
      for (size_t k = 0; k < dimz; ++k) v[k] = hv[k] / nrm;
    }
    lip = 1.05 * lam;
  }

  // Warm start: phi's left value with clamped slopes.
  std::vector<double> z(dimz);
  {
    const auto v0 = phi.node_values(0);
    for (int c = 0; c < prob.d; ++c) z[c] = v0[c];
    std::copy(prob.sigma.begin(), prob.sigma.end(), z.begin() + prob.d);
    prob.clamp_slopes(z, spec.alpha);
  }

  const double scale = std::max({1.0, sup_norm(phi), spec.alpha});
  const double tol = 1e-12 * scale;

  // FISTA with adaptive restart on the ball-constrained QP.
  std::vector<double> y = z, zprev = z, grad(dimz), cand(dimz);
  double tmom = 1.0;
  double fprev = prob.objective(z);
  // Rounding puts a floor under the fixed-point residual, so the step test
  // alone can spin forever; once the objective stops improving the iterate
  // is at the numerical optimum and we stop.
  double fbest = fprev;
  int stalled = 0;
  const int max_stall = 500;
  const int max_iters = 200000;
  for (int it = 0; it < max_iters; ++it) {
    prob.gradient(y, grad, /*include_data=*/true);
    for (size_t k = 0; k < dimz; ++k) cand[k] = y[k] - grad[k] / lip;
    prob.clamp_slopes(cand, spec.alpha);

    double step_inf = 0.0;
    for (size_t k = 0; k < dimz; ++k)
      step_inf = std::max(step_inf, std::abs(cand[k] - z[k]));

    const double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tmom * tmom));
    const double beta = (tmom - 1.0) / tnext;
    for (size_t k = 0; k < dimz; ++k)
      y[k] = cand[k] + beta * (cand[k] - zprev[k]);
    zprev = z;
    z = cand;
    tmom = tnext;

    const double f = prob.objective(z);
    if (f > fprev) {  // restart momentum
      y = z;
      tmom = 1.0;
    }
    fprev = f;

    if (f < fbest - 1e-14 * (1.0 + fbest)) {
      fbest = f;
      stalled = 0;
    } else if (++stalled >= max_stall) {
      break;
    }

    if (step_inf <= tol) {
      // Confirm stationarity at z itself, not at the extrapolated point.
      prob.gradient(z, grad, /*include_data=*/true);
      for (size_t k = 0; k < dimz; ++k) cand[k] = z[k] - grad[k] / lip;
      prob.clamp_slopes(cand, spec.alpha);
      double gm = 0.0;
      for (size_t k = 0; k < dimz; ++k)
        gm = std::max(gm, std::abs(cand[k] - z[k]));
      if (gm <= tol) break;
      y = z;
      tmom = 1.0;
    }
  }

  prob.clamp_slopes(z, spec.alpha);
  GridFunction out = zero_grid_function(phi.grid, phi.dim);
  const auto psi = prob.node_values(z);
  std::copy(psi.begin(), psi.end(), out.values.begin());
  return out;
}

}  // namespace dde
