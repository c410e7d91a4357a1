#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "dde/solver.hpp"
#include "dde/verify.hpp"
#include "doctest.h"

using namespace dde;

namespace {

Prehistory constant_prehistory(double h, double delta, double c) {
  const int n = static_cast<int>(std::llround(h / delta)) + 1;
  GridFunction fn = zero_grid_function(make_grid(-h, 0.0, n), 1);
  for (double& v : fn.values) v = c;
  return make_prehistory(std::move(fn));
}

RhsModel zero_model(double h) {
  RhsModel m;
  m.dim = 1;
  m.h = h;
  m.eval = [](double, const HistorySegment&) {
    return std::vector<double>{0.0};
  };
  m.lipschitz_at = [](double) { return 0.0; };
  return m;
}

RhsModel constant_model(double h, double c) {
  RhsModel m;
  m.dim = 1;
  m.h = h;
  m.eval = [c](double, const HistorySegment&) {
    return std::vector<double>{c};
  };
  m.lipschitz_at = [](double) { return 0.0; };
  return m;
}

// x'(t) = coeff * x(t - h).
RhsModel lagged_linear(double h, double coeff) {
  ConstantDelaySpec spec;
  spec.h = h;
  spec.dim = 1;
  spec.lags = {h};
  spec.g = [coeff](double, const std::vector<std::vector<double>>& a) {
    return std::vector<double>{coeff * a[0][0]};
  };
  spec.g_lipschitz = std::abs(coeff);
  return make_constant_delay(spec);
}

// Zero-lag quadratic rhs x'(t) = x(t)^2; only locally Lipschitz, modeled
// with a derivative-bound-dependent constant.
RhsModel quadratic_model(double h) {
  RhsModel m;
  m.dim = 1;
  m.h = h;
  m.eval = [](double, const HistorySegment& seg) {
    const double x = seg.fn.values.back();
    return std::vector<double>{x * x};
  };
  const double c = embedding_constant(h);
  m.lipschitz_at = [c, h](double alpha) {
    return 2.0 * (1.0 + alpha * h) * c;
  };
  return m;
}

GridFunction zero_on_prehistory_noise(std::mt19937_64& rng, const Grid& g,
                                      int m, double amplitude) {
  GridFunction v = zero_grid_function(g, 1);
  std::uniform_real_distribution<double> unif(-amplitude, amplitude);
  for (int i = m + 1; i < g.n; ++i) v.values[i] = unif(rng);
  return v;
}

}  // namespace

TEST_CASE("prehistory extension") {
  const Prehistory c = constant_prehistory(1.0, 0.1, 3.0);
  const ExtendedPrehistory ec = extend_prehistory(c, 2.0);
  CHECK(ec.fn.grid.b == doctest::Approx(2.0));
  for (double v : ec.fn.values) CHECK(v == doctest::Approx(3.0));

  GridFunction lin = zero_grid_function(make_grid(-1.0, 0.0, 11), 1);
  for (int i = 0; i < 11; ++i) lin.values[i] = lin.grid.node(i);
  const ExtendedPrehistory el = extend_prehistory(make_prehistory(lin), 1.0);
  CHECK(eval_at(el.fn, -0.5)[0] == doctest::Approx(-0.5));
  CHECK(eval_at(el.fn, 0.7)[0] == doctest::Approx(0.0));

  std::mt19937_64 rng(59);
  for (int k = 0; k < 50; ++k) {
    const GridFunction fn = random_valpha_member(
        rng, 1.0, 2 + static_cast<int>(rng() % 20), 1, 2.0);
    const Prehistory p = make_prehistory(fn);
    // Extend on a horizon the prehistory's spacing divides.
    const ExtendedPrehistory e = extend_prehistory(p, 3.0 * fn.grid.delta());
    CHECK(deriv_sup_norm(e.fn) == doctest::Approx(p.deriv_sup).epsilon(1e-12));
  }
}

TEST_CASE("weight selection") {
  CHECK(select_rho(0.0, 0.7, 1e6) == doctest::Approx(1.0));

  // theta^2 = 1/2 and L = 1: (1 + 1/r^2)/(2r) = 1/2 at the real root of
  // r^3 - r^2 - 1 = 0. Independent bisection on the cubic:
  double lo = 1.0, hi = 2.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * mid - mid * mid - 1.0 > 0.0 ? hi : lo) = mid;
  }
  const double root = 0.5 * (lo + hi);
  CHECK(root == doctest::Approx(1.4655712318).epsilon(1e-9));
  const double got = select_rho(1.0, std::sqrt(0.5), 1e6);
  CHECK(got == doctest::Approx(root).epsilon(1e-8));

  // Minimality and feasibility of the returned weight.
  for (double l : {1.0, 2.0, 5.0, 17.0}) {
    const double r = select_rho(l, 0.7, 1e9);
    const auto f = [l](double rho) {
      return (1.0 + 1.0 / (rho * rho)) * l * l / (2.0 * rho);
    };
    CHECK(f(r) <= 0.49 * (1.0 + 1e-9));
    if (r > 1.0) CHECK(f(r - 1e-6) > 0.49);
    CHECK(contraction_factor(l, r) <= 0.7 + 1e-9);
  }

  CHECK_THROWS_AS(select_rho(1e9, 0.7, 10.0), RhoOverflow);
}

TEST_CASE("one application of the solution operator") {
  const Prehistory phi = constant_prehistory(1.0, 0.05, 1.0);
  const ExtendedPrehistory phat = extend_prehistory(phi, 1.0);
  const GridFunction v0 = zero_grid_function(phat.fn.grid, 1);

  const GridFunction z = gamma_step(v0, phat, zero_model(1.0), 2.0, 2.0);
  for (double x : z.values) CHECK(x == 0.0);

  const GridFunction ct = gamma_step(v0, phat, constant_model(1.0, 3.0), 4.0, 2.0);
  for (int i = 0; i < ct.grid.n; ++i) {
    const double t = ct.grid.node(i);
    CHECK(ct.values[i] ==
          doctest::Approx(t <= 0.0 ? 0.0 : 3.0 * t).epsilon(1e-12));
  }
}

TEST_CASE("measured contraction matches the analytic factor") {
  const RhsModel g = lagged_linear(1.0, -1.0);
  const Prehistory phi = constant_prehistory(1.0, 0.05, 1.0);
  const ExtendedPrehistory phat = extend_prehistory(phi, 1.0);
  const double alpha = 2.0;
  const double l = g.lipschitz_at(alpha);
  const double rho = select_rho(l, 0.7, 1e6);
  const double factor = contraction_factor(l, rho);
  const WeightedNormParams p{rho};

  std::mt19937_64 rng(61);
  const int m = 20;
  for (int k = 0; k < 40; ++k) {
    const GridFunction v = zero_on_prehistory_noise(rng, phat.fn.grid, m, 0.5);
    const GridFunction w = zero_on_prehistory_noise(rng, phat.fn.grid, m, 0.5);
    const GridFunction gv = gamma_step(v, phat, g, alpha, rho);
    const GridFunction gw = gamma_step(w, phat, g, alpha, rho);
    GridFunction dg = gv, d = v;
    for (size_t q = 0; q < d.values.size(); ++q) {
      dg.values[q] -= gw.values[q];
      d.values[q] -= w.values[q];
    }
    const double den = weighted_h1_norm(d, p);
    const double num = weighted_h1_norm(dg, p);
    CHECK(num <= (factor + 0.05) * den);
  }
}

TEST_CASE("constant solution for a vanishing right-hand side") {
  const Prehistory phi = constant_prehistory(0.5, 0.05, 5.0);
  const SolutionRecord rec =
      solve_local(phi, zero_model(0.5), 1.0, 1.0, SolverConfig{0.05});
  CHECK(rec.status == SolveStatus::Global);
  for (double v : rec.trajectory.values) CHECK(v == doctest::Approx(5.0));
}

TEST_CASE("method of steps oracle") {
  SolverConfig cfg;
  cfg.delta = 1e-3;
  cfg.alpha1 = 2.0;
  const Prehistory phi = constant_prehistory(1.0, cfg.delta, 1.0);
  const SolutionRecord rec =
      solve_global(phi, lagged_linear(1.0, -1.0), 2.0, cfg);
  REQUIRE(rec.status == SolveStatus::Global);
  const int at1 = static_cast<int>(std::llround((1.0 + 1.0) / cfg.delta));
  const int at2 = static_cast<int>(std::llround((2.0 + 1.0) / cfg.delta));
  CHECK(std::abs(rec.trajectory.values[at1] - 0.0) <= 5e-3);
  CHECK(std::abs(rec.trajectory.values[at2] - (-0.5)) <= 5e-3);

  // Prehistory is reproduced bit-exactly.
  for (int i = 0; i <= 1000; ++i)
    CHECK(rec.trajectory.values[i] == phi.fn.values[i]);
}

TEST_CASE("residual scales first order in the spacing") {
  const RhsModel g = lagged_linear(1.0, -1.0);
  SolverConfig coarse;
  coarse.delta = 2e-3;
  coarse.alpha1 = 2.0;
  SolverConfig fine = coarse;
  fine.delta = 1e-3;
  const SolutionRecord rc =
      solve_global(constant_prehistory(1.0, coarse.delta, 1.0), g, 2.0, coarse);
  const SolutionRecord rf =
      solve_global(constant_prehistory(1.0, fine.delta, 1.0), g, 2.0, fine);
  CHECK(rc.residual <= 1e-2);
  const double ratio = rf.residual / rc.residual;
  CHECK(ratio >= 0.35);
  CHECK(ratio <= 0.65);
}

TEST_CASE("self-consistent delay example") {
  SolverConfig cfg;
  cfg.delta = 1e-2;
  cfg.alpha1 = 2.0;
  const Prehistory phi = constant_prehistory(1.0, cfg.delta, 1.0);
  const SolutionRecord rec = solve_global(phi, make_academic(1.0), 1.0, cfg);
  REQUIRE(rec.status == SolveStatus::Global);
  for (int i = 0; i < rec.trajectory.grid.n; ++i) {
    const double t = rec.trajectory.grid.node(i);
    const double want = t <= 0.0 ? 1.0 : 1.0 + t;
    CHECK(std::abs(rec.trajectory.values[i] - want) <= 1e-6);
  }
  CHECK(rec.residual <= 1e-6);
}

TEST_CASE("fixed point property and uniqueness surrogate") {
  SolverConfig cfg;
  cfg.delta = 1e-2;
  cfg.alpha1 = 2.0;
  const RhsModel g = lagged_linear(1.0, -1.0);
  const Prehistory phi = constant_prehistory(1.0, cfg.delta, 1.0);
  const double alpha = 2.0;
  const SolutionRecord rec = solve_local(phi, g, 2.0, alpha, cfg);
  REQUIRE(rec.status == SolveStatus::Global);

  const double rho = rec.rho_used.front();
  const ExtendedPrehistory phat = extend_prehistory(phi, 2.0);
  GridFunction v = rec.trajectory;
  for (size_t q = 0; q < v.values.size(); ++q)
    v.values[q] -= phat.fn.values[q];
  const GridFunction gv = gamma_step(v, phat, g, alpha, rho, 4.0 * alpha);
  GridFunction d = gv;
  for (size_t q = 0; q < d.values.size(); ++q) d.values[q] -= v.values[q];
  CHECK(weighted_h1_norm(d, {rho}) <= 2.0 * cfg.fp_tol);

  // Different initial iterates converge to the same fixed point.
  std::mt19937_64 rng(67);
  const int m = 100;
  const GridFunction start =
      zero_on_prehistory_noise(rng, phat.fn.grid, m, 0.3);
  const SolutionRecord rec2 = solve_local(phi, g, 2.0, alpha, cfg, &start);
  GridFunction gap = rec.trajectory;
  for (size_t q = 0; q < gap.values.size(); ++q)
    gap.values[q] -= rec2.trajectory.values[q];
  CHECK(weighted_h1_norm(gap, {rho}) <= 10.0 * cfg.fp_tol);
}

TEST_CASE("continuation stages agree on overlaps") {
  // Growing problem x' = +x(t-1): the slope passes 1.5 inside (1,2), so a
  // small alpha1 forces at least two stages.
  const RhsModel g = lagged_linear(1.0, 1.0);
  SolverConfig small;
  small.delta = 1e-2;
  small.alpha1 = 1.5;
  const Prehistory phi = constant_prehistory(1.0, small.delta, 1.0);
  const SolutionRecord staged = solve_global(phi, g, 3.0, small);
  REQUIRE(staged.status == SolveStatus::Global);
  CHECK(staged.alphas_used.size() >= 2);
  CHECK(staged.max_overlap_error <= 1e-8);

  SolverConfig big = small;
  big.alpha1 = 6.0;
  const SolutionRecord single = solve_global(phi, g, 3.0, big);
  REQUIRE(single.alphas_used.size() == 1);
  double gap = 0.0;
  for (size_t q = 0; q < single.trajectory.values.size(); ++q)
    gap = std::max(gap, std::abs(single.trajectory.values[q] -
                                 staged.trajectory.values[q]));
  CHECK(gap <= 1e-8);

  // Measured contraction stays below the certified factor at every stage.
  for (size_t s = 0; s < staged.alphas_used.size(); ++s) {
    const double factor = contraction_factor(
        g.lipschitz_at(staged.alphas_used[s]), staged.rho_used[s]);
    CHECK(staged.measured_contraction[s] < 1.0);
    CHECK(staged.measured_contraction[s] <= factor + 0.05);
  }
}

TEST_CASE("blow-up dichotomy") {
  SolverConfig cfg;
  cfg.delta = 0.01;
  cfg.alpha1 = 1.0;
  cfg.alpha_max = 1e4;
  // The alpha ladder reaches ~8e3, where the selected weight is ~3e7.
  cfg.rho_max = 1e9;
  const Prehistory phi = constant_prehistory(0.1, cfg.delta, 1.0);
  const SolutionRecord rec = solve_global(phi, quadratic_model(0.1), 2.0, cfg);
  CHECK(rec.status == SolveStatus::BlowUp);
  CHECK(rec.T0 >= 0.95);
  CHECK(rec.T0 <= 1.05);

  // The linear problem on the same budget reaches the final time.
  SolverConfig lin = cfg;
  lin.delta = 1e-2;
  lin.alpha1 = 2.0;
  const SolutionRecord ok = solve_global(constant_prehistory(1.0, 1e-2, 1.0),
                                         lagged_linear(1.0, -1.0), 2.0, lin);
  CHECK(ok.status == SolveStatus::Global);
  CHECK(ok.alphas_used.size() == 1);
}

TEST_CASE("record serialization") {
  const Prehistory phi = constant_prehistory(0.5, 0.05, 5.0);
  const SolutionRecord rec =
      solve_local(phi, zero_model(0.5), 1.0, 1.0, SolverConfig{0.05});
  const std::string j = metadata_json(rec);
  for (const char* key : {"\"status\"", "\"T0\"", "\"alphas_used\"",
                          "\"rho_used\"", "\"measured_contraction\"",
                          "\"residual\""})
    CHECK(j.find(key) != std::string::npos);
  CHECK(j.find("\"Global\"") != std::string::npos);
}
