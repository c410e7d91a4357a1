#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "dde/rhs.hpp"
#include "dde/verify.hpp"
#include "doctest.h"

using namespace dde;

namespace {

HistorySegment constant_segment(double h, int n, double c) {
  GridFunction fn = zero_grid_function(make_grid(-h, 0.0, n), 1);
  for (double& v : fn.values) v = c;
  return {fn, 0.0};
}

// Unweighted H^1 distance of two segments on the same grid.
double h1_gap(const HistorySegment& a, const HistorySegment& b) {
  GridFunction d = a.fn;
  for (size_t k = 0; k < d.values.size(); ++k) d.values[k] -= b.fn.values[k];
  return weighted_h1_norm(d, {0.0});
}

double gap_norm(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
  return std::sqrt(s);
}

ConstantDelaySpec neg_feedback() {
  ConstantDelaySpec spec;
  spec.h = 1.0;
  spec.dim = 1;
  spec.lags = {1.0};
  spec.g = [](double, const std::vector<std::vector<double>>& a) {
    return std::vector<double>{-a[0][0]};
  };
  spec.g_lipschitz = 1.0;
  return spec;
}

void lipschitz_sweep(const RhsModel& m, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (double alpha : {0.5, 1.0, 2.0, 8.0}) {
    const double l = m.lipschitz_at(alpha);
    for (int k = 0; k < pairs; ++k) {
      const int n = 3 + static_cast<int>(rng() % 18);
      const GridFunction a = random_valpha_member(rng, m.h, n, m.dim, alpha);
      const GridFunction b = random_valpha_member(rng, m.h, n, m.dim, alpha);
      const HistorySegment pa{a, 0.0}, pb{b, 0.0};
      const double lhs = gap_norm(m.eval(0.3, pa), m.eval(0.3, pb));
      CHECK(lhs <= l * h1_gap(pa, pb) + 1e-9);
    }
  }
  // Monotonicity of the constant oracle.
  double prev = 0.0;
  for (double alpha : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double l = m.lipschitz_at(alpha);
    CHECK(l >= prev - 1e-12);
    prev = l;
  }
}

}  // namespace

TEST_CASE("embedding constant") {
  CHECK(embedding_constant(1.0) == doctest::Approx(2.0));
  CHECK(embedding_constant(4.0) == doctest::Approx(2.5));
}

TEST_CASE("constant delay model") {
  const RhsModel m = make_constant_delay(neg_feedback());
  CHECK(m.eval(0.0, constant_segment(1.0, 11, 1.0))[0] ==
        doctest::Approx(-1.0));

  // Lag zero reduces to an ODE right-hand side.
  ConstantDelaySpec ode;
  ode.h = 1.0;
  ode.dim = 1;
  ode.lags = {0.0};
  ode.g = [](double, const std::vector<std::vector<double>>& a) {
    return a[0];
  };
  ode.g_lipschitz = 1.0;
  const RhsModel mo = make_constant_delay(ode);
  CHECK(mo.eval(0.0, constant_segment(1.0, 5, 2.0))[0] == doctest::Approx(2.0));

  ConstantDelaySpec bad = neg_feedback();
  bad.lags = {1.5};
  CHECK_THROWS_AS(make_constant_delay(bad), LagOutOfRange);

  lipschitz_sweep(m, 125, 1001);
}

TEST_CASE("academic model") {
  const RhsModel m = make_academic(1.0);
  CHECK(m.eval(0.0, constant_segment(1.0, 11, 0.0))[0] == doctest::Approx(0.0));
  CHECK(m.eval(0.0, constant_segment(1.0, 11, 1.0))[0] == doctest::Approx(1.0));
  CHECK(m.lipschitz_at(1.0) == doctest::Approx(2.0 + 1.0 + 2.0));
  lipschitz_sweep(m, 125, 1002);
}

TEST_CASE("state delay model and reductions") {
  // Constant functionals reduce exactly to constant delays.
  StateDelaySpec spec;
  spec.h = 1.0;
  spec.dim = 1;
  spec.delays = {[](const HistorySegment&) { return -1.0; }};
  spec.delay_lipschitz = {0.0};
  spec.g = [](double, const std::vector<std::vector<double>>& a) {
    return std::vector<double>{-a[0][0]};
  };
  spec.g_lipschitz = 1.0;
  const RhsModel sd = make_state_delay(spec);
  const RhsModel cd = make_constant_delay(neg_feedback());

  std::mt19937_64 rng(2020);
  for (int k = 0; k < 50; ++k) {
    const GridFunction u = random_valpha_member(rng, 1.0, 9, 1, 2.0);
    const HistorySegment seg{u, 0.0};
    CHECK(sd.eval(0.1, seg)[0] == cd.eval(0.1, seg)[0]);
  }

  // r(phi) = -|phi(0)| recovers the academic model.
  StateDelaySpec acad;
  acad.h = 1.0;
  acad.dim = 1;
  acad.delays = {[](const HistorySegment& s) {
    return -std::abs(s.fn.values.back());
  }};
  acad.delay_lipschitz = {1.0};
  acad.g = [](double, const std::vector<std::vector<double>>& a) {
    return a[0];
  };
  acad.g_lipschitz = 1.0;
  const RhsModel sa = make_state_delay(acad);
  const RhsModel ma = make_academic(1.0);
  for (int k = 0; k < 50; ++k) {
    const GridFunction u = random_valpha_member(rng, 1.0, 9, 1, 0.9);
    const HistorySegment seg{u, 0.0};
    CHECK(sa.eval(0.1, seg)[0] == doctest::Approx(ma.eval(0.1, seg)[0]).epsilon(1e-14));
  }

  // Clamp counter increments on out-of-range delays.
  StateDelaySpec wild = spec;
  wild.delays = {[](const HistorySegment&) { return -2.5; }};
  const RhsModel mw = make_state_delay(wild);
  (void)mw.eval(0.0, constant_segment(1.0, 5, 1.0));
  CHECK(mw.clamped_delays->load() == 1);

  lipschitz_sweep(sd, 125, 1003);
}

TEST_CASE("integro-differential model") {
  IntegroDiffSpec spec;
  spec.h = 1.0;
  spec.dim = 1;
  spec.F = make_constant_delay(neg_feedback());
  spec.G3 = [](double, const HistorySegment&, const std::vector<double>& w) {
    std::vector<double> out = w;
    for (double& x : out) x *= -0.5;
    return out;
  };
  spec.g3_lipschitz = 0.5;
  spec.g = [](double, const std::vector<double>& x) { return x; };
  spec.g_lipschitz = 1.0;
  // k == 1 on [-1, 2].
  GridFunction k1 = zero_grid_function(make_grid(-1.0, 2.0, 31), 1);
  for (double& v : k1.values) v = 1.0;
  spec.kernel = k1;

  // phi == 1, k == 1, g identity: Q = int_0^1 1 ds = 1.
  const auto seg = constant_segment(1.0, 11, 1.0);
  CHECK(integro_convolution(spec, 0.5, seg)[0] == doctest::Approx(1.0).epsilon(1e-13));

  // k == 0: eval = F + G3(.,.,0).
  IntegroDiffSpec z = spec;
  for (double& v : z.kernel.values) v = 0.0;
  const RhsModel mz = make_integro(z);
  CHECK(mz.eval(0.5, seg)[0] == doctest::Approx(-1.0).epsilon(1e-13));

  // Kernel domain check.
  IntegroDiffSpec narrow = spec;
  narrow.kernel = zero_grid_function(make_grid(0.0, 1.0, 11), 1);
  CHECK_THROWS_AS(integro_convolution(narrow, 0.5, seg), KernelDomain);

  lipschitz_sweep(make_integro(spec), 125, 1004);
}

TEST_CASE("convolution matches a dense quadrature oracle") {
  // Grid-aligned piecewise-linear kernel with a state-independent g: the
  // integrand is piecewise linear, so the exact integral is computable in
  // closed form (cell averages) independently of the convolution code.
  std::mt19937_64 rng(3030);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 10;
    const double h = 1.0;
    const double delta = h / m;
    GridFunction k = zero_grid_function(make_grid(-h, 1.0, 2 * m + 1), 1);
    for (double& v : k.values) v = unif(rng);
    const double c0 = unif(rng);

    IntegroDiffSpec spec;
    spec.h = h;
    spec.dim = 1;
    spec.F = make_constant_delay(neg_feedback());
    spec.G3 = [](double, const HistorySegment&, const std::vector<double>& w) {
      return w;
    };
    spec.g3_lipschitz = 1.0;
    spec.g = [c0](double, const std::vector<double>&) {
      return std::vector<double>{c0};
    };
    spec.g_lipschitz = 0.0;
    spec.kernel = k;

    GridFunction phi = random_valpha_member(rng, h, m + 1, 1, 2.0);
    const double t = delta * static_cast<int>(rng() % (m + 1));

    // Oracle: c0 * int_{t-h}^{t} k = c0 * sum of cell averages * delta.
    double want = 0.0;
    const int first =
        static_cast<int>(std::llround((t - h - k.grid.a) / delta));
    for (int i = first; i < first + m; ++i)
      want += 0.5 * (k.values[i] + k.values[i + 1]) * delta;
    want *= c0;

    const double got = integro_convolution(spec, t, {phi, t})[0];
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("kernel L1 norm") {
  GridFunction k = zero_grid_function(make_grid(0.0, 1.0, 3), 1);
  k.values = {1.0, -1.0, 1.0};
  // Trapezoid of |k| at nodes: (0.5 + 1 + 0.5) * 0.5 = 1.
  CHECK(kernel_l1_norm(k) == doctest::Approx(1.0));
}
