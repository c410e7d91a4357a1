#include "dde/rhs.hpp"

#include <algorithm>
#include <cmath>

namespace dde {

double embedding_constant(double h) {
  return std::sqrt(h) + 1.0 / std::sqrt(h);
}

RhsModel make_constant_delay(const ConstantDelaySpec& spec) {
  if (spec.lags.empty()) throw ValidationError("need at least one lag");
  for (double lag : spec.lags)
    if (lag < 0.0 || lag > spec.h)
      throw LagOutOfRange("constant lag outside [0,h]");
  if (!std::is_sorted(spec.lags.begin(), spec.lags.end()))
    throw ValidationError("lags must be non-decreasing");

  RhsModel m;
  m.dim = spec.dim;
  m.h = spec.h;
  m.domain_note = "constant delay";
  const auto lags = spec.lags;
  const auto g = spec.g;
  m.eval = [lags, g](double t, const HistorySegment& phi) {
    std::vector<std::vector<double>> args;
    args.reserve(lags.size());
    for (double lag : lags) args.push_back(eval_at(phi.fn, -lag));
    return g(t, args);
  };
  const double cev = std::max(embedding_constant(spec.h), 1.0);
  const double base = spec.g_lipschitz * static_cast<double>(lags.size()) * cev;
  m.lipschitz_at = [base](double) { return base; };
  return m;
}

RhsModel make_academic(double h) {
  if (!(h > 0.0)) throw ValidationError("h must be positive");
  RhsModel m;
  m.dim = 1;
  m.h = h;
  m.domain_note = "x'(t) = x(t - |x(t)|)";
  m.eval = [h](double, const HistorySegment& phi) {
    if (phi.fn.dim != 1)
      throw DimensionMismatch("academic model requires d = 1");
    const double x0 = eval_at(phi.fn, 0.0)[0];
    const double lag = std::clamp(std::abs(x0), 0.0, h);
    return eval_at(phi.fn, -lag);
  };
  const double c = embedding_constant(h);
  const double sqrth = std::sqrt(h);
  m.lipschitz_at = [c, sqrth](double alpha) { return c + sqrth + alpha * c; };
  return m;
}

RhsModel make_state_delay(const StateDelaySpec& spec) {
  if (spec.delays.empty()) throw ValidationError("need a delay functional");
  if (spec.delays.size() != spec.delay_lipschitz.size())
    throw ValidationError("one Lipschitz constant per delay functional");
  for (double ci : spec.delay_lipschitz)
    if (ci < 0.0) throw ValidationError("delay Lipschitz constants >= 0");

  RhsModel m;
  m.dim = spec.dim;
  m.h = spec.h;
  m.domain_note = "state-dependent delay";
  m.clamped_delays = std::make_shared<std::atomic<long long>>(0);
  const auto delays = spec.delays;
  const auto g = spec.g;
  const double h = spec.h;
  auto counter = m.clamped_delays;
  m.eval = [delays, g, h, counter](double t, const HistorySegment& phi) {
    std::vector<std::vector<double>> args;
    args.reserve(delays.size());
    for (const auto& r : delays) {
      double ri = r(phi);
      if (ri < -h || ri > 0.0) {
        counter->fetch_add(1, std::memory_order_relaxed);
        ri = std::clamp(ri, -h, 0.0);
      }
      args.push_back(eval_at(phi.fn, ri));
    }
    return g(t, args);
  };
  const double c = embedding_constant(spec.h);
  const double sqrth = std::sqrt(spec.h);
  const double lg = spec.g_lipschitz;
  const auto cis = spec.delay_lipschitz;
  m.lipschitz_at = [c, sqrth, lg, cis](double alpha) {
    double sum = 0.0;
    for (double ci : cis) sum += c + sqrth + alpha * ci * c;
    return lg * sum;
  };
  return m;
}

double kernel_l1_norm(const GridFunction& k) {
  const double delta = k.grid.delta();
  double acc = 0.0;
  for (int i = 0; i < k.grid.n; ++i) {
    const double w = (i == 0 || i == k.grid.n - 1) ? 0.5 : 1.0;
    acc += w * delta * vec_norm(k.node_values(i));
  }
  return acc;
}

std::vector<double> integro_convolution(const IntegroDiffSpec& spec, double t,
                                        const HistorySegment& phi) {
  const Grid& sg = phi.fn.grid;
  const double delta = sg.delta();
  const int n = sg.n;
  if (t - spec.h < spec.kernel.grid.a - 1e-9 ||
      t > spec.kernel.grid.b + 1e-9)
    throw KernelDomain("kernel not defined on [t-h, t]");
  std::vector<double> acc(spec.dim, 0.0);
  // s runs over [0,h]; phi(-s) walks the segment nodes.
  for (int j = 0; j < n; ++j) {
    const double s = -sg.node(n - 1 - j);  // 0, delta, ..., h
    const auto gval = spec.g(t, eval_at(phi.fn, -s));
    const auto kval = eval_at(spec.kernel, t - s);
    const double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
    if (spec.mode == KernelMode::Scalar) {
      if (spec.kernel.dim != 1)
        throw DimensionMismatch("scalar kernel mode needs a 1-d kernel");
      for (int c = 0; c < spec.dim; ++c)
        acc[c] += w * delta * gval[c] * kval[0];
    } else {
      if (spec.kernel.dim != spec.dim)
        throw DimensionMismatch("componentwise kernel needs matching dims");
      for (int c = 0; c < spec.dim; ++c)
        acc[c] += w * delta * gval[c] * kval[c];
    }
  }
  return acc;
}

RhsModel make_integro(const IntegroDiffSpec& spec) {
  if (!spec.F.eval || !spec.G3 || !spec.g)
    throw ValidationError("integro spec needs F, G3 and g");
  RhsModel m;
  m.dim = spec.dim;
  m.h = spec.h;
  m.domain_note = "integro-differential with delay kernel";
  auto sp = std::make_shared<IntegroDiffSpec>(spec);
  m.eval = [sp](double t, const HistorySegment& phi) {
    const auto q = integro_convolution(*sp, t, phi);
    const auto f = sp->F.eval(t, phi);
    auto out = sp->G3(t, phi, q);
    for (int c = 0; c < sp->dim; ++c) out[c] += f[c];
    return out;
  };
  const double c = embedding_constant(spec.h);
  const double l1 = kernel_l1_norm(spec.kernel);
  const double lg3 = spec.g3_lipschitz;
  const double lg = spec.g_lipschitz;
  auto lf = spec.F.lipschitz_at;
  m.lipschitz_at = [lf, lg3, lg, c, l1](double alpha) {
    return lf(alpha) + lg3 * (1.0 + lg * c * l1);
  };
  return m;
}

}  // namespace dde
