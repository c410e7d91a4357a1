#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dde/operators.hpp"

namespace dde {

// Right-hand side G(t, phi) together with a Lipschitz-constant oracle:
// lipschitz_at(alpha) bounds |G(t,phi)-G(t,psi)| / ||phi-psi||_{H^1(-h,0)}
// over phi, psi in V_alpha, uniformly in t.
struct RhsModel {
  int dim = 1;
  double h = 1.0;
  std::function<std::vector<double>(double, const HistorySegment&)> eval;
  std::function<double(double)> lipschitz_at;
  std::string domain_note;
  // Incremented whenever a state-dependent delay had to be clamped into
  // [-h,0]; numerical noise must not abort a solve.
  std::shared_ptr<std::atomic<long long>> clamped_delays;
};

// Sobolev embedding constant of the interval [-h,0].
double embedding_constant(double h);

// x'(t) = g(t, x(t-t_1), ..., x(t-t_n)) with fixed lags in [0,h].
struct ConstantDelaySpec {
  double h = 1.0;
  int dim = 1;
  std::vector<double> lags;
  std::function<std::vector<double>(double,
                                    const std::vector<std::vector<double>>&)>
      g;
  // |g(t,u.) - g(t,v.)| <= g_lipschitz * sum_j |u_j - v_j|
  double g_lipschitz = 0.0;
};

RhsModel make_constant_delay(const ConstantDelaySpec& spec);

// The scalar example x'(t) = x(t - |x(t)|) with the delay clamped into
// [0,h]; Lipschitz constant C + sqrt(h) + alpha*C with C the embedding
// constant of [-h,0].
RhsModel make_academic(double h);

// x'(t) = g(t, x(t + r_1(x_t)), ..., x(t + r_m(x_t))) with Lipschitz delay
// functionals r_i mapping into [-h,0].
struct StateDelaySpec {
  double h = 1.0;
  int dim = 1;
  std::vector<std::function<double(const HistorySegment&)>> delays;
  std::vector<double> delay_lipschitz;  // C_i, one per functional
  std::function<std::vector<double>(double,
                                    const std::vector<std::vector<double>>&)>
      g;
  double g_lipschitz = 0.0;
};

RhsModel make_state_delay(const StateDelaySpec& spec);

enum class KernelMode { Scalar, Componentwise };

// x'(t) = F(t,x_t) + G3(t, x_t, int_0^h g(t, x_t(-s)) k(t-s) ds).
struct IntegroDiffSpec {
  double h = 1.0;
  int dim = 1;
  RhsModel F;
  // Property (G): |G3(t,phi,w1)-G3(t,psi,w2)| <=
  //   g3_lipschitz * (||phi-psi||_{H^1} + |w1-w2|).
  std::function<std::vector<double>(double, const HistorySegment&,
                                    const std::vector<double>&)>
      G3;
  double g3_lipschitz = 0.0;
  std::function<std::vector<double>(double, const std::vector<double>&)> g;
  double g_lipschitz = 0.0;
  GridFunction kernel;  // on [-h, T]
  KernelMode mode = KernelMode::Scalar;
};

RhsModel make_integro(const IntegroDiffSpec& spec);

// Trapezoid quadrature of |k| over its grid (the L^1 norm used in the
// integro-differential Lipschitz chain).
double kernel_l1_norm(const GridFunction& k);

// The convolution term Q(t,phi) = int_0^h g(t, phi(-s)) k(t-s) ds,
// trapezoid on the segment grid. Exposed for testing.
std::vector<double> integro_convolution(const IntegroDiffSpec& spec, double t,
                                        const HistorySegment& phi);

}  // namespace dde
