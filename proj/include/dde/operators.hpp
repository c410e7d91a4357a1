#pragma once

#include "dde/grid_fn.hpp"

namespace dde {

// A slice s -> u(t+s) of a trajectory, defined on [-h,0].
struct HistorySegment {
  GridFunction fn;
  double source_time = 0.0;

  double horizon() const { return -fn.grid.a; }
};

// Parameters of the convex set V_alpha: derivative bound alpha on history
// segments over a delay horizon h.
struct ValphaSpec {
  double alpha = 1.0;
  double h = 1.0;
};

// Causal integration t -> int_a^t u(s) ds. Exact per cell for the
// piecewise-linear input (trapezoid); the piecewise-quadratic antiderivative
// is resampled to piecewise-linear at the same nodes. The output vanishes at
// the left endpoint. Integration itself does not involve the weight; the
// params identify the weighted space the bound certificates are stated in.
GridFunction integrate_rho(const GridFunction& u, WeightedNormParams p);

// Piecewise-constant forward-difference slopes, re-expressed on the same
// grid: cell value at the left node, last node repeats the last cell.
// Composed after integrate_rho it recovers the cell averages of the input
// exactly (the discrete form of the inverse-derivative identity).
GridFunction discrete_derivative(const GridFunction& u);

// Cell averages (v_i + v_{i+1})/2, one entry of dim components per cell.
// The representative of u in the piecewise-constant derivative space.
std::vector<double> cell_averages(const GridFunction& u);

// History segment s -> u(t+s) on [-h,0], sampled by eval_at. Requires the
// grid spacing to divide h so segment nodes land on trajectory nodes when t
// is a node.
HistorySegment history_at(const GridFunction& u, double t, double h);

struct NormBoundPair {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Norm certificate for the history map: lhs is the L_{2,rho}(0,T)
// norm (trapezoid quadrature over node times) of t -> ||u_t||_{H^1(-h,0)},
// rhs is (2 rho)^{-1/2} times the weighted H^1 norm of u on [-h,T]. Both
// sides use the common weight origin u.grid.a.
NormBoundPair theta_norm_estimate(const GridFunction& u, WeightedNormParams p,
                                  double h);

// |u(s) - u(t)| <= alpha |s - t| for members of V_alpha. Throws NotInValpha
// if the segment's derivative sup-norm exceeds alpha.
bool eval_lipschitz_check(const HistorySegment& u, ValphaSpec spec, double s,
                          double t);

// Discrete H^1 inner product: trapezoid-weighted nodal dot products plus
// cell slope dot products, both scaled by delta.
double discrete_h1_inner(const GridFunction& u, const GridFunction& v);
double discrete_h1_norm(const GridFunction& u);
double discrete_h1_dist(const GridFunction& u, const GridFunction& v);

// Metric projection onto V_alpha in the discrete H^1 inner product: the
// unique minimizer of ||phi - psi||^2 subject to every cell slope of psi
// having Euclidean norm <= alpha. Identity (bit-exact) when phi already
// satisfies the constraint.
GridFunction project_valpha(const GridFunction& phi, ValphaSpec spec);

}  // namespace dde
