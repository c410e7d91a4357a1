#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dde/errors.hpp"

namespace dde {

// Uniform grid of n nodes on [a,b], spacing (b-a)/(n-1).
struct Grid {
  double a = 0.0;
  double b = 1.0;
  int n = 2;

  double delta() const { return (b - a) / (n - 1); }
  double node(int i) const { return a + i * delta(); }
};

Grid make_grid(double a, double b, int n);

// Piecewise-linear, vector-valued function on a uniform grid. The weak
// derivative is the piecewise-constant forward-difference slope per cell.
struct GridFunction {
  Grid grid;
  int dim = 1;
  // Row-major: values[i*dim + c] is component c at node i.
  std::vector<double> values;

  std::span<const double> node_values(int i) const {
    return {values.data() + static_cast<size_t>(i) * dim,
            static_cast<size_t>(dim)};
  }
  std::span<double> node_values(int i) {
    return {values.data() + static_cast<size_t>(i) * dim,
            static_cast<size_t>(dim)};
  }
};

GridFunction make_grid_function(Grid grid, int dim, std::vector<double> values);
GridFunction zero_grid_function(Grid grid, int dim);

// Exponential weight rate of the measure e^{-2 rho t} dt.
struct WeightedNormParams {
  double rho = 0.0;
};

// Initial data on [-h,0] with finite derivative sup-norm.
struct Prehistory {
  GridFunction fn;
  double deriv_sup = 0.0;

  double horizon() const { return -fn.grid.a; }
};

Prehistory make_prehistory(GridFunction fn);

// Euclidean norm of a node value.
double vec_norm(std::span<const double> v);

// L2 norm with weight e^{-2 rho (t - origin)}. The shift by `origin`
// rescales the classical weighted norm by e^{rho*origin}; ratios and
// same-origin comparisons are unaffected. The default origin is the grid's
// left endpoint, which keeps all weights in (0,1].
double weighted_l2_norm(const GridFunction& u, WeightedNormParams p,
                        double origin);
double weighted_l2_norm(const GridFunction& u, WeightedNormParams p);

// Weighted L2 norm of the piecewise-constant derivative.
double weighted_l2_deriv_norm(const GridFunction& u, WeightedNormParams p,
                              double origin);
double weighted_l2_deriv_norm(const GridFunction& u, WeightedNormParams p);

double weighted_h1_norm(const GridFunction& u, WeightedNormParams p,
                        double origin);
double weighted_h1_norm(const GridFunction& u, WeightedNormParams p);

// For piecewise-linear functions the sup is attained at nodes.
double sup_norm(const GridFunction& u);

// Max over cells of |forward difference| / delta.
double deriv_sup_norm(const GridFunction& u);

struct EmbeddingCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Checks sup|u| <= ((b-a)^{1/2} + (b-a)^{-1/2}) * ||u||_{H^1} with the
// unweighted H^1 norm.
EmbeddingCheck sobolev_embedding_check(const GridFunction& u);

// Linear interpolation; exact at nodes. Throws OutOfDomain for t outside
// [a,b] (beyond one unit of roundoff).
std::vector<double> eval_at(const GridFunction& u, double t);

// CSV serialization: header "t,x_1,...,x_d", one row per node, 17
// significant digits (round-trips bit-exactly).
void write_csv(const GridFunction& u, std::ostream& os);
void write_csv_file(const GridFunction& u, const std::string& path);
GridFunction read_csv(std::istream& is);
GridFunction read_csv_file(const std::string& path);

}  // namespace dde
