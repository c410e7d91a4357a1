#include "dde/grid_fn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace dde {

namespace {

// Exact moments M_k = int_0^delta tau^k e^{-x tau/delta} dtau / delta^{k+1}
// for k = 0,1,2, i.e. the dimensionless factors
//   phi0(x) = (1 - e^{-x}) / x
//   phi1(x) = (1 - (1+x) e^{-x}) / x^2
//   phi2(x) = (2 - (2+2x+x^2) e^{-x}) / x^3
// with phi0(0)=1, phi1(0)=1/2, phi2(0)=1/3. Below the series threshold the
// closed forms cancel catastrophically, so a truncated alternating series is
// used instead.
struct Moments {
  double phi0, phi1, phi2;
};

Moments exp_moments(double x) {
  Moments m{};
  if (x < 0.5) {
    // phi0 = sum (-x)^k / (k+1)!
    // phi1 = sum (-1)^k (k+1) x^k / (k+2)!
    // phi2 = sum (-1)^k (k+1)(k+2) x^k / (k+3)!
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    double xk = 1.0;         // (-x)^k magnitude with sign folded in
    double fact = 1.0;       // k!
    for (int k = 0; k < 24; ++k) {
      const double fk1 = fact * (k + 1);             // (k+1)!
      const double fk2 = fk1 * (k + 2);              // (k+2)!
      const double fk3 = fk2 * (k + 3);              // (k+3)!
      p0 += xk / fk1;
      p1 += xk * (k + 1) / fk2;
      p2 += xk * (k + 1) * (k + 2) / fk3;
      xk *= -x;
      fact = fk1;
      if (std::abs(xk) < 1e-20 * fact) break;
    }
    m.phi0 = p0;
    m.phi1 = p1;
    m.phi2 = p2;
  } else {
    const double e = std::exp(-x);
    m.phi0 = (1.0 - e) / x;
    m.phi1 = (1.0 - (1.0 + x) * e) / (x * x);
    m.phi2 = (2.0 - (2.0 + 2.0 * x + x * x) * e) / (x * x * x);
  }
  return m;
}

void check_valid(const GridFunction& u) {
  if (u.values.size() != static_cast<size_t>(u.grid.n) * u.dim)
    throw ValidationError("grid function value count does not match grid");
  for (double v : u.values)
    if (!std::isfinite(v)) throw ValidationError("non-finite node value");
}

}  // namespace

Grid make_grid(double a, double b, int n) {
  if (!(a < b)) throw ValidationError("grid requires a < b");
  if (n < 2) throw ValidationError("grid requires n >= 2");
  if (!std::isfinite(a) || !std::isfinite(b))
    throw ValidationError("grid endpoints must be finite");
  return Grid{a, b, n};
}

GridFunction make_grid_function(Grid grid, int dim,
                                std::vector<double> values) {
  if (dim < 1) throw ValidationError("state dimension must be positive");
  GridFunction u{grid, dim, std::move(values)};
  check_valid(u);
  return u;
}

GridFunction zero_grid_function(Grid grid, int dim) {
  return GridFunction{grid, dim,
                      std::vector<double>(static_cast<size_t>(grid.n) * dim)};
}

Prehistory make_prehistory(GridFunction fn) {
  if (!(fn.grid.b == 0.0))
    throw ValidationError("prehistory grid must end exactly at 0");
  if (!(fn.grid.a < 0.0))
    throw ValidationError("prehistory grid must start at -h with h > 0");
  const double ds = deriv_sup_norm(fn);
  return Prehistory{std::move(fn), ds};
}

double vec_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double weighted_l2_norm(const GridFunction& u, WeightedNormParams p,
                        double origin) {
  const Grid& g = u.grid;
  const double delta = g.delta();
  const double x = 2.0 * p.rho * delta;
  const Moments m = exp_moments(x);
  double total = 0.0;
  for (int i = 0; i + 1 < g.n; ++i) {
    // Per component on this cell: (v + s*tau)^2 = A + B tau + C tau^2.
    double A = 0.0, B = 0.0, C = 0.0;
    const auto vi = u.node_values(i);
    const auto vj = u.node_values(i + 1);
    for (int c = 0; c < u.dim; ++c) {
      const double v = vi[c];
      const double s = (vj[c] - vi[c]) / delta;
      A += v * v;
      B += 2.0 * v * s;
      C += s * s;
    }
    const double w = std::exp(-2.0 * p.rho * (g.node(i) - origin));
    total += w * delta * (A * m.phi0 + B * delta * m.phi1 +
                          C * delta * delta * m.phi2);
  }
  return std::sqrt(std::max(total, 0.0));
}

double weighted_l2_norm(const GridFunction& u, WeightedNormParams p) {
  return weighted_l2_norm(u, p, u.grid.a);
}

double weighted_l2_deriv_norm(const GridFunction& u, WeightedNormParams p,
                              double origin) {
  const Grid& g = u.grid;
  const double delta = g.delta();
  const Moments m = exp_moments(2.0 * p.rho * delta);
  double total = 0.0;
  for (int i = 0; i + 1 < g.n; ++i) {
    double A = 0.0;
    const auto vi = u.node_values(i);
    const auto vj = u.node_values(i + 1);
    for (int c = 0; c < u.dim; ++c) {
      const double s = (vj[c] - vi[c]) / delta;
      A += s * s;
    }
    const double w = std::exp(-2.0 * p.rho * (g.node(i) - origin));
    total += w * delta * A * m.phi0;
  }
  return std::sqrt(std::max(total, 0.0));
}

double weighted_l2_deriv_norm(const GridFunction& u, WeightedNormParams p) {
  return weighted_l2_deriv_norm(u, p, u.grid.a);
}

double weighted_h1_norm(const GridFunction& u, WeightedNormParams p,
                        double origin) {
  const double l2 = weighted_l2_norm(u, p, origin);
  const double dl2 = weighted_l2_deriv_norm(u, p, origin);
  return std::sqrt(l2 * l2 + dl2 * dl2);
}

double weighted_h1_norm(const GridFunction& u, WeightedNormParams p) {
  return weighted_h1_norm(u, p, u.grid.a);
}

double sup_norm(const GridFunction& u) {
  double best = 0.0;
  for (int i = 0; i < u.grid.n; ++i)
    best = std::max(best, vec_norm(u.node_values(i)));
  return best;
}

double deriv_sup_norm(const GridFunction& u) {
  const double delta = u.grid.delta();
  double best = 0.0;
  for (int i = 0; i + 1 < u.grid.n; ++i) {
    double s = 0.0;
    const auto vi = u.node_values(i);
    const auto vj = u.node_values(i + 1);
    for (int c = 0; c < u.dim; ++c) {
      const double d = (vj[c] - vi[c]) / delta;
      s += d * d;
    }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

EmbeddingCheck sobolev_embedding_check(const GridFunction& u) {
  const double len = u.grid.b - u.grid.a;
  const double h1 = weighted_h1_norm(u, WeightedNormParams{0.0});
  EmbeddingCheck r;
  r.lhs = sup_norm(u);
  r.rhs = (std::sqrt(len) + 1.0 / std::sqrt(len)) * h1;
  r.holds = r.lhs <= r.rhs + 1e-9 + 1e-9 * r.rhs;
  return r;
}

std::vector<double> eval_at(const GridFunction& u, double t) {
  const Grid& g = u.grid;
  const double delta = g.delta();
  const double slack = 4.0 * std::abs(delta) * 1e-12 + 1e-300;
  if (t < g.a - slack || t > g.b + slack)
    throw OutOfDomain("evaluation point outside grid interval");
  double pos = (t - g.a) / delta;
  int i = static_cast<int>(std::floor(pos));
  i = std::clamp(i, 0, g.n - 2);
  const double theta = std::clamp(pos - i, 0.0, 1.0);
  std::vector<double> out(u.dim);
  const auto vi = u.node_values(i);
  const auto vj = u.node_values(i + 1);
  for (int c = 0; c < u.dim; ++c) out[c] = vi[c] + theta * (vj[c] - vi[c]);
  return out;
}

void write_csv(const GridFunction& u, std::ostream& os) {
  os << 't';
  for (int c = 1; c <= u.dim; ++c) os << ",x_" << c;
  os << '\n';
  char buf[64];
  for (int i = 0; i < u.grid.n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", u.grid.node(i));
    os << buf;
    const auto v = u.node_values(i);
    for (int c = 0; c < u.dim; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", v[c]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

void write_csv_file(const GridFunction& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for writing: " + path);
  write_csv(u, os);
}

GridFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw ValidationError("empty CSV: missing header");
  int dim = 0;
  {
    std::stringstream hs(line);
    std::string field;
    if (!std::getline(hs, field, ',') || field != "t")
      throw ValidationError("CSV header must start with 't'");
    while (std::getline(hs, field, ',')) ++dim;
    if (dim < 1) throw ValidationError("CSV header has no value columns");
  }
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    int col = 0;
    while (std::getline(ls, field, ',')) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str())
        throw ValidationError("bad CSV number: " + field);
      if (col == 0)
        times.push_back(v);
      else
        values.push_back(v);
      ++col;
    }
    if (col != dim + 1)
      throw ValidationError("CSV row has wrong number of columns");
  }
  if (times.size() < 2) throw ValidationError("CSV needs at least two rows");
  Grid g = make_grid(times.front(), times.back(),
                     static_cast<int>(times.size()));
  return make_grid_function(g, dim, std::move(values));
}

GridFunction read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open: " + path);
  return read_csv(is);
}

}  // namespace dde
