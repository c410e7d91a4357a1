#include "dde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace dde {

namespace {

const char* to_string(DependenceKind k) {
  return k == DependenceKind::InitialDatum ? "InitialDatum" : "RightHandSide";
}

// Snap a horizon down onto the grid, keeping at least one cell.
double snap_down(double t, double delta) {
  const int k = std::max(1, static_cast<int>(std::floor(t / delta + 1e-9)));
  return k * delta;
}

GridFunction restrict_to(const GridFunction& u, double t1) {
  const double delta = u.grid.delta();
  const int idx = static_cast<int>(std::llround((t1 - u.grid.a) / delta));
  Grid g = make_grid(u.grid.a, u.grid.node(idx), idx + 1);
  return make_grid_function(
      g, u.dim,
      std::vector<double>(u.values.begin(),
                          u.values.begin() +
                              static_cast<size_t>(idx + 1) * u.dim));
}

double difference_norm(const GridFunction& u, const GridFunction& v,
                       double t1, double rho) {
  GridFunction ur = restrict_to(u, t1);
  const GridFunction vr = restrict_to(v, t1);
  for (size_t k = 0; k < ur.values.size(); ++k) ur.values[k] -= vr.values[k];
  return weighted_h1_norm(ur, WeightedNormParams{rho}, ur.grid.a);
}

}  // namespace

DependenceReport dependence_on_datum(const RhsModel& g, const Prehistory& phi,
                                     const std::vector<Prehistory>& perturbed,
                                     double T1, const SolverConfig& cfg) {
  DependenceReport rep;
  rep.bound_type = DependenceKind::InitialDatum;
  const SolutionRecord base = solve_global(phi, g, T1 > 0 ? T1 : 1.0, cfg);
  const double rho = base.rho_used.back();
  const double delta = phi.fn.grid.delta();
  for (const Prehistory& psi : perturbed) {
    DependencePair pair;
    GridFunction d = phi.fn;
    for (size_t k = 0; k < d.values.size(); ++k)
      d.values[k] -= psi.fn.values[k];
    pair.perturbation = weighted_h1_norm(d, WeightedNormParams{0.0});
    if (pair.perturbation == 0.0) {
      pair.skipped = true;
      rep.pairs.push_back(pair);
      continue;
    }
    const SolutionRecord other = solve_global(psi, g, T1, cfg);
    const double common = snap_down(0.9 * std::min(base.T0, other.T0), delta);
    rep.T1 = common;
    pair.difference =
        difference_norm(base.trajectory, other.trajectory, common, rho);
    pair.ratio = pair.difference / pair.perturbation;
    rep.C_observed = std::max(rep.C_observed, pair.ratio);
    rep.pairs.push_back(pair);
  }
  if (rep.pairs.empty()) throw ValidationError("no perturbations supplied");
  return rep;
}

DependenceReport dependence_on_rhs(const RhsModel& f, const RhsModel& g,
                                   const Prehistory& phi, double T1,
                                   const SolverConfig& cfg) {
  DependenceReport rep;
  rep.bound_type = DependenceKind::RightHandSide;
  const SolutionRecord uf = solve_global(phi, f, T1, cfg);
  const SolutionRecord ug = solve_global(phi, g, T1, cfg);
  const double rho = uf.rho_used.back();
  const double delta = phi.fn.grid.delta();
  const double common = snap_down(0.9 * std::min(uf.T0, ug.T0), delta);
  rep.T1 = common;

  // Sup defect along the F-solution, unprojected histories.
  const GridFunction& u = uf.trajectory;
  const int m = phi.fn.grid.n - 1;
  const int last =
      static_cast<int>(std::llround((common - u.grid.a) / delta));
  double defect = 0.0;
  for (int i = m; i <= last; ++i) {
    const double t = u.grid.node(i);
    const HistorySegment seg = history_at(u, t, f.h);
    const auto fv = f.eval(t, seg);
    const auto gv = g.eval(t, seg);
    double s = 0.0;
    for (int c = 0; c < f.dim; ++c) s += (fv[c] - gv[c]) * (fv[c] - gv[c]);
    defect = std::max(defect, std::sqrt(s));
  }

  DependencePair pair;
  pair.perturbation = defect;
  pair.difference =
      difference_norm(uf.trajectory, ug.trajectory, common, rho);
  if (defect == 0.0) {
    pair.ratio = 0.0;  // exact match
  } else {
    pair.ratio = pair.difference / defect;
    rep.C_observed = std::max(rep.C_observed, pair.ratio);
  }
  rep.pairs.push_back(pair);
  return rep;
}

GridFunction random_grid_function(std::mt19937_64& rng, double a, double b,
                                  int n, int dim, double amplitude) {
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  GridFunction u = zero_grid_function(make_grid(a, b, n), dim);
  for (double& v : u.values) v = dist(rng);
  return u;
}

GridFunction random_valpha_member(std::mt19937_64& rng, double h, int n,
                                  int dim, double alpha) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  GridFunction u = zero_grid_function(make_grid(-h, 0.0, n), dim);
  const double delta = u.grid.delta();
  for (int c = 0; c < dim; ++c) u.node_values(0)[c] = dist(rng);
  for (int i = 1; i < n; ++i) {
    std::vector<double> s(dim);
    double nrm = 0.0;
    for (int c = 0; c < dim; ++c) {
      s[c] = alpha * dist(rng);
      nrm += s[c] * s[c];
    }
    nrm = std::sqrt(nrm);
    if (nrm > alpha)
      for (double& x : s) x *= alpha / nrm;
    const auto prev = u.node_values(i - 1);
    auto cur = u.node_values(i);
    for (int c = 0; c < dim; ++c) cur[c] = prev[c] + delta * s[c];
  }
  return u;
}

CertificationReport certify_bounds(std::uint64_t seed,
                                   const SweepSpec& sizes) {
  CertificationReport rep;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> nodes(2, std::max(2, sizes.max_nodes));

  auto add = [&rep](const std::string& name, int samples, double worst) {
    BoundCertificate c;
    c.name = name;
    c.samples = samples;
    c.worst_margin = worst;
    c.pass = samples == 0 || worst >= -1e-9;
    rep.bounds.push_back(c);
    rep.all_pass = rep.all_pass && c.pass;
  };

  if (sizes.samples <= 0 || sizes.rhos.empty()) {
    return rep;  // empty sweep: empty report, pass
  }

  // Sobolev embedding (unweighted, rho-independent).
  {
    double worst = 1e300;
    for (int k = 0; k < sizes.samples; ++k) {
      const double a = -1.0 + 2.0 * unif(rng);
      const double len = 1e-2 + sizes.max_span * unif(rng);
      const GridFunction u =
          random_grid_function(rng, a, a + len, nodes(rng), 1 + (k % 2));
      const EmbeddingCheck c = sobolev_embedding_check(u);
      worst = std::min(worst, c.rhs - c.lhs);
    }
    add("sobolev_embedding", sizes.samples, worst);
  }

  // Evaluation Hoelder bound, exponent 1/2.
  {
    double worst = 1e300;
    for (int k = 0; k < sizes.samples; ++k) {
      const double len = 1e-2 + sizes.max_span * unif(rng);
      const GridFunction u =
          random_grid_function(rng, 0.0, len, nodes(rng), 1 + (k % 2));
      const double h1 = weighted_h1_norm(u, WeightedNormParams{0.0});
      const double s = len * unif(rng);
      const double t = len * unif(rng);
      const auto us = eval_at(u, s);
      const auto ut = eval_at(u, t);
      double d = 0.0;
      for (int c = 0; c < u.dim; ++c) d += (us[c] - ut[c]) * (us[c] - ut[c]);
      worst = std::min(worst,
                       std::sqrt(std::abs(s - t)) * h1 - std::sqrt(d));
    }
    add("eval_holder", sizes.samples, worst);
  }

  // Evaluation is alpha-Lipschitz in time on V_alpha.
  {
    double worst = 1e300;
    for (int k = 0; k < sizes.samples; ++k) {
      const double h = 0.25 + sizes.max_span * unif(rng);
      const double alpha = 0.25 + 4.0 * unif(rng);
      const GridFunction u =
          random_valpha_member(rng, h, nodes(rng), 1 + (k % 2), alpha);
      const double s = -h * unif(rng);
      const double t = -h * unif(rng);
      const auto us = eval_at(u, s);
      const auto ut = eval_at(u, t);
      double d = 0.0;
      for (int c = 0; c < u.dim; ++c) d += (us[c] - ut[c]) * (us[c] - ut[c]);
      worst = std::min(worst, alpha * std::abs(s - t) - std::sqrt(d));
    }
    add("eval_lipschitz_valpha", sizes.samples, worst);
  }

  // Integration operator bounds and the history-map bound, per rho.
  for (double rho : sizes.rhos) {
    const WeightedNormParams p{rho};
    double worst_l2 = 1e300, worst_h1 = 1e300, worst_theta = 1e300;
    char tag[64];
    for (int k = 0; k < sizes.samples; ++k) {
      const double a = -1.0 + 2.0 * unif(rng);
      const double len = 1e-1 + sizes.max_span * unif(rng);
      // The grid must resolve the weight's decay scale 1/(2 rho), otherwise
      // the piecewise-linear resampling error of the antiderivative can
      // exceed the analytic margin, which shrinks like 1/rho.
      const int n = std::max<int>(nodes(rng),
                                  static_cast<int>(std::ceil(5.0 * rho * len)) + 1);
      const GridFunction u = random_grid_function(rng, a, a + len, n, 1 + (k % 2));
      const GridFunction iu = integrate_rho(u, p);
      const double nu = weighted_l2_norm(u, p);
      worst_l2 = std::min(worst_l2, nu / rho - weighted_l2_norm(iu, p));
      worst_h1 = std::min(worst_h1,
                          std::sqrt(1.0 + 1.0 / (rho * rho)) * nu -
                              weighted_h1_norm(iu, p));

      // History-map bound needs delta | h; build a compliant trajectory.
      std::uniform_int_distribution<int> mcells(2, 8);
      std::uniform_int_distribution<int> extra(1, 12);
      const int m = mcells(rng);
      const int e = extra(rng);
      const double h = 0.2 + unif(rng);
      const double delta = h / m;
      const GridFunction w = random_grid_function(
          rng, -h, e * delta, m + e + 1, 1 + (k % 2));
      const NormBoundPair tb = theta_norm_estimate(w, p, h);
      worst_theta = std::min(worst_theta, tb.rhs - tb.lhs);
    }
    std::snprintf(tag, sizeof tag, "integration_l2@rho=%g", rho);
    add(tag, sizes.samples, worst_l2);
    std::snprintf(tag, sizeof tag, "integration_h1@rho=%g", rho);
    add(tag, sizes.samples, worst_h1);
    std::snprintf(tag, sizeof tag, "history_map@rho=%g", rho);
    add(tag, sizes.samples, worst_theta);
  }

  return rep;
}

std::string certification_json(const CertificationReport& rep) {
  nlohmann::ordered_json j;
  j["seed"] = rep.seed;
  j["all_pass"] = rep.all_pass;
  j["bounds"] = nlohmann::ordered_json::array();
  for (const auto& b : rep.bounds) {
    nlohmann::ordered_json e;
    e["name"] = b.name;
    e["samples"] = b.samples;
    e["worst_margin"] = b.worst_margin;
    e["pass"] = b.pass;
    j["bounds"].push_back(e);
  }
  return j.dump(2) + "\n";
}

void write_dependence_csv(const DependenceReport& rep,
                          const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open for writing: " + path);
  os << "perturbation,difference,ratio,skipped\n";
  char buf[64];
  for (const auto& p : rep.pairs) {
    std::snprintf(buf, sizeof buf, "%.17g", p.perturbation);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", p.difference);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", p.ratio);
    os << buf << ',' << (p.skipped ? 1 : 0) << '\n';
  }
}

std::string dependence_json(const DependenceReport& rep) {
  nlohmann::ordered_json j;
  j["bound_type"] = to_string(rep.bound_type);
  j["C_observed"] = rep.C_observed;
  j["T1"] = rep.T1;
  j["pairs"] = rep.pairs.size();
  return j.dump(2) + "\n";
}

}  // namespace dde
