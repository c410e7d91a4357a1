#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dde/solver.hpp"

namespace dde {

enum class DependenceKind { InitialDatum, RightHandSide };

struct DependencePair {
  double perturbation = 0.0;  // size of the input perturbation
  double difference = 0.0;    // weighted H^1 norm of the solution difference
  double ratio = 0.0;
  bool skipped = false;       // zero perturbation
};

struct DependenceReport {
  std::vector<DependencePair> pairs;
  double C_observed = 0.0;
  DependenceKind bound_type = DependenceKind::InitialDatum;
  double T1 = 0.0;  // common comparison horizon actually used
};

// Solves for phi and each perturbed prehistory, reporting the ratio
// ||u - v||_{H^1_rho(-h,T1)} / ||Phi - Psi||_{H^1(-h,0)}. The comparison
// horizon is capped at 0.9 times the smaller solve horizon.
DependenceReport dependence_on_datum(const RhsModel& g, const Prehistory& phi,
                                     const std::vector<Prehistory>& perturbed,
                                     double T1, const SolverConfig& cfg);

// Solves the IVP for both right-hand sides, reporting
// ||u - v||_{H^1_rho(-h,T1)} / sup_t |F(t,u_t) - G(t,u_t)| along the
// F-solution u.
DependenceReport dependence_on_rhs(const RhsModel& f, const RhsModel& g,
                                   const Prehistory& phi, double T1,
                                   const SolverConfig& cfg);

struct SweepSpec {
  int samples = 200;
  std::vector<double> rhos = {0.5, 1.0, 2.0, 8.0};
  int max_nodes = 40;     // per random grid function
  double max_span = 2.0;  // grid length range (0, max_span]
};

struct BoundCertificate {
  std::string name;
  int samples = 0;
  double worst_margin = 0.0;  // min over samples of rhs - lhs
  bool pass = false;
};

struct CertificationReport {
  std::uint64_t seed = 0;
  std::vector<BoundCertificate> bounds;
  bool all_pass = true;
};

// Runs every operator-level bound sweep with the given seed: the Sobolev
// embedding, the evaluation Hoelder and V_alpha-Lipschitz bounds, the
// integration-operator norms, and the history-map norm. Reproducible
// bit-identically from the seed.
CertificationReport certify_bounds(std::uint64_t seed, const SweepSpec& sizes);

std::string certification_json(const CertificationReport& rep);
void write_dependence_csv(const DependenceReport& rep, const std::string& path);
std::string dependence_json(const DependenceReport& rep);

// Deterministic random piecewise-linear test function.
GridFunction random_grid_function(std::mt19937_64& rng, double a, double b,
                                  int n, int dim, double amplitude = 1.0);

// Random member of V_alpha on [-h,0]: integrated clamped random slopes.
GridFunction random_valpha_member(std::mt19937_64& rng, double h, int n,
                                  int dim, double alpha);

}  // namespace dde
