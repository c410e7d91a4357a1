#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dde/rhs.hpp"

namespace dde {

struct SolverConfig {
  double delta = 1e-2;          // grid spacing; must divide h and T
  double theta = 0.7;           // contraction target in (0,1)
  double fp_tol = 1e-10;        // weighted H^1 norm of successive diffs
  double fp_sup_tol = 1e-9;     // sup-norm of successive diffs (see notes)
  int max_iters = 200;
  double alpha1 = 1.0;          // initial derivative bound
  double alpha_max = 1e6;       // continuation cap
  double rho_max = 1e6;         // weight cap

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

enum class SolveStatus { Global, BlowUp, BudgetExhausted };

std::string to_string(SolveStatus s);

struct SolutionRecord {
  GridFunction trajectory;  // on [-h, T0]
  SolveStatus status = SolveStatus::Global;
  double T0 = 0.0;
  std::vector<double> alphas_used;
  std::vector<double> rho_used;
  std::vector<double> measured_contraction;  // per-stage max reliable ratio
  double residual = 0.0;
  // Diagnostics, not part of the serialized record.
  int iterations_last_stage = 0;
  double max_overlap_error = 0.0;  // stage agreement on overlaps
};

// Prehistory extended by the constant value Phi(0) on (0,T].
struct ExtendedPrehistory {
  GridFunction fn;  // on [-h, T]
};

ExtendedPrehistory extend_prehistory(const Prehistory& phi, double T);

// Smallest rho >= 1 with (1 + 1/rho^2) * L^2 / (2 rho) <= theta^2, found by
// bisection to 1e-10. Throws RhoOverflow when rho_max is insufficient.
double select_rho(double l_alpha, double theta, double rho_max);

// Contraction factor (1 + 1/rho^2)^{1/2} * L * (2 rho)^{-1/2}.
double contraction_factor(double l_alpha, double rho);

// One application of the solution operator candidate:
// v -> integrate( t -> G(t, project_valpha(history of v + Phi_hat at t)) ),
// zero on [-h,0]. Right-hand-side values are radially clamped at
// slope_clamp (<= 0 disables); the clamp only ever acts beyond the interval
// a stage accepts, and keeps Picard iterates finite for right-hand sides
// that are only locally Lipschitz.
GridFunction gamma_step(const GridFunction& v, const ExtendedPrehistory& phat,
                        const RhsModel& g, double alpha, double rho,
                        double slope_clamp = 0.0);

// Picard iteration from v = 0 (or the supplied initial iterate) to the
// fixed point at a single alpha; the returned trajectory is truncated at
// the largest T1 with derivative sup-norm <= alpha.
SolutionRecord solve_local(const Prehistory& phi, const RhsModel& g, double T,
                           double alpha, const SolverConfig& cfg,
                           const GridFunction* initial_iterate = nullptr);

// alpha-doubling continuation with blow-up detection.
SolutionRecord solve_global(const Prehistory& phi, const RhsModel& g,
                            double T, const SolverConfig& cfg);

// Discrete defect: max over interior nodes of |u'(t_i) - G(t_i, u_{t_i})|
// with u' the forward cell slope.
double residual(const SolutionRecord& rec, const RhsModel& g);

// Metadata sidecar (JSON) with exactly the record's serialized fields.
void write_metadata_file(const SolutionRecord& rec, const std::string& path);
std::string metadata_json(const SolutionRecord& rec);

}  // namespace dde
