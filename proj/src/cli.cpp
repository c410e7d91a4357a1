#include "dde/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dde/problem_file.hpp"
#include "dde/verify.hpp"

namespace dde {

namespace {

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw ValidationError("cannot open for writing: " + tmp);
    os << content;
    if (!os) throw ValidationError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_csv_atomic(const GridFunction& u, const std::string& path) {
  std::ostringstream os;
  write_csv(u, os);
  write_atomic(path, os.str());
}

std::string with_extension(const std::string& path, const char* ext) {
  return std::filesystem::path(path).replace_extension(ext).string();
}

std::string dependence_pairs_csv(const DependenceReport& rep) {
  std::ostringstream os;
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
  return os.str();
}

ProblemFile load(const CliOptions& opt) {
  if (opt.file.empty())
    throw ValidationError("command '" + opt.command +
                          "' needs a problem file");
  ProblemFile pf = parse_problem_file(opt.file);
  if (opt.delta > 0.0) {
    pf.cfg.delta = opt.delta;
    // Re-run the invariant checks against the overridden spacing.
    pf = parse_problem(render(pf));
  }
  return pf;
}

int run_solve(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  const ProblemFile pf = load(opt);
  const RhsModel g = build_rhs(pf);
  const Prehistory phi = build_prehistory(pf);
  const SolutionRecord rec = solve_global(phi, g, pf.T, pf.cfg);

  std::string traj = !opt.out.empty()        ? opt.out
                     : !pf.out_trajectory.empty() ? pf.out_trajectory
                                                  : "solution.csv";
  std::string meta = !pf.out_metadata.empty() && opt.out.empty()
                         ? pf.out_metadata
                         : with_extension(traj, ".json");
  write_csv_atomic(rec.trajectory, traj);
  write_atomic(meta, metadata_json(rec));
  out << "status " << to_string(rec.status) << " T0 " << rec.T0
      << " residual " << rec.residual << "\n";
  if (rec.status != SolveStatus::Global) {
    err << "solution does not reach T = " << pf.T << " (status "
        << to_string(rec.status) << ", T0 = " << rec.T0 << ")\n";
    return 2;
  }
  return 0;
}

int run_certify(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  const CertificationReport rep = certify_bounds(opt.seed, SweepSpec{});
  const std::string json = certification_json(rep);
  if (!opt.out.empty())
    write_atomic(opt.out, json);
  else
    out << json;
  if (!rep.all_pass) {
    err << "bound certification failed\n";
    return 2;
  }
  return 0;
}

// Smooth bump vanishing at both ends of [-h,0], used for datum ladders.
GridFunction bump_like(const GridFunction& phi, double eps) {
  GridFunction b = phi;
  const double h = -phi.grid.a;
  for (int i = 0; i < b.grid.n; ++i) {
    const double s = std::sin(M_PI * (b.grid.node(i) + h) / h);
    auto row = b.node_values(i);
    const auto base = phi.node_values(i);
    for (int c = 0; c < b.dim; ++c) row[c] = base[c] + eps * s * s;
  }
  return b;
}

int run_depend(const CliOptions& opt, std::ostream& out, std::ostream& err,
               bool datum) {
  const ProblemFile pf = load(opt);
  const RhsModel f = build_rhs(pf);
  const Prehistory phi = build_prehistory(pf);

  DependenceReport rep;
  if (datum) {
    std::vector<Prehistory> ladder;
    for (double eps : {1e-2, 1e-3, 1e-4})
      ladder.push_back(make_prehistory(bump_like(phi.fn, eps)));
    rep = dependence_on_datum(f, phi, ladder, pf.T, pf.cfg);
  } else {
    rep.bound_type = DependenceKind::RightHandSide;
    for (double eps : {1e-2, 1e-3}) {
      RhsModel g = f;
      auto base_eval = f.eval;
      g.eval = [base_eval, eps](double t, const HistorySegment& seg) {
        auto v = base_eval(t, seg);
        for (double& x : v) x += eps * std::sin(t);
        return v;
      };
      const DependenceReport one = dependence_on_rhs(f, g, phi, pf.T, pf.cfg);
      rep.pairs.insert(rep.pairs.end(), one.pairs.begin(), one.pairs.end());
      rep.C_observed = std::max(rep.C_observed, one.C_observed);
      rep.T1 = one.T1;
    }
  }

  const std::string pairs = !opt.out.empty()      ? opt.out
                            : !pf.out_pairs.empty() ? pf.out_pairs
                                                    : "dependence.csv";
  const std::string report = !pf.out_report.empty() && opt.out.empty()
                                 ? pf.out_report
                                 : with_extension(pairs, ".json");
  write_atomic(pairs, dependence_pairs_csv(rep));
  write_atomic(report, dependence_json(rep));
  out << "C_observed " << rep.C_observed << " T1 " << rep.T1 << "\n";
  (void)err;
  return 0;
}

}  // namespace

int run(const CliOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (opt.command == "solve") return run_solve(opt, out, err);
    if (opt.command == "certify") return run_certify(opt, out, err);
    if (opt.command == "depend-datum") return run_depend(opt, out, err, true);
    if (opt.command == "depend-rhs") return run_depend(opt, out, err, false);
    err << "unknown command '" << opt.command << "'\n";
    return 1;
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dde
