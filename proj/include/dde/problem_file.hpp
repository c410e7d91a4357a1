#pragma once

#include <string>
#include <vector>

#include "dde/solver.hpp"

namespace dde {

// Parsed problem-definition file. Line-oriented `[section]` / `key = value`
// format with four sections: [problem], [prehistory], [solver], [output].
// Unknown keys are fatal; values are numbers, comma lists, or quoted paths.
struct ProblemFile {
  // [problem]
  std::string family;  // constant_delay | academic | state_delay | integro
  int dim = 1;
  double h = 1.0;
  double T = 1.0;
  std::vector<double> lags;          // constant_delay: lags in [0,h]
  std::vector<double> coeffs;        // constant_delay / state_delay weights
  double lag_const = 0.5;            // state_delay: the fixed first delay
  double f_coeff = 0.0;              // integro: F = f_coeff * x(t-h)
  double g3_coeff = 0.0;             // integro: G3 = g3_coeff * w
  std::string kernel;                // integro: named kernel, "exp"
  std::string kernel_mode = "scalar";

  // [prehistory]
  std::string prehistory_kind = "constant";  // constant | linear | samples | file
  std::vector<double> prehistory_value;      // constant c, or linear offset
  std::vector<double> prehistory_slope;      // linear slope b in a + b t
  std::vector<double> prehistory_samples;    // samples: node values (d = 1)
  std::string prehistory_path;               // file: CSV on [-h, 0]

  // [solver]
  SolverConfig cfg;

  // [output]
  std::string out_trajectory;
  std::string out_metadata;
  std::string out_report;
  std::string out_pairs;

  friend bool operator==(const ProblemFile&, const ProblemFile&) = default;
};

ProblemFile parse_problem(const std::string& text);
ProblemFile parse_problem_file(const std::string& path);

// Inverse of parse_problem up to formatting: render(parse(t)) reparses equal.
std::string render(const ProblemFile& pf);

RhsModel build_rhs(const ProblemFile& pf);
Prehistory build_prehistory(const ProblemFile& pf);

}  // namespace dde
