#include "dde/problem_file.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace dde {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// A raw value: either a quoted path or a list of numbers.
struct Value {
  bool is_string = false;
  std::string str;
  std::vector<double> nums;
};

Value parse_value(const std::string& raw, int line) {
  Value v;
  if (!raw.empty() && raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw ParseError(line, "unterminated quoted value");
    v.is_string = true;
    v.str = raw.substr(1, raw.size() - 2);
    return v;
  }
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    size_t pos = 0;
    double x;
    try {
      x = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw ParseError(line, "expected a number, got '" + item + "'");
    }
    if (pos != item.size())
      throw ParseError(line, "trailing characters in number '" + item + "'");
    v.nums.push_back(x);
  }
  if (v.nums.empty()) throw ParseError(line, "empty value");
  return v;
}

double scalar(const Value& v, int line) {
  if (v.is_string || v.nums.size() != 1)
    throw ParseError(line, "expected a single number");
  return v.nums[0];
}

std::string quoted(const Value& v, int line) {
  if (!v.is_string) throw ParseError(line, "expected a quoted path");
  return v.str;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt(xs[i]);
  }
  return out;
}

bool divides(double delta, double span) {
  const double q = span / delta;
  return std::abs(q - std::llround(q)) < 1e-9 && std::llround(q) >= 1;
}

void validate(const ProblemFile& pf) {
  static const std::set<std::string> families = {
      "constant_delay", "academic", "state_delay", "integro"};
  if (!families.count(pf.family))
    throw ValidationError("unknown family '" + pf.family + "'");
  if (pf.dim < 1) throw ValidationError("dim must be >= 1");
  if (!(pf.h > 0.0)) throw ValidationError("h must be positive");
  if (!(pf.T > 0.0)) throw ValidationError("T must be positive");
  if (!divides(pf.cfg.delta, pf.h))
    throw ValidationError("delta must divide h");
  if (!divides(pf.cfg.delta, pf.T))
    throw ValidationError("delta must divide T");

  if (pf.family == "constant_delay") {
    if (pf.lags.empty())
      throw ValidationError("constant_delay needs lags");
    if (pf.coeffs.size() != pf.lags.size())
      throw ValidationError("one coefficient per lag required");
  } else if (pf.family == "academic") {
    if (pf.dim != 1) throw ValidationError("academic family requires dim = 1");
  } else if (pf.family == "state_delay") {
    if (pf.coeffs.size() != 2)
      throw ValidationError("state_delay needs exactly two coefficients");
    if (pf.lag_const < 0.0 || pf.lag_const > pf.h)
      throw ValidationError("lag_const must lie in [0,h]");
  } else {  // integro
    if (pf.kernel != "exp")
      throw ValidationError("unknown kernel '" + pf.kernel + "'");
    if (pf.kernel_mode != "scalar" && pf.kernel_mode != "componentwise")
      throw ValidationError("kernel_mode must be scalar or componentwise");
  }

  const size_t d = static_cast<size_t>(pf.dim);
  if (pf.prehistory_kind == "constant") {
    if (pf.prehistory_value.size() != d)
      throw ValidationError("prehistory value needs dim components");
  } else if (pf.prehistory_kind == "linear") {
    if (pf.prehistory_value.size() != d || pf.prehistory_slope.size() != d)
      throw ValidationError("linear prehistory needs value and slope");
  } else if (pf.prehistory_kind == "samples") {
    if (pf.dim != 1)
      throw ValidationError("sampled prehistory supports dim = 1 only");
    const long long n = std::llround(pf.h / pf.cfg.delta) + 1;
    if (static_cast<long long>(pf.prehistory_samples.size()) != n)
      throw ValidationError("sampled prehistory needs one value per node");
  } else if (pf.prehistory_kind == "file") {
    if (!std::filesystem::exists(pf.prehistory_path))
      throw ValidationError("prehistory file does not exist: " +
                            pf.prehistory_path);
  } else {
    throw ValidationError("unknown prehistory kind '" + pf.prehistory_kind +
                          "'");
  }
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  ProblemFile pf;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  bool have_family = false;

  while (std::getline(is, raw)) {
    ++line;
    // Strip comments, respecting quoted values.
    bool in_quote = false;
    for (size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') in_quote = !in_quote;
      if (raw[i] == '#' && !in_quote) {
        raw.erase(i);
        break;
      }
    }
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, "malformed section header");
      section = s.substr(1, s.size() - 2);
      if (section != "problem" && section != "prehistory" &&
          section != "solver" && section != "output")
        throw ParseError(line, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string rhs = trim(s.substr(eq + 1));
    // Bare words (family names etc.) stay strings; everything else is a
    // quoted path or a number list.
    const auto val = [&]() { return parse_value(rhs, line); };
    const auto word = [&]() {
      if (!rhs.empty() && rhs.front() == '"') return quoted(val(), line);
      return rhs;
    };
    if (section.empty())
      throw ParseError(line, "key outside any section");

    if (section == "problem") {
      if (key == "family") {
        // Family names are bare words, allowed unquoted for readability.
        pf.family = word();
        have_family = true;
      } else if (key == "dim") {
        pf.dim = static_cast<int>(scalar(val(), line));
      } else if (key == "h") {
        pf.h = scalar(val(), line);
      } else if (key == "T") {
        pf.T = scalar(val(), line);
      } else if (key == "lags") {
        pf.lags = val().nums;
      } else if (key == "coeffs") {
        pf.coeffs = val().nums;
      } else if (key == "lag_const") {
        pf.lag_const = scalar(val(), line);
      } else if (key == "f_coeff") {
        pf.f_coeff = scalar(val(), line);
      } else if (key == "g3_coeff") {
        pf.g3_coeff = scalar(val(), line);
      } else if (key == "kernel") {
        pf.kernel = word();
      } else if (key == "kernel_mode") {
        pf.kernel_mode = word();
      } else {
        throw ParseError(line, "unknown key '" + key + "' in [problem]");
      }
    } else if (section == "prehistory") {
      if (key == "kind") {
        pf.prehistory_kind = word();
      } else if (key == "value") {
        pf.prehistory_value = val().nums;
      } else if (key == "slope") {
        pf.prehistory_slope = val().nums;
      } else if (key == "samples") {
        pf.prehistory_samples = val().nums;
      } else if (key == "file") {
        pf.prehistory_path = quoted(val(), line);
      } else {
        throw ParseError(line, "unknown key '" + key + "' in [prehistory]");
      }
    } else if (section == "solver") {
      if (key == "delta") {
        pf.cfg.delta = scalar(val(), line);
      } else if (key == "theta") {
        pf.cfg.theta = scalar(val(), line);
      } else if (key == "fp_tol") {
        pf.cfg.fp_tol = scalar(val(), line);
      } else if (key == "fp_sup_tol") {
        pf.cfg.fp_sup_tol = scalar(val(), line);
      } else if (key == "max_iters") {
        pf.cfg.max_iters = static_cast<int>(scalar(val(), line));
      } else if (key == "alpha1") {
        pf.cfg.alpha1 = scalar(val(), line);
      } else if (key == "alpha_max") {
        pf.cfg.alpha_max = scalar(val(), line);
      } else if (key == "rho_max") {
        pf.cfg.rho_max = scalar(val(), line);
      } else {
        throw ParseError(line, "unknown key '" + key + "' in [solver]");
      }
    } else {  // output
      if (key == "trajectory") {
        pf.out_trajectory = quoted(val(), line);
      } else if (key == "metadata") {
        pf.out_metadata = quoted(val(), line);
      } else if (key == "report") {
        pf.out_report = quoted(val(), line);
      } else if (key == "pairs") {
        pf.out_pairs = quoted(val(), line);
      } else {
        throw ParseError(line, "unknown key '" + key + "' in [output]");
      }
    }
  }

  if (!have_family) throw ValidationError("missing family in [problem]");
  validate(pf);
  return pf;
}

ProblemFile parse_problem_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open problem file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_problem(ss.str());
}

std::string render(const ProblemFile& pf) {
  std::ostringstream os;
  os << "[problem]\n";
  os << "family = " << pf.family << "\n";
  os << "dim = " << pf.dim << "\n";
  os << "h = " << fmt(pf.h) << "\n";
  os << "T = " << fmt(pf.T) << "\n";
  if (!pf.lags.empty()) os << "lags = " << fmt_list(pf.lags) << "\n";
  if (!pf.coeffs.empty()) os << "coeffs = " << fmt_list(pf.coeffs) << "\n";
  if (pf.family == "state_delay")
    os << "lag_const = " << fmt(pf.lag_const) << "\n";
  if (pf.family == "integro") {
    os << "f_coeff = " << fmt(pf.f_coeff) << "\n";
    os << "g3_coeff = " << fmt(pf.g3_coeff) << "\n";
    os << "kernel = " << pf.kernel << "\n";
    os << "kernel_mode = " << pf.kernel_mode << "\n";
  }
  os << "\n[prehistory]\n";
  os << "kind = " << pf.prehistory_kind << "\n";
  if (!pf.prehistory_value.empty())
    os << "value = " << fmt_list(pf.prehistory_value) << "\n";
  if (!pf.prehistory_slope.empty())
    os << "slope = " << fmt_list(pf.prehistory_slope) << "\n";
  if (!pf.prehistory_samples.empty())
    os << "samples = " << fmt_list(pf.prehistory_samples) << "\n";
  if (!pf.prehistory_path.empty())
    os << "file = \"" << pf.prehistory_path << "\"\n";
  os << "\n[solver]\n";
  os << "delta = " << fmt(pf.cfg.delta) << "\n";
  os << "theta = " << fmt(pf.cfg.theta) << "\n";
  os << "fp_tol = " << fmt(pf.cfg.fp_tol) << "\n";
  os << "fp_sup_tol = " << fmt(pf.cfg.fp_sup_tol) << "\n";
  os << "max_iters = " << pf.cfg.max_iters << "\n";
  os << "alpha1 = " << fmt(pf.cfg.alpha1) << "\n";
  os << "alpha_max = " << fmt(pf.cfg.alpha_max) << "\n";
  os << "rho_max = " << fmt(pf.cfg.rho_max) << "\n";
  os << "\n[output]\n";
  if (!pf.out_trajectory.empty())
    os << "trajectory = \"" << pf.out_trajectory << "\"\n";
  if (!pf.out_metadata.empty())
    os << "metadata = \"" << pf.out_metadata << "\"\n";
  if (!pf.out_report.empty()) os << "report = \"" << pf.out_report << "\"\n";
  if (!pf.out_pairs.empty()) os << "pairs = \"" << pf.out_pairs << "\"\n";
  return os.str();
}

RhsModel build_rhs(const ProblemFile& pf) {
  if (pf.family == "academic") return make_academic(pf.h);

  if (pf.family == "constant_delay") {
    ConstantDelaySpec spec;
    spec.h = pf.h;
    spec.dim = pf.dim;
    spec.lags = pf.lags;
    const auto coeffs = pf.coeffs;
    spec.g = [coeffs](double, const std::vector<std::vector<double>>& args) {
      std::vector<double> out(args[0].size(), 0.0);
      for (size_t j = 0; j < args.size(); ++j)
        for (size_t c = 0; c < out.size(); ++c)
          out[c] += coeffs[j] * args[j][c];
      return out;
    };
    double lg = 0.0;
    for (double c : coeffs) lg = std::max(lg, std::abs(c));
    spec.g_lipschitz = lg;
    return make_constant_delay(spec);
  }

  if (pf.family == "state_delay") {
    StateDelaySpec spec;
    spec.h = pf.h;
    spec.dim = pf.dim;
    const double lag = pf.lag_const;
    const double h = pf.h;
    spec.delays.push_back([lag](const HistorySegment&) { return -lag; });
    spec.delays.push_back([h](const HistorySegment& seg) {
      return -std::min(vec_norm(seg.fn.node_values(seg.fn.grid.n - 1)), h);
    });
    spec.delay_lipschitz = {0.0, 1.0};
    const auto coeffs = pf.coeffs;
    spec.g = [coeffs](double, const std::vector<std::vector<double>>& args) {
      std::vector<double> out(args[0].size(), 0.0);
      for (size_t j = 0; j < args.size(); ++j)
        for (size_t c = 0; c < out.size(); ++c)
          out[c] += coeffs[j] * args[j][c];
      return out;
    };
    spec.g_lipschitz = std::max(std::abs(coeffs[0]), std::abs(coeffs[1]));
    return make_state_delay(spec);
  }

  // integro
  IntegroDiffSpec spec;
  spec.h = pf.h;
  spec.dim = pf.dim;
  {
    ConstantDelaySpec f;
    f.h = pf.h;
    f.dim = pf.dim;
    f.lags = {pf.h};
    const double fc = pf.f_coeff;
    f.g = [fc](double, const std::vector<std::vector<double>>& args) {
      std::vector<double> out = args[0];
      for (double& x : out) x *= fc;
      return out;
    };
    f.g_lipschitz = std::abs(fc);
    spec.F = make_constant_delay(f);
  }
  const double g3c = pf.g3_coeff;
  spec.G3 = [g3c](double, const HistorySegment&,
                  const std::vector<double>& w) {
    std::vector<double> out = w;
    for (double& x : out) x *= g3c;
    return out;
  };
  spec.g3_lipschitz = std::abs(g3c);
  spec.g = [](double, const std::vector<double>& x) { return x; };
  spec.g_lipschitz = 1.0;
  // k(t) = e^{-t}, sampled on [-h, T] where the convolution evaluates it.
  {
    const int n =
        static_cast<int>(std::llround((pf.T + pf.h) / pf.cfg.delta)) + 1;
    GridFunction k = zero_grid_function(make_grid(-pf.h, pf.T, n), 1);
    for (int i = 0; i < n; ++i)
      k.values[i] = std::exp(-k.grid.node(i));
    spec.kernel = k;
  }
  spec.mode = pf.kernel_mode == "componentwise" ? KernelMode::Componentwise
                                                : KernelMode::Scalar;
  return make_integro(spec);
}

Prehistory build_prehistory(const ProblemFile& pf) {
  const double delta = pf.cfg.delta;
  const int n = static_cast<int>(std::llround(pf.h / delta)) + 1;
  const Grid g = make_grid(-pf.h, 0.0, n);

  if (pf.prehistory_kind == "file") {
    GridFunction fn = read_csv_file(pf.prehistory_path);
    if (std::abs(fn.grid.a + pf.h) > 1e-9 || std::abs(fn.grid.b) > 1e-9)
      throw ValidationError("prehistory file must cover exactly [-h, 0]");
    if (fn.dim != pf.dim)
      throw ValidationError("prehistory file dimension mismatch");
    return make_prehistory(std::move(fn));
  }

  GridFunction fn = zero_grid_function(g, pf.dim);
  if (pf.prehistory_kind == "constant") {
    for (int i = 0; i < n; ++i) {
      auto row = fn.node_values(i);
      for (int c = 0; c < pf.dim; ++c) row[c] = pf.prehistory_value[c];
    }
  } else if (pf.prehistory_kind == "linear") {
    for (int i = 0; i < n; ++i) {
      const double t = g.node(i);
      auto row = fn.node_values(i);
      for (int c = 0; c < pf.dim; ++c)
        row[c] = pf.prehistory_value[c] + pf.prehistory_slope[c] * t;
    }
  } else {  // samples, dim == 1
    fn.values = pf.prehistory_samples;
  }
  return make_prehistory(std::move(fn));
}

}  // namespace dde
