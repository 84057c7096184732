#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace specsys {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

/// Matrix-valued function of a real variable.
using MatrixFn = std::function<Matrix(double)>;
using VectorFn = std::function<Vector(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Entrywise 1-norm, the norm used for variations of matrix functions.
inline double ent1_norm(const Matrix& m) { return m.cwiseAbs().sum(); }

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed problem file.
struct ParseError : Error {
  ParseError(const std::string& what, int line_no = 0)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + what : what),
        line(line_no) {}
  int line = 0;
};

/// Input violates a structural requirement (coefficient hypotheses,
/// boundary-condition certificates, domain restrictions).
struct ValidationError : Error {
  using Error::Error;
};

/// The spectral parameter hits the forbidden set: a transfer matrix
/// 1 +/- Delta_r/2 at an atom is singular and the IVP loses uniqueness.
struct LambdaForbiddenError : Error {
  LambdaForbiddenError(const std::string& what, double atom)
      : Error(what), atom_location(atom) {}
  double atom_location;
};

/// Quadrature or integrator failed to reach the requested tolerance.
struct NumericError : Error {
  using Error::Error;
};

struct UsageError : Error {
  using Error::Error;
};

/// Open interval (a,b); either end may be infinite.
struct RealInterval {
  double a;
  double b;

  RealInterval(double lo, double hi) : a(lo), b(hi) {
    if (!(a < b)) throw ValidationError("interval requires a < b");
  }
  bool contains(double x) const { return a < x && x < b; }
  bool finite() const { return std::isfinite(a) && std::isfinite(b); }
};

enum class Side { Left, Right, Balanced };
enum class Endpoint { Lower, Upper };

/// Which endpoints of an integration range receive atom mass.
enum class Ends { ClosedClosed, ClosedOpen, OpenClosed, OpenOpen };

struct QuadOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 48;
};

struct IvpOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_steps = 200000;
  double condition_warn = 1e12;  // atom transfer condition-number warning
};

/// One named check of a validation pass.
struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  void add(std::string name, bool passed, std::string detail = "") {
    checks.push_back({std::move(name), passed, std::move(detail)});
  }
  std::string summary() const {
    std::string s;
    for (const auto& c : checks) {
      s += (c.passed ? "[ok]   " : "[FAIL] ") + c.name;
      if (!c.detail.empty()) s += ": " + c.detail;
      s += "\n";
    }
    return s;
  }
};

}  // namespace specsys
