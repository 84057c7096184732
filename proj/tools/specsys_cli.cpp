// Command line front end: parse problem files, run the pipeline, emit
// plot-ready CSV. Exit codes: 0 success, 1 numeric failure, 2 validation
// failure, 3 parse failure.

#include "specsys/problem_io.hpp"
#include "specsys/spectral.hpp"
#include "specsys/weyl2.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace specsys;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Output {
  std::string path;  // empty = stdout
  std::ostringstream buf;

  template <typename T>
  Output& operator<<(const T& v) {
    buf << v;
    return *this;
  }
  void flush() {
    if (path.empty()) {
      std::cout << buf.str();
    } else {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error("cannot write '" + path + "'");
      out << buf.str();
    }
  }
};

void emit_matrix_cells(Output& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << "," << fmt(m(i, j).real()) << "," << fmt(m(i, j).imag());
}

void matrix_header(Output& out, const std::string& name, int rows, int cols) {
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      std::string cell = name + "_" + std::to_string(i) + std::to_string(j);
      out << "," << cell << "_re," << cell << "_im";
    }
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> xs;
  if (count == 1) {
    xs.push_back(0.5 * (lo + hi));
    return xs;
  }
  for (int i = 0; i < count; ++i)
    xs.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
  return xs;
}

// shared per-command state assembled from the parsed file
struct Pipeline {
  ProblemFile pf;
  std::unique_ptr<SpectralProblem> p;
  std::unique_ptr<KernelData> k;
  std::unique_ptr<BoundaryConditions> bc;

  void load(const std::string& file) {
    pf = parse_problem_file(file);
    p = std::make_unique<SpectralProblem>(pf.problem());
  }
  void need_kernel() {
    if (!k) k = std::make_unique<KernelData>(compute_kernel(*p));
  }
  void need_bc() {
    need_kernel();
    if (!bc) {
      if (!pf.boundary)
        throw ValidationError("problem file has no boundary block");
      bc = std::make_unique<BoundaryConditions>(
          validate_boundary_conditions(*p, *k, *pf.boundary));
    }
  }
};

int cmd_validate(const std::string& file, Output& out) {
  ProblemFile pf = parse_problem_file(file);
  MatrixMeasure q = pf.q_measure(), w = pf.w_measure();
  ValidationReport rep = validate_coefficients(q, w, pf.J);
  out << rep.summary();
  bool conforming = rep.ok();
  if (conforming) {
    SpectralProblem p = pf.problem();
    LambdaSet ls = lambda_set(p);
    out << "forbidden set: {";
    for (std::size_t i = 0; i < ls.points.size(); ++i) {
      if (i) out << ", ";
      out << fmt(ls.points[i].lambda.real()) << (ls.points[i].lambda.imag() < 0 ? "-" : "+")
          << fmt(std::abs(ls.points[i].lambda.imag())) << "i";
    }
    out << "}";
    if (ls.infinite_count > 0) out << " plus " << ls.infinite_count << " at infinity";
    out << "\n";
    out << "forbidden set meets the real line: " << (ls.real_axis_clear() ? "no" : "yes")
        << "\n";
    out << "endpoint a: " << (p.regular_at(Endpoint::Lower) ? "regular" : "singular")
        << "\n";
    out << "endpoint b: " << (p.regular_at(Endpoint::Upper) ? "regular" : "singular")
        << "\n";
    if (pf.boundary) {
      try {
        KernelData k = compute_kernel(p);
        BoundaryConditions bc = validate_boundary_conditions(p, k, *pf.boundary);
        const char* cls = bc.classification == BcClass::Separated  ? "separated"
                          : bc.classification == BcClass::Coupled ? "coupled"
                                                                  : "mixed";
        out << "boundary conditions: accepted (" << cls << ", n+ = " << bc.n_plus
            << ")\n";
      } catch (const BoundaryRejection& e) {
        out << "boundary conditions: rejected\n" << e.report.summary();
        conforming = false;
      }
    }
  }
  out.flush();
  return conforming ? 0 : 2;
}

int cmd_solve_ivp(Pipeline& pl, Complex lambda, const std::string& u0_spec, int grid,
                  Output& out) {
  std::vector<Complex> u0vals;
  std::stringstream ss(u0_spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) u0vals.push_back(parse_complex(tok));
  if (static_cast<int>(u0vals.size()) != pl.p->size())
    throw UsageError("--u0 needs " + std::to_string(pl.p->size()) + " entries");
  Matrix u0(pl.p->size(), 1);
  for (int i = 0; i < pl.p->size(); ++i) u0(i, 0) = u0vals[i];

  auto r = coefficient_measure(*pl.p, lambda);
  auto [lo, hi] = pl.p->effective_range();
  BalancedSolution s = solve_ivp_balanced(r, nullptr, pl.p->x0(), u0, lo, hi);

  out << "x";
  matrix_header(out, "u", pl.p->size(), 1);
  out << "\n";
  std::vector<double> xs = linspace(lo, hi, grid);
  for (double at : s.atom_locations()) xs.push_back(at);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs) {
    out << fmt(x);
    emit_matrix_cells(out, s.value(x));
    out << "\n";
  }
  out.flush();
  return 0;
}

int cmd_lambda_set(Pipeline& pl, Output& out) {
  LambdaSet ls = lambda_set(*pl.p);
  out << "atom_x,sign,lambda_re,lambda_im\n";
  for (const auto& pt : ls.points)
    out << fmt(pt.atom_location) << "," << pt.sign << "," << fmt(pt.lambda.real())
        << "," << fmt(pt.lambda.imag()) << "\n";
  out.flush();
  return 0;
}

int cmd_eigs(Pipeline& pl, double lo, double hi, EigOptions eopt, Output& out) {
  pl.need_bc();
  MFunction mf = m_function(*pl.p, *pl.k, *pl.bc);
  SpectralMeasure sm = spectral_measure(mf, lo, hi, eopt);
  out << "index,lambda,multiplicity";
  matrix_header(out, "dnu", pl.p->size(), pl.p->size());
  out << "\n";
  for (std::size_t i = 0; i < sm.points.size(); ++i) {
    out << i << "," << fmt(sm.points[i].lambda) << "," << sm.points[i].multiplicity;
    emit_matrix_cells(out, sm.points[i].weight);
    out << "\n";
  }
  out.flush();
  return 0;
}

int cmd_mfun(Pipeline& pl, double lo, double hi, double imag, int grid, Output& out) {
  pl.need_bc();
  MFunction mf = m_function(*pl.p, *pl.k, *pl.bc);
  out << "lambda_re,lambda_im";
  matrix_header(out, "M", pl.p->size(), pl.p->size());
  out << "\n";
  for (double x : linspace(lo, hi, grid)) {
    Matrix M = mf(Complex(x, imag));
    out << fmt(x) << "," << fmt(imag);
    emit_matrix_cells(out, M);
    out << "\n";
  }
  out.flush();
  return 0;
}

int cmd_green(Pipeline& pl, Complex lambda, int grid, Output& out) {
  pl.need_bc();
  GreenKernel G = green_kernel(*pl.p, *pl.k, *pl.bc, lambda);
  auto [lo, hi] = pl.p->effective_range();
  out << "x,y";
  matrix_header(out, "G", pl.p->size(), pl.p->size());
  out << "\n";
  for (double x : linspace(lo, hi, grid))
    for (double y : linspace(lo, hi, grid)) {
      out << fmt(x) << "," << fmt(y);
      emit_matrix_cells(out, G(x, y));
      out << "\n";
    }
  out.flush();
  return 0;
}

int cmd_transform(Pipeline& pl, double lo, double hi, const std::string& f_const,
                  int grid, EigOptions eopt, Output& out) {
  pl.need_bc();
  VectorFn f;
  if (!f_const.empty()) {
    std::vector<Complex> vals;
    std::stringstream ss(f_const);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(parse_complex(tok));
    if (static_cast<int>(vals.size()) != pl.p->size())
      throw UsageError("--f-const needs " + std::to_string(pl.p->size()) + " entries");
    Vector v(pl.p->size());
    for (int i = 0; i < pl.p->size(); ++i) v(i) = vals[i];
    f = [v](double) { return v; };
  } else if (pl.pf.has_f()) {
    f = pl.pf.f_function();
  } else {
    throw ValidationError("no f: supply an f.piece block or --f-const");
  }

  MFunction mf = m_function(*pl.p, *pl.k, *pl.bc);
  SpectralMeasure sm = spectral_measure(mf, lo, hi, eopt);
  TransformResult tr = fourier(*pl.p, sm, f);

  out << "n,lambda";
  matrix_header(out, "fhat", pl.p->size(), 1);
  out << "\n";
  for (std::size_t i = 0; i < tr.lambdas.size(); ++i) {
    out << i << "," << fmt(tr.lambdas[i]);
    emit_matrix_cells(out, tr.coefficients[i]);
    out << "\n";
  }
  out << "\n";

  VectorFn rec = inverse(*pl.p, sm, tr.coefficients);
  auto [xlo, xhi] = pl.p->effective_range();
  out << "x";
  matrix_header(out, "rec", pl.p->size(), 1);
  out << "\n";
  for (double x : linspace(xlo, xhi, grid)) {
    out << fmt(x);
    emit_matrix_cells(out, rec(x));
    out << "\n";
  }

  ParsevalReport par = parseval_check(*pl.p, sm, f, f);
  out << "\n# parseval_residual=" << fmt(par.residual)
      << " tail_energy=" << fmt(par.tail_f) << "\n";
  out.flush();
  return 0;
}

int cmd_weyl(Pipeline& pl, double alpha, bool have_alpha, double lo, double hi,
             double imag, int grid, Output& out) {
  auto ca = classify_endpoint(*pl.p, Endpoint::Lower, Complex(0, 1));
  auto cb = classify_endpoint(*pl.p, Endpoint::Upper, Complex(0, 1));
  auto verdict = [](const WeylClassification& c) {
    return c.verdict == WeylVerdict::LimitPoint    ? "limit-point"
           : c.verdict == WeylVerdict::LimitCircle ? "limit-circle"
                                                   : "undecided";
  };
  out << "# endpoint a: " << verdict(ca) << " (" << ca.reason << ")\n";
  out << "# endpoint b: " << verdict(cb) << " (" << cb.reason << ")\n";
  out << "endpoint,cut,norm_min,norm_max,disk_radius\n";
  for (const auto& d : ca.diagnostics)
    out << "a," << fmt(d.cut) << "," << fmt(d.norm_min) << "," << fmt(d.norm_max)
        << "," << fmt(d.disk_radius) << "\n";
  for (const auto& d : cb.diagnostics)
    out << "b," << fmt(d.cut) << "," << fmt(d.norm_min) << "," << fmt(d.norm_max)
        << "," << fmt(d.disk_radius) << "\n";

  if (have_alpha && ca.verdict == WeylVerdict::LimitCircle &&
      cb.verdict == WeylVerdict::LimitPoint) {
    out << "\nlambda_re,lambda_im,m_re,m_im,route_disagreement\n";
    for (double x : linspace(lo, hi, grid)) {
      Complex lam(x, imag);
      auto r = m_function_2x2(*pl.p, alpha, lam);
      out << fmt(x) << "," << fmt(imag) << "," << fmt(r.m.real()) << ","
          << fmt(r.m.imag()) << "," << fmt(r.disagreement) << "\n";
    }
  }
  out.flush();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral analysis of first-order systems with measure coefficients"};
  app.require_subcommand(1);

  std::string file, out_path, u0_spec = "1", f_const, lambda_str = "0+1j";
  double win_lo = -10.0, win_hi = 10.0;
  double tol_eig = 1e-12, tol_quad = 1e-10, tol_residue = 1e-9;
  double alpha = 0.0, imag = 1.0;
  int grid = 101;

  auto add_common = [&](CLI::App* sub, bool needs_window = false) {
    sub->add_option("file", file, "problem definition file")->required();
    sub->add_option("--out", out_path, "output path (default stdout)");
    if (needs_window)
      sub->add_option("--window", "window LO HI on the real axis")
          ->expected(2)
          ->each([&, first = std::make_shared<bool>(true)](const std::string& s) mutable {
            (*first ? win_lo : win_hi) = std::stod(s);
            *first = false;
          });
    sub->add_option("--tol-eig", tol_eig, "eigenvalue location tolerance");
    sub->add_option("--tol-quad", tol_quad, "quadrature relative tolerance");
    sub->add_option("--tol-residue", tol_residue, "residue contour tolerance");
    sub->add_option("--grid", grid, "sample count for grids");
  };

  auto* validate = app.add_subcommand("validate", "check the coefficient hypotheses");
  add_common(validate);

  auto* solve = app.add_subcommand("solve-ivp", "fundamental-system IVP sampling");
  add_common(solve);
  solve->add_option("--lambda", lambda_str, "spectral parameter re+imj");
  solve->add_option("--u0", u0_spec, "initial vector entries, comma separated");

  auto* lset = app.add_subcommand("lambda-set", "forbidden spectral parameters");
  add_common(lset);

  auto* eigs = app.add_subcommand("eigs", "eigenvalues and spectral weights");
  add_common(eigs, true);

  auto* mfun = app.add_subcommand("mfun", "M-function samples over a lambda grid");
  add_common(mfun, true);
  mfun->add_option("--imag", imag, "imaginary offset of the lambda grid");

  auto* green = app.add_subcommand("green", "Green kernel samples");
  add_common(green);
  green->add_option("--lambda", lambda_str, "spectral parameter re+imj");

  auto* transform = app.add_subcommand("transform", "spectral transform of f");
  add_common(transform, true);
  transform->add_option("--f-const", f_const, "constant f entries, comma separated");

  auto* weyl = app.add_subcommand("weyl", "endpoint classification and m-function");
  add_common(weyl, true);
  auto* alpha_opt = weyl->add_option("--alpha", alpha, "separated condition angle");
  weyl->add_option("--imag", imag, "imaginary offset for m samples");

  CLI11_PARSE(app, argc, argv);

  Output out;
  out.path = out_path;
  try {
    if (*validate) return cmd_validate(file, out);
    Pipeline pl;
    pl.load(file);
    EigOptions eopt;
    eopt.locate_tol = tol_eig;
    eopt.residue_tol = tol_residue;
    (void)tol_quad;
    if (*solve) return cmd_solve_ivp(pl, parse_complex(lambda_str), u0_spec, grid, out);
    if (*lset) return cmd_lambda_set(pl, out);
    if (*eigs) return cmd_eigs(pl, win_lo, win_hi, eopt, out);
    if (*mfun) return cmd_mfun(pl, win_lo, win_hi, imag, grid, out);
    if (*green) return cmd_green(pl, parse_complex(lambda_str), grid, out);
    if (*transform) return cmd_transform(pl, win_lo, win_hi, f_const, grid, eopt, out);
    if (*weyl)
      return cmd_weyl(pl, alpha, alpha_opt->count() > 0, win_lo, win_hi, imag, grid,
                      out);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
