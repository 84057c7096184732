#include "specsys/problem_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <fstream>
#include <sstream>

namespace specsys {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_real(const std::string& tok, int line_no) {
  if (tok == "inf" || tok == "+inf") return kInf;
  if (tok == "-inf") return -kInf;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError("bad number '" + tok + "'", line_no);
  return v;
}

// Line-oriented cursor over the input with comment/blank skipping.
struct Cursor {
  std::vector<std::string> lines;
  std::size_t idx = 0;
  int line_no() const { return static_cast<int>(idx); }

  explicit Cursor(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
  }
  bool next(std::vector<std::string>& toks) {
    while (idx < lines.size()) {
      std::string line = lines[idx++];
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      toks = split_ws(line);
      if (!toks.empty()) return true;
    }
    return false;
  }
  void back() { --idx; }
};

Matrix read_matrix(Cursor& cur, int rows, int cols) {
  Matrix m(rows, cols);
  std::vector<std::string> toks;
  for (int i = 0; i < rows; ++i) {
    if (!cur.next(toks)) throw ParseError("unexpected end of file in matrix block",
                                          cur.line_no());
    if (static_cast<int>(toks.size()) != cols)
      throw ParseError("expected " + std::to_string(cols) + " entries", cur.line_no());
    for (int j = 0; j < cols; ++j) m(i, j) = parse_complex(toks[j]);
  }
  return m;
}

}  // namespace

std::string format_double(double x) {
  if (x == kInf) return "inf";
  if (x == -kInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_complex(Complex z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

Complex parse_complex(const std::string& token) {
  if (token.empty()) throw ParseError("empty complex token");
  if (token.back() != 'j') {
    // plain real
    char* end = nullptr;
    double re = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
      throw ParseError("bad complex token '" + token + "'");
    return Complex(re, 0.0);
  }
  std::string body = token.substr(0, token.size() - 1);
  // split at the last +/- that does not follow an exponent marker
  std::size_t split = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    char c = body[i];
    if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos)
    throw ParseError("bad complex token '" + token + "'");
  auto num = [&](const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw ParseError("bad complex token '" + token + "'");
    return v;
  };
  return Complex(num(body.substr(0, split)), num(body.substr(split)));
}

MatrixMeasure ProblemFile::q_measure() const {
  return MatrixMeasure(RealInterval(a, b), n, n, q_pieces, q_atoms);
}

MatrixMeasure ProblemFile::w_measure() const {
  return MatrixMeasure(RealInterval(a, b), n, n, w_pieces, w_atoms);
}

SpectralProblem ProblemFile::problem() const {
  return SpectralProblem(RealInterval(a, b), J, q_measure(), w_measure(), x0);
}

VectorFn ProblemFile::f_function() const {
  auto pieces = std::make_shared<std::vector<Piece>>(f_pieces);
  int dim = n;
  return [pieces, dim](double x) -> Vector {
    for (const auto& p : *pieces)
      if (p.left <= x && x <= p.right) return Vector(p.density(x).col(0));
    return Vector::Zero(dim);
  };
}

ProblemFile parse_problem(const std::string& text) {
  Cursor cur(text);
  ProblemFile pf;
  bool saw_interval = false, saw_size = false, saw_J = false;
  std::vector<std::string> toks;
  while (cur.next(toks)) {
    const std::string& key = toks[0];
    int ln = cur.line_no();
    if (key == "interval") {
      if (toks.size() != 3) throw ParseError("interval needs two bounds", ln);
      pf.a = parse_real(toks[1], ln);
      pf.b = parse_real(toks[2], ln);
      if (!(pf.a < pf.b)) throw ParseError("interval needs a < b", ln);
      saw_interval = true;
    } else if (key == "size") {
      if (toks.size() != 2) throw ParseError("size needs one integer", ln);
      pf.n = static_cast<int>(parse_real(toks[1], ln));
      if (pf.n < 1) throw ParseError("size must be positive", ln);
      saw_size = true;
    } else if (key == "x0") {
      if (toks.size() != 2) throw ParseError("x0 needs one value", ln);
      pf.x0 = parse_real(toks[1], ln);
    } else if (key == "J") {
      if (!saw_size) throw ParseError("size must precede J", ln);
      pf.J = read_matrix(cur, pf.n, pf.n);
      saw_J = true;
    } else if (key == "q.density" || key == "w.density" || key == "f.piece") {
      if (!saw_size) throw ParseError("size must precede blocks", ln);
      if (toks.size() != 4) throw ParseError(key + " needs left right degree", ln);
      Piece piece;
      piece.left = parse_real(toks[1], ln);
      piece.right = parse_real(toks[2], ln);
      int deg = static_cast<int>(parse_real(toks[3], ln));
      if (deg < 0) throw ParseError("degree must be >= 0", ln);
      int cols = (key == "f.piece") ? 1 : pf.n;
      int rows_per = (key == "f.piece") ? 1 : pf.n;
      for (int k = 0; k <= deg; ++k) {
        Matrix c = (key == "f.piece") ? Matrix(read_matrix(cur, 1, pf.n).transpose())
                                      : read_matrix(cur, rows_per, cols);
        piece.poly.push_back(c);
      }
      if (key == "q.density")
        pf.q_pieces.push_back(std::move(piece));
      else if (key == "w.density")
        pf.w_pieces.push_back(std::move(piece));
      else
        pf.f_pieces.push_back(std::move(piece));
    } else if (key == "q.atom" || key == "w.atom") {
      if (!saw_size) throw ParseError("size must precede blocks", ln);
      if (toks.size() != 2) throw ParseError(key + " needs a location", ln);
      Atom at;
      at.location = parse_real(toks[1], ln);
      at.jump = read_matrix(cur, pf.n, pf.n);
      (key == "q.atom" ? pf.q_atoms : pf.w_atoms).push_back(std::move(at));
    } else if (key == "boundary") {
      if (!saw_size) throw ParseError("size must precede blocks", ln);
      if (toks.size() != 2) throw ParseError("boundary needs a row count", ln);
      int rows = static_cast<int>(parse_real(toks[1], ln));
      if (rows < 1) throw ParseError("boundary rows must be positive", ln);
      pf.boundary = read_matrix(cur, rows, 2 * pf.n);
    } else {
      throw ParseError("unknown block '" + key + "'", ln);
    }
  }
  if (!saw_interval) throw ParseError("missing interval");
  if (!saw_size) throw ParseError("missing size");
  if (!saw_J) throw ParseError("missing J");
  auto sort_pieces = [](std::vector<Piece>& v) {
    std::sort(v.begin(), v.end(),
              [](const Piece& p, const Piece& q) { return p.left < q.left; });
  };
  auto sort_atoms = [](std::vector<Atom>& v) {
    std::sort(v.begin(), v.end(),
              [](const Atom& p, const Atom& q) { return p.location < q.location; });
  };
  sort_pieces(pf.q_pieces);
  sort_pieces(pf.w_pieces);
  sort_pieces(pf.f_pieces);
  sort_atoms(pf.q_atoms);
  sort_atoms(pf.w_atoms);
  return pf;
}

ProblemFile parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

std::string serialize_problem(const ProblemFile& pf) {
  std::ostringstream out;
  out << "interval " << format_double(pf.a) << " " << format_double(pf.b) << "\n";
  out << "size " << pf.n << "\n";
  out << "x0 " << format_double(pf.x0) << "\n";
  out << "J\n";
  auto emit_matrix = [&out](const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        out << (j ? " " : "") << format_complex(m(i, j));
      out << "\n";
    }
  };
  emit_matrix(pf.J);
  auto emit_pieces = [&](const char* key, const std::vector<Piece>& pieces,
                         bool as_row) {
    for (const auto& p : pieces) {
      if (!p.is_polynomial())
        throw ParseError("only polynomial densities are serializable");
      out << key << " " << format_double(p.left) << " " << format_double(p.right)
          << " " << (p.poly.size() - 1) << "\n";
      for (const auto& c : p.poly) emit_matrix(as_row ? Matrix(c.transpose()) : c);
    }
  };
  auto emit_atoms = [&](const char* key, const std::vector<Atom>& atoms) {
    for (const auto& at : atoms) {
      out << key << " " << format_double(at.location) << "\n";
      emit_matrix(at.jump);
    }
  };
  emit_pieces("q.density", pf.q_pieces, false);
  emit_atoms("q.atom", pf.q_atoms);
  emit_pieces("w.density", pf.w_pieces, false);
  emit_atoms("w.atom", pf.w_atoms);
  emit_pieces("f.piece", pf.f_pieces, true);
  if (pf.boundary) {
    out << "boundary " << pf.boundary->rows() << "\n";
    emit_matrix(*pf.boundary);
  }
  return out.str();
}

}  // namespace specsys
