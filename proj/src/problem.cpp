#include "pencilscope/problem.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pencilscope {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& origin, const std::string& field,
                              const std::string& what) {
  fail(ErrorCode::SchemaError, origin + ": field '" + field + "': " + what);
}

ComplexMatrix parse_matrix(const json& node, const std::string& origin, const std::string& field) {
  if (!node.is_array() || node.empty()) schema_fail(origin, field, "expected a nonempty array of rows");
  const int rows = static_cast<int>(node.size());
  int cols = -1;
  for (const auto& row : node) {
    if (!row.is_array()) schema_fail(origin, field, "row is not an array");
    if (cols < 0)
      cols = static_cast<int>(row.size());
    else if (static_cast<int>(row.size()) != cols)
      schema_fail(origin, field, "rows have inconsistent lengths");
  }
  if (cols == 0) schema_fail(origin, field, "rows are empty");
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const auto& e = node[i][j];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        schema_fail(origin, field, "entries must be [re, im] number pairs");
      m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  if (!m.all_finite())
    fail(ErrorCode::InvariantViolation, origin + ": field '" + field + "': non-finite entries");
  return m;
}

ComplexMatrix require_square_matrix(const json& obj, const std::string& origin,
                                    const std::string& field) {
  if (!obj.contains(field)) schema_fail(origin, field, "missing");
  ComplexMatrix m = parse_matrix(obj[field], origin, field);
  if (!m.square())
    fail(ErrorCode::InvariantViolation, origin + ": field '" + field + "' must be square");
  return m;
}

void check_hermitian(const ComplexMatrix& m, const std::string& origin, const std::string& field) {
  if (!m.is_hermitian(1e-10 * std::max(m.frobenius_norm(), 1e-30)))
    fail(ErrorCode::InvariantViolation, origin + ": field '" + field + "' must be Hermitian");
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

bool matrices_equal(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (a(i, j) != b(i, j)) return false;
  return true;
}

}  // namespace

const char* problem_kind_name(Problem::Kind kind) {
  switch (kind) {
    case Problem::Kind::Hamiltonian: return "hamiltonian";
    case Problem::Kind::PolynomialPencil: return "polynomial_pencil";
    case Problem::Kind::DdePencil: return "dde_pencil";
    case Problem::Kind::CanonicalHamiltonian: return "canonical_hamiltonian";
    case Problem::Kind::Sweep: return "sweep";
  }
  return "unknown";
}

Problem parse_problem(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, origin + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::SchemaError, origin + ": top level must be an object");

  Problem out;
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
    schema_fail(origin, "schema_version", "missing or not an integer");
  out.schema_version = doc["schema_version"].get<int>();
  if (out.schema_version != 1)
    schema_fail(origin, "schema_version", "unsupported version (expected 1)");

  if (!doc.contains("kind") || !doc["kind"].is_string()) schema_fail(origin, "kind", "missing or not a string");
  const std::string kind = doc["kind"].get<std::string>();

  if (kind == "hamiltonian") {
    out.kind = Problem::Kind::Hamiltonian;
    HamiltonianProblem p;
    p.j = require_square_matrix(doc, origin, "J");
    p.l = require_square_matrix(doc, origin, "L");
    if (p.j.rows() != p.l.rows())
      fail(ErrorCode::InvariantViolation, origin + ": fields 'J' and 'L' must have equal dimension");
    if (!p.j.is_skew_hermitian(1e-10 * std::max(p.j.frobenius_norm(), 1e-30)))
      fail(ErrorCode::InvariantViolation, origin + ": field 'J' must be skew-Hermitian");
    check_hermitian(p.l, origin, "L");
    // Constructing the system validates invertibility of J as well.
    HamiltonianSystem probe(p.j, p.l);
    (void)probe;
    out.payload = std::move(p);
  } else if (kind == "polynomial_pencil") {
    out.kind = Problem::Kind::PolynomialPencil;
    PolynomialProblem p;
    if (!doc.contains("coefficients") || !doc["coefficients"].is_array() || doc["coefficients"].empty())
      schema_fail(origin, "coefficients", "missing or empty");
    int dim = -1;
    for (size_t k = 0; k < doc["coefficients"].size(); ++k) {
      const std::string field = "coefficients[" + std::to_string(k) + "]";
      ComplexMatrix m = parse_matrix(doc["coefficients"][k], origin, field);
      if (!m.square()) fail(ErrorCode::InvariantViolation, origin + ": field '" + field + "' must be square");
      if (dim < 0)
        dim = m.rows();
      else if (m.rows() != dim)
        fail(ErrorCode::InvariantViolation,
             origin + ": field '" + field + "' differs in dimension from earlier coefficients");
      p.coefficients.push_back(std::move(m));
    }
    out.payload = std::move(p);
  } else if (kind == "dde_pencil") {
    out.kind = Problem::Kind::DdePencil;
    DdeProblem p;
    p.a = require_square_matrix(doc, origin, "A");
    p.b = require_square_matrix(doc, origin, "B");
    if (p.a.rows() != p.b.rows())
      fail(ErrorCode::InvariantViolation, origin + ": fields 'A' and 'B' must have equal dimension");
    if (!doc.contains("tau") || !doc["tau"].is_number()) schema_fail(origin, "tau", "missing or not a number");
    p.tau = doc["tau"].get<double>();
    if (!(p.tau > 0.0)) fail(ErrorCode::InvariantViolation, origin + ": field 'tau' must be positive");
    out.payload = std::move(p);
  } else if (kind == "canonical_hamiltonian") {
    out.kind = Problem::Kind::CanonicalHamiltonian;
    CanonicalProblem p;
    p.l_plus = require_square_matrix(doc, origin, "L_plus");
    p.l_minus = require_square_matrix(doc, origin, "L_minus");
    if (p.l_plus.rows() != p.l_minus.rows())
      fail(ErrorCode::InvariantViolation,
           origin + ": fields 'L_plus' and 'L_minus' must have equal dimension");
    check_hermitian(p.l_plus, origin, "L_plus");
    check_hermitian(p.l_minus, origin, "L_minus");
    out.payload = std::move(p);
  } else if (kind == "sweep") {
    out.kind = Problem::Kind::Sweep;
    SweepProblem p;
    p.base = require_square_matrix(doc, origin, "A");
    p.direction = require_square_matrix(doc, origin, "B");
    p.j = require_square_matrix(doc, origin, "J");
    if (p.base.rows() != p.direction.rows() || p.base.rows() != p.j.rows())
      fail(ErrorCode::InvariantViolation, origin + ": sweep matrices must share one dimension");
    check_hermitian(p.base, origin, "A");
    check_hermitian(p.direction, origin, "B");
    if (!p.j.is_skew_hermitian(1e-10 * std::max(p.j.frobenius_norm(), 1e-30)))
      fail(ErrorCode::InvariantViolation, origin + ": field 'J' must be skew-Hermitian");
    if (!doc.contains("t_values") || !doc["t_values"].is_array() || doc["t_values"].empty())
      schema_fail(origin, "t_values", "missing or empty");
    for (const auto& t : doc["t_values"]) {
      if (!t.is_number()) schema_fail(origin, "t_values", "entries must be numbers");
      p.t_values.push_back(t.get<double>());
    }
    out.payload = std::move(p);
  } else {
    schema_fail(origin, "kind", "unknown problem kind '" + kind + "'");
  }

  if (doc.contains("lambda_min")) {
    if (!doc["lambda_min"].is_number()) schema_fail(origin, "lambda_min", "not a number");
    out.window.lambda_min = doc["lambda_min"].get<double>();
  }
  if (doc.contains("lambda_max")) {
    if (!doc["lambda_max"].is_number()) schema_fail(origin, "lambda_max", "not a number");
    out.window.lambda_max = doc["lambda_max"].get<double>();
  }
  if (doc.contains("steps")) {
    if (!doc["steps"].is_number_integer()) schema_fail(origin, "steps", "not an integer");
    out.window.steps = doc["steps"].get<int>();
    if (*out.window.steps < 2) fail(ErrorCode::InvariantViolation, origin + ": field 'steps' must be >= 2");
  }
  if (out.window.lambda_min && out.window.lambda_max &&
      !(*out.window.lambda_min < *out.window.lambda_max))
    fail(ErrorCode::InvariantViolation, origin + ": lambda_min must be below lambda_max");
  return out;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), path);
}

std::string serialize_problem(const Problem& problem) {
  json doc;
  doc["schema_version"] = problem.schema_version;
  doc["kind"] = problem_kind_name(problem.kind);
  switch (problem.kind) {
    case Problem::Kind::Hamiltonian: {
      const auto& p = std::get<HamiltonianProblem>(problem.payload);
      doc["J"] = matrix_to_json(p.j);
      doc["L"] = matrix_to_json(p.l);
      break;
    }
    case Problem::Kind::PolynomialPencil: {
      const auto& p = std::get<PolynomialProblem>(problem.payload);
      json arr = json::array();
      for (const ComplexMatrix& m : p.coefficients) arr.push_back(matrix_to_json(m));
      doc["coefficients"] = std::move(arr);
      break;
    }
    case Problem::Kind::DdePencil: {
      const auto& p = std::get<DdeProblem>(problem.payload);
      doc["A"] = matrix_to_json(p.a);
      doc["B"] = matrix_to_json(p.b);
      doc["tau"] = p.tau;
      break;
    }
    case Problem::Kind::CanonicalHamiltonian: {
      const auto& p = std::get<CanonicalProblem>(problem.payload);
      doc["L_plus"] = matrix_to_json(p.l_plus);
      doc["L_minus"] = matrix_to_json(p.l_minus);
      break;
    }
    case Problem::Kind::Sweep: {
      const auto& p = std::get<SweepProblem>(problem.payload);
      doc["A"] = matrix_to_json(p.base);
      doc["B"] = matrix_to_json(p.direction);
      doc["J"] = matrix_to_json(p.j);
      doc["t_values"] = p.t_values;
      break;
    }
  }
  if (problem.window.lambda_min) doc["lambda_min"] = *problem.window.lambda_min;
  if (problem.window.lambda_max) doc["lambda_max"] = *problem.window.lambda_max;
  if (problem.window.steps) doc["steps"] = *problem.window.steps;
  return doc.dump(2) + "\n";
}

bool problems_equal(const Problem& a, const Problem& b) {
  if (a.kind != b.kind || a.schema_version != b.schema_version) return false;
  if (a.window.lambda_min != b.window.lambda_min || a.window.lambda_max != b.window.lambda_max ||
      a.window.steps != b.window.steps)
    return false;
  switch (a.kind) {
    case Problem::Kind::Hamiltonian: {
      const auto& x = std::get<HamiltonianProblem>(a.payload);
      const auto& y = std::get<HamiltonianProblem>(b.payload);
      return matrices_equal(x.j, y.j) && matrices_equal(x.l, y.l);
    }
    case Problem::Kind::PolynomialPencil: {
      const auto& x = std::get<PolynomialProblem>(a.payload);
      const auto& y = std::get<PolynomialProblem>(b.payload);
      if (x.coefficients.size() != y.coefficients.size()) return false;
      for (size_t i = 0; i < x.coefficients.size(); ++i)
        if (!matrices_equal(x.coefficients[i], y.coefficients[i])) return false;
      return true;
    }
    case Problem::Kind::DdePencil: {
      const auto& x = std::get<DdeProblem>(a.payload);
      const auto& y = std::get<DdeProblem>(b.payload);
      return matrices_equal(x.a, y.a) && matrices_equal(x.b, y.b) && x.tau == y.tau;
    }
    case Problem::Kind::CanonicalHamiltonian: {
      const auto& x = std::get<CanonicalProblem>(a.payload);
      const auto& y = std::get<CanonicalProblem>(b.payload);
      return matrices_equal(x.l_plus, y.l_plus) && matrices_equal(x.l_minus, y.l_minus);
    }
    case Problem::Kind::Sweep: {
      const auto& x = std::get<SweepProblem>(a.payload);
      const auto& y = std::get<SweepProblem>(b.payload);
      return matrices_equal(x.base, y.base) && matrices_equal(x.direction, y.direction) &&
             matrices_equal(x.j, y.j) && x.t_values == y.t_values;
    }
  }
  return false;
}

}  // namespace pencilscope
