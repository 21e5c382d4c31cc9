#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pencilscope/pencil.hpp"

namespace pencilscope {

struct HamiltonianProblem {
  ComplexMatrix j;
  ComplexMatrix l;
};

struct PolynomialProblem {
  std::vector<ComplexMatrix> coefficients;  // ascending powers
};

struct DdeProblem {
  ComplexMatrix a;
  ComplexMatrix b;
  double tau = 1.0;
};

struct CanonicalProblem {
  ComplexMatrix l_plus;
  ComplexMatrix l_minus;
};

/// Family L(t) = base + t*direction against a fixed structure matrix J.
struct SweepProblem {
  ComplexMatrix base;
  ComplexMatrix direction;
  ComplexMatrix j;
  std::vector<double> t_values;
};

struct AnalysisWindow {
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<int> steps;
};

struct Problem {
  enum class Kind { Hamiltonian, PolynomialPencil, DdePencil, CanonicalHamiltonian, Sweep };

  Kind kind = Kind::Hamiltonian;
  int schema_version = 1;
  std::variant<HamiltonianProblem, PolynomialProblem, DdeProblem, CanonicalProblem, SweepProblem>
      payload;
  AnalysisWindow window;
};

const char* problem_kind_name(Problem::Kind kind);

/// Parse and validate a problem description; every type-level invariant is
/// checked eagerly and failures name the offending field.
Problem parse_problem(const std::string& json_text, const std::string& origin);
Problem load_problem(const std::string& path);

/// Inverse of parsing; load(serialize(p)) compares equal field by field.
std::string serialize_problem(const Problem& problem);

bool problems_equal(const Problem& a, const Problem& b);

}  // namespace pencilscope
