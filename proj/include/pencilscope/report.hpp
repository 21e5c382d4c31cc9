#pragma once

#include <string>
#include <vector>

#include "pencilscope/index.hpp"
#include "pencilscope/problem.hpp"

namespace pencilscope {

/// Minimal ordered JSON value for report output.  Numbers render with 17
/// significant digits and object keys keep insertion order, so identical
/// inputs produce byte-identical output.
class Json {
 public:
  static Json object() { return Json(Type::Object); }
  static Json array() { return Json(Type::Array); }
  static Json str(std::string s);
  static Json num(double v);
  static Json integer(long long v);
  static Json boolean(bool v);
  static Json null() { return Json(Type::Null); }

  Json& set(const std::string& key, Json v);
  Json& push(Json v);

  std::string dump() const;

 private:
  enum class Type { Object, Array, String, Number, Int, Bool, Null };
  explicit Json(Type t) : type_(t) {}

  void write(std::string& out, int depth) const;

  Type type_;
  std::string string_;
  double number_ = 0.0;
  long long int_ = 0;
  bool bool_ = false;
  std::vector<std::pair<std::string, Json>> members_;
  std::vector<Json> items_;
};

std::string format_double(double v);

struct CommandOptions {
  std::string command;  // branches | signatures | chains | evans | index | sweep
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<int> steps;
  std::string csv_path;                  // branch table destination (optional)
  std::vector<std::vector<Complex>> contours;  // from --contour flags
  std::string tol_profile = "default";   // default | strict
  int max_threads = 0;                   // 0 = unlimited
};

struct CommandOutcome {
  Json json = Json::object();
  int exit_code = 0;
};

/// Parse "x0,y0;x1,y1;..." into contour vertices.
std::vector<Complex> parse_contour_spec(const std::string& spec);

/// Run one analysis command against a loaded problem.  Analysis-quality errors
/// (undetermined orders, inconsistent counts) are rendered into the report
/// with exit code 2; precondition and usage errors propagate as exceptions.
CommandOutcome run_command(const Problem& problem, const CommandOptions& options);

/// Build the pencil a non-sweep problem describes.
MatrixPencil pencil_for_problem(const Problem& problem);

/// Write the matched-branch table as CSV (lambda,branch_0,...), 17 significant digits.
void write_branch_csv(const MatrixPencil& pencil, const BranchFamily& family,
                      const std::string& path);

}  // namespace pencilscope
