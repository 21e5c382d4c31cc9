#include "pencilscope/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "pencilscope/evans.hpp"

namespace pencilscope {

namespace {

bool analysis_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::Inconsistent:
    case ErrorCode::OrderUndetermined:
    case ErrorCode::MatchingAmbiguous:
    case ErrorCode::FlagDegenerate:
    case ErrorCode::DegenerateGram:
    case ErrorCode::DerivativeBelowNoise:
    case ErrorCode::ComplexRootsDetected:
    case ErrorCode::PhaseStepTooLarge:
    case ErrorCode::RootOnContour:
    case ErrorCode::NoConvergence:
      return true;
    default:
      return false;
  }
}

void escape_into(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json Json::str(std::string s) {
  Json j(Type::String);
  j.string_ = std::move(s);
  return j;
}
Json Json::num(double v) {
  Json j(Type::Number);
  j.number_ = v;
  return j;
}
Json Json::integer(long long v) {
  Json j(Type::Int);
  j.int_ = v;
  return j;
}
Json Json::boolean(bool v) {
  Json j(Type::Bool);
  j.bool_ = v;
  return j;
}

Json& Json::set(const std::string& key, Json v) {
  members_.emplace_back(key, std::move(v));
  return *this;
}
Json& Json::push(Json v) {
  items_.push_back(std::move(v));
  return *this;
}

void Json::write(std::string& out, int depth) const {
  const std::string pad(2 * depth, ' ');
  const std::string pad_in(2 * (depth + 1), ' ');
  switch (type_) {
    case Type::Object: {
      if (members_.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      for (size_t i = 0; i < members_.size(); ++i) {
        out += pad_in;
        escape_into(out, members_[i].first);
        out += ": ";
        members_[i].second.write(out, depth + 1);
        if (i + 1 < members_.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      break;
    }
    case Type::Array: {
      if (items_.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < items_.size(); ++i) {
        out += pad_in;
        items_[i].write(out, depth + 1);
        if (i + 1 < items_.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      break;
    }
    case Type::String: escape_into(out, string_); break;
    case Type::Number: out += format_double(number_); break;
    case Type::Int: out += std::to_string(int_); break;
    case Type::Bool: out += bool_ ? "true" : "false"; break;
    case Type::Null: out += "null"; break;
  }
}

std::string Json::dump() const {
  std::string out;
  write(out, 0);
  out += '\n';
  return out;
}

std::vector<Complex> parse_contour_spec(const std::string& spec) {
  std::vector<Complex> vertices;
  size_t pos = 0;
  while (pos < spec.size()) {
    size_t end = spec.find(';', pos);
    if (end == std::string::npos) end = spec.size();
    const std::string part = spec.substr(pos, end - pos);
    double x = 0.0, y = 0.0;
    if (std::sscanf(part.c_str(), "%lf,%lf", &x, &y) != 2)
      fail(ErrorCode::InvariantViolation, "contour point '" + part + "' is not 'x,y'");
    vertices.emplace_back(x, y);
    pos = end + 1;
  }
  if (vertices.size() < 3)
    fail(ErrorCode::InvariantViolation, "a contour needs at least three vertices");
  return vertices;
}

MatrixPencil pencil_for_problem(const Problem& problem) {
  switch (problem.kind) {
    case Problem::Kind::Hamiltonian: {
      const auto& p = std::get<HamiltonianProblem>(problem.payload);
      return pencil_from_hamiltonian(HamiltonianSystem(p.j, p.l));
    }
    case Problem::Kind::PolynomialPencil: {
      const auto& p = std::get<PolynomialProblem>(problem.payload);
      return MatrixPencil::polynomial(p.coefficients);
    }
    case Problem::Kind::DdePencil: {
      const auto& p = std::get<DdeProblem>(problem.payload);
      return dde_pencil(p.a, p.b, p.tau);
    }
    case Problem::Kind::CanonicalHamiltonian: {
      const auto& p = std::get<CanonicalProblem>(problem.payload);
      return pencil_from_hamiltonian(CanonicalHamiltonian(p.l_plus, p.l_minus).assemble());
    }
    case Problem::Kind::Sweep:
      fail(ErrorCode::InvariantViolation, "sweep problems are driven by the sweep command");
  }
  fail(ErrorCode::InvariantViolation, "unreachable problem kind");
}

void write_branch_csv(const MatrixPencil& pencil, const BranchFamily& family,
                      const std::string& path) {
  (void)pencil;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << "lambda";
  for (int j = 0; j < family.branch_count(); ++j) out << ",branch_" << j;
  out << "\n";
  for (int i = 0; i < family.grid_size(); ++i) {
    out << format_double(family.grid[i]);
    for (int j = 0; j < family.branch_count(); ++j)
      out << ',' << format_double(family.branches[j].mu[i]);
    out << "\n";
  }
}

namespace {

struct ResolvedWindow {
  double lo;
  double hi;
  int steps;
};

ResolvedWindow resolve_window(const Problem& problem, const CommandOptions& opt,
                              const MatrixPencil& pencil) {
  ResolvedWindow w{-3.0, 3.0, 301};
  if (pencil.kind() == PencilKind::Polynomial && pencil.degree() >= 1) {
    try {
      auto [lo, hi] = real_spectrum_window(pencil);
      w.lo = lo;
      w.hi = hi;
    } catch (const Error&) {
      // Singular leading coefficient: keep the default window.
    }
  }
  w.steps = std::clamp(static_cast<int>((w.hi - w.lo) * 48), 181, 481);
  if (problem.window.lambda_min) w.lo = *problem.window.lambda_min;
  if (problem.window.lambda_max) w.hi = *problem.window.lambda_max;
  if (problem.window.steps) w.steps = *problem.window.steps;
  if (opt.lambda_min) w.lo = *opt.lambda_min;
  if (opt.lambda_max) w.hi = *opt.lambda_max;
  if (opt.steps) w.steps = *opt.steps;
  if (opt.tol_profile == "strict") w.steps *= 2;
  if (!(w.lo < w.hi)) fail(ErrorCode::InvariantViolation, "window bounds are not increasing");
  return w;
}

Json crossing_to_json(const CrossingEvent& ev) {
  Json row = Json::object();
  row.set("lambda0", Json::num(ev.lambda0));
  row.set("geometric_multiplicity", Json::integer(ev.geometric_multiplicity()));
  row.set("algebraic_multiplicity", Json::integer(ev.algebraic_multiplicity()));
  Json branches = Json::array();
  for (const BranchVanishing& bv : ev.branches) {
    Json b = Json::object();
    b.set("branch", Json::integer(bv.branch_id));
    b.set("order", Json::integer(bv.order));
    b.set("eta", Json::integer(bv.eta));
    branches.push(std::move(b));
  }
  row.set("branches", std::move(branches));
  return row;
}

// Pull the algebraically polished location for a crossing when available.
double polished_lambda(const MatrixPencil& pencil, double lambda0) {
  if (pencil.kind() != PencilKind::Polynomial || pencil.degree() < 1) return lambda0;
  try {
    for (const auto& [z, m] : characteristic_values(pencil)) {
      if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z))) continue;
      if (std::abs(z.real() - lambda0) <= 1e-3 * (1.0 + std::abs(lambda0))) return z.real();
    }
  } catch (const Error&) {
  }
  return lambda0;
}

Json run_branches(const MatrixPencil& pencil, const BranchFamily& family,
                  const std::vector<CrossingEvent>& events) {
  Json out = Json::object();
  out.set("dimension", Json::integer(pencil.dimension()));
  out.set("grid_points", Json::integer(family.grid_size()));
  Json rows = Json::array();
  for (const CrossingEvent& ev : events) rows.push(crossing_to_json(ev));
  out.set("crossings", std::move(rows));
  return out;
}

Json run_signatures(const MatrixPencil& pencil, const BranchFamily& family,
                    const std::vector<CrossingEvent>& events) {
  Json rows = Json::array();
  for (const CrossingEvent& ev : events) {
    KreinReport rep = value_signature(pencil, family, ev);
    Json row = Json::object();
    row.set("lambda0", Json::num(ev.lambda0));
    row.set("kappa_plus", Json::integer(rep.kappa_plus));
    row.set("kappa_minus", Json::integer(rep.kappa_minus));
    row.set("kappa", Json::integer(rep.kappa()));
    if (pencil.kind() == PencilKind::Polynomial) {
      const double lam = polished_lambda(pencil, ev.lambda0);
      CanonicalChainSet chains = root_chains(pencil, Complex(lam, 0.0));
      GramIndices gram = gram_indices(pencil, lam, chains);
      row.set("gram_kappa_plus", Json::integer(gram.kappa_plus));
      row.set("gram_kappa_minus", Json::integer(gram.kappa_minus));
      row.set("gram_matches",
              Json::boolean(gram.kappa_plus == rep.kappa_plus && gram.kappa_minus == rep.kappa_minus));
    } else {
      row.set("gram_kappa_plus", Json::null());
      row.set("gram_kappa_minus", Json::null());
      row.set("gram_matches", Json::null());
    }
    rows.push(std::move(row));
  }
  Json out = Json::object();
  out.set("signatures", std::move(rows));
  return out;
}

Json run_chains(const MatrixPencil& pencil, const std::vector<CrossingEvent>& events) {
  if (pencil.kind() != PencilKind::Polynomial)
    fail(ErrorCode::InvariantViolation, "chains require a polynomial pencil");
  Json rows = Json::array();
  for (const CrossingEvent& ev : events) {
    const double lam = polished_lambda(pencil, ev.lambda0);
    CanonicalChainSet chains = root_chains(pencil, Complex(lam, 0.0));
    Json row = Json::object();
    row.set("lambda0", Json::num(lam));
    Json lengths = Json::array();
    for (int len : chains.lengths()) lengths.push(Json::integer(len));
    row.set("chain_lengths", std::move(lengths));
    row.set("residual", Json::num(chain_residual(pencil, chains)));
    rows.push(std::move(row));
  }
  Json out = Json::object();
  out.set("chains", std::move(rows));
  return out;
}

Json run_evans(const MatrixPencil& pencil, const BranchFamily& family,
               const std::vector<CrossingEvent>& events, const CommandOptions& opt) {
  Json rows = Json::array();
  for (const CrossingEvent& ev : events) {
    Json row = Json::object();
    row.set("lambda0", Json::num(ev.lambda0));
    KreinReport rep = value_signature(pencil, family, ev);
    row.set("kappa_graphical", Json::integer(rep.kappa()));
    const bool simple = ev.geometric_multiplicity() == 1 && ev.algebraic_multiplicity() == 1;
    if (simple) {
      EvansSignatureDetail detail = signature_from_evans_detail(pencil, ev.lambda0);
      row.set("kappa_evans", Json::integer(detail.kappa));
      row.set("d_prime_sign", Json::integer(detail.d_lambda > 0 ? 1 : -1));
      row.set("matches", Json::boolean(detail.kappa == rep.kappa()));
    } else {
      row.set("kappa_evans", Json::null());
      row.set("d_prime_sign", Json::null());
      row.set("matches", Json::null());
    }
    rows.push(std::move(row));
  }
  Json out = Json::object();
  out.set("values", std::move(rows));
  Json windings = Json::array();
  for (const auto& vertices : opt.contours) {
    Contour c;
    c.vertices = vertices;
    c.samples_per_edge = opt.tol_profile == "strict" ? 64 : 32;
    Json w = Json::object();
    Json verts = Json::array();
    for (Complex z : vertices) {
      Json v = Json::array();
      v.push(Json::num(z.real()));
      v.push(Json::num(z.imag()));
      verts.push(std::move(v));
    }
    w.set("contour", std::move(verts));
    w.set("count", Json::integer(winding_number(pencil, c, 0.0)));
    windings.push(std::move(w));
  }
  out.set("windings", std::move(windings));
  return out;
}

Json index_report_to_json(const IndexReport& rep) {
  Json out = Json::object();
  out.set("dimension", Json::integer(rep.dimension));
  out.set("n_minus_l0", Json::integer(rep.n_minus_l0));
  out.set("n_plus_lp", Json::integer(rep.n_plus_lp));
  out.set("n_minus_lp", Json::integer(rep.n_minus_lp));
  Json z = Json::object();
  z.set("z_plus_down", Json::integer(rep.z.z_plus_down));
  z.set("z_minus_down", Json::integer(rep.z.z_minus_down));
  z.set("z_plus_up", Json::integer(rep.z.z_plus_up));
  z.set("z_minus_up", Json::integer(rep.z.z_minus_up));
  z.set("z_plus", Json::integer(rep.z.z_plus));
  z.set("z_minus", Json::integer(rep.z.z_minus));
  out.set("zero_counts", std::move(z));
  out.set("kappa_sum_positive", Json::integer(rep.kappa_sum_positive));
  out.set("kappa_sum_negative", Json::integer(rep.kappa_sum_negative));
  out.set("kappa_plus_sum_positive", Json::integer(rep.kappa_plus_sum_positive));
  out.set("kappa_minus_sum_negative", Json::integer(rep.kappa_minus_sum_negative));
  out.set("conservation_residual", Json::integer(rep.conservation_residual));
  out.set("gker_dimension", Json::integer(rep.gker_dimension));
  out.set("ker_l_dimension", Json::integer(rep.ker_l_dimension));
  out.set("zeta", Json::integer(rep.zeta));
  out.set("n_unstable", Json::integer(rep.n_unstable_formula));
  out.set("n_unstable_direct", Json::integer(rep.n_unstable_direct));
  out.set("n_stable", Json::integer(rep.n_stable));
  out.set("consistent", Json::boolean(rep.consistent));
  if (rep.parity_holds) out.set("parity_holds", Json::boolean(*rep.parity_holds));
  return out;
}

Json run_index(const Problem& problem, const MatrixPencil& pencil) {
  Json out = Json::object();
  switch (problem.kind) {
    case Problem::Kind::Hamiltonian: {
      const auto& p = std::get<HamiltonianProblem>(problem.payload);
      HamiltonianSystem sys(p.j, p.l);
      out.set("index", index_report_to_json(unstable_count(sys)));
      if (sys.is_real()) out.set("full_symmetry", index_report_to_json(full_symmetry_count(sys)));
      break;
    }
    case Problem::Kind::CanonicalHamiltonian: {
      const auto& p = std::get<CanonicalProblem>(problem.payload);
      CanonicalHamiltonian can(p.l_plus, p.l_minus);
      CanonicalBoundReport bound = canonical_lower_bound(can);
      Json b = Json::object();
      b.set("bound", Json::integer(bound.bound));
      b.set("real_point_count", Json::integer(bound.n_real));
      b.set("satisfied", Json::boolean(bound.satisfied));
      out.set("canonical_bound", std::move(b));
      out.set("index", index_report_to_json(unstable_count(can.assemble())));
      break;
    }
    case Problem::Kind::PolynomialPencil: {
      out.set("conservation_residual", Json::integer(conservation_check(pencil)));
      break;
    }
    default:
      fail(ErrorCode::InvariantViolation, "index command needs a Hamiltonian, canonical, or polynomial problem");
  }
  return out;
}

struct SweepValueRow {
  double lambda0;
  int kappa;
};

struct SweepResult {
  double t = 0.0;
  bool all_real = false;
  std::vector<SweepValueRow> values;
  std::string error;  // analysis failure for this parameter value
};

SweepResult sweep_one(const SweepProblem& sp, double t) {
  SweepResult res;
  res.t = t;
  try {
    ComplexMatrix l = sp.direction;
    l *= Complex(t);
    l += sp.base;
    HamiltonianSystem sys(sp.j, l);
    MatrixPencil pencil = pencil_from_hamiltonian(sys);

    int total_real = 0, total = 0;
    std::vector<std::pair<double, int>> real_values;
    for (const auto& [z, m] : characteristic_values(pencil)) {
      total += m;
      if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z))) {
        total_real += m;
        real_values.emplace_back(z.real(), m);
      }
    }
    res.all_real = total_real == total;

    auto [lo, hi] = real_spectrum_window(pencil);
    const int steps = std::clamp(static_cast<int>((hi - lo) * 48), 181, 481);
    BranchFamily family = sample_branches(pencil, lo, hi, steps);
    std::vector<CrossingEvent> events = find_crossings(pencil, family);
    for (const CrossingEvent& ev : events) {
      KreinReport rep = value_signature(pencil, family, ev);
      res.values.push_back({ev.lambda0, rep.kappa()});
    }
    std::sort(res.values.begin(), res.values.end(),
              [](const SweepValueRow& a, const SweepValueRow& b) { return a.lambda0 < b.lambda0; });
  } catch (const Error& e) {
    res.error = e.what();
  }
  return res;
}

struct SweepOutput {
  Json json = Json::object();
  bool incomplete = false;
};

SweepOutput run_sweep(const Problem& problem, const CommandOptions& opt) {
  const auto& sp = std::get<SweepProblem>(problem.payload);

  std::vector<SweepResult> results(sp.t_values.size());
  int threads = opt.max_threads > 0 ? opt.max_threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(sp.t_values.size())));
  if (threads <= 1) {
    for (size_t i = 0; i < sp.t_values.size(); ++i) results[i] = sweep_one(sp, sp.t_values[i]);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < sp.t_values.size(); i = next.fetch_add(1))
          results[i] = sweep_one(sp, sp.t_values[i]);
      });
    for (std::thread& th : pool) th.join();
  }

  Json reports = Json::array();
  Json collisions = Json::array();
  bool any_error = false;
  for (const SweepResult& res : results) {
    Json row = Json::object();
    row.set("t", Json::num(res.t));
    if (!res.error.empty()) {
      row.set("error", Json::str(res.error));
      reports.push(std::move(row));
      any_error = true;
      continue;
    }
    row.set("all_real", Json::boolean(res.all_real));
    Json vals = Json::array();
    for (const SweepValueRow& v : res.values) {
      Json rv = Json::object();
      rv.set("lambda0", Json::num(v.lambda0));
      rv.set("kappa", Json::integer(v.kappa));
      vals.push(std::move(rv));
    }
    row.set("values", std::move(vals));
    reports.push(std::move(row));

    // Near-coincident neighbours: same-signature pairs cannot leave the axis.
    for (size_t i = 0; i + 1 < res.values.size(); ++i) {
      const SweepValueRow& a = res.values[i];
      const SweepValueRow& b = res.values[i + 1];
      const double gap = b.lambda0 - a.lambda0;
      const double tol = 0.05 * (1.0 + 0.5 * (std::abs(a.lambda0) + std::abs(b.lambda0)));
      if (gap < tol) {
        Json c = Json::object();
        c.set("t", Json::num(res.t));
        c.set("lambda_a", Json::num(a.lambda0));
        c.set("lambda_b", Json::num(b.lambda0));
        c.set("gap", Json::num(gap));
        const bool same = a.kappa == b.kappa;
        c.set("same_signature", Json::boolean(same));
        c.set("classification", Json::str(same ? "harmless" : "hopf_capable"));
        collisions.push(std::move(c));
      }
    }
  }

  SweepOutput out;
  out.json.set("reports", std::move(reports));
  out.json.set("collisions", std::move(collisions));
  if (any_error) out.json.set("incomplete", Json::boolean(true));
  out.incomplete = any_error;
  return out;
}

}  // namespace

CommandOutcome run_command(const Problem& problem, const CommandOptions& options) {
  CommandOutcome outcome;
  Json body = Json::object();
  body.set("command", Json::str(options.command));
  body.set("problem_kind", Json::str(problem_kind_name(problem.kind)));

  try {
    if (options.command == "sweep") {
      if (problem.kind != Problem::Kind::Sweep)
        fail(ErrorCode::InvariantViolation, "sweep command needs a sweep problem");
      SweepOutput r = run_sweep(problem, options);
      body.set("result", std::move(r.json));
      outcome.json = std::move(body);
      outcome.exit_code = r.incomplete ? 2 : 0;
      return outcome;
    }

    MatrixPencil pencil = pencil_for_problem(problem);
    if (options.command == "index") {
      Json r = run_index(problem, pencil);
      body.set("result", std::move(r));
      outcome.json = std::move(body);
      return outcome;
    }

    ResolvedWindow w = resolve_window(problem, options, pencil);
    body.set("lambda_min", Json::num(w.lo));
    body.set("lambda_max", Json::num(w.hi));
    body.set("steps", Json::integer(w.steps));
    BranchFamily family = sample_branches(pencil, w.lo, w.hi, w.steps);
    if (!options.csv_path.empty()) write_branch_csv(pencil, family, options.csv_path);
    std::vector<CrossingEvent> events = find_crossings(pencil, family);

    Json r = Json::object();
    if (options.command == "branches") {
      r = run_branches(pencil, family, events);
    } else if (options.command == "signatures") {
      r = run_signatures(pencil, family, events);
    } else if (options.command == "chains") {
      r = run_chains(pencil, events);
    } else if (options.command == "evans") {
      r = run_evans(pencil, family, events, options);
    } else {
      fail(ErrorCode::InvariantViolation, "unknown command '" + options.command + "'");
    }
    body.set("result", std::move(r));
    outcome.json = std::move(body);
    return outcome;
  } catch (const Error& e) {
    if (!analysis_error(e.code())) throw;
    Json err = Json::object();
    err.set("code", Json::str(error_code_name(e.code())));
    err.set("message", Json::str(e.what()));
    body.set("error", std::move(err));
    outcome.json = std::move(body);
    outcome.exit_code = 2;
    return outcome;
  }
}

}  // namespace pencilscope
