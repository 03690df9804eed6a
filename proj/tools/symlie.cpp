// symlie: command-line driver for the verification modules.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "symlie/algebra.hpp"
#include "symlie/error.hpp"
#include "symlie/family.hpp"
#include "symlie/flows.hpp"
#include "symlie/invariants.hpp"
#include "symlie/jet.hpp"
#include "symlie/parse.hpp"

#ifndef SYMLIE_FIXTURE_DIR
#define SYMLIE_FIXTURE_DIR "fixtures"
#endif

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace symlie;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

// Thrown for bad command-line values; mapped to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Output {
  std::string command;
  bool passed = true;
  std::ostringstream text;
  ordered_json json = ordered_json::object();
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixture_root() {
  if (const char* env = std::getenv("SYMLIE_FIXTURES")) return env;
  return SYMLIE_FIXTURE_DIR;
}

// Paths are tried as given, then under the fixture directory, then by file
// name (with or without extension) in any fixture subdirectory.
std::string resolve(const std::string& path, const std::string& extension = "") {
  if (fs::exists(path)) return path;
  const fs::path root = fixture_root();
  if (fs::exists(root / path)) return (root / path).string();
  const std::string name = fs::path(path).filename().string();
  if (fs::is_directory(root))
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (!entry.is_regular_file()) continue;
      const std::string file = entry.path().filename().string();
      if (file == name || (!extension.empty() && file == name + extension))
        return entry.path().string();
    }
  throw UsageError("cannot find file '" + path + "'");
}

ODEFamily load_family(const std::string& name_or_path) {
  try {
    return ODEFamily::builtin(name_or_path);
  } catch (const std::invalid_argument&) {
  }
  return ODEFamily::parse(read_text_file(resolve(name_or_path, ".fam")));
}

VectorField load_field(const std::string& path, const SymbolContext& context) {
  return parse_vector_field(read_text_file(resolve(path, ".vf")), context);
}

PointTransform load_transform(const std::string& path) {
  return PointTransform::parse(read_text_file(resolve(path, ".tr")));
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<std::pair<double, double>> parse_grid(const std::string& text) {
  const auto v = parse_numbers(text);
  if (v.empty() || v.size() % 2 != 0) throw UsageError("grid needs x,y pairs");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < v.size(); i += 2) out.emplace_back(v[i], v[i + 1]);
  return out;
}

void require_positive(double tol) {
  if (!(tol > 0)) throw UsageError("tolerance must be positive");
}

// ------------------------------------------------------------ commands

void run_check_symmetry(Output& out, const std::string& family_name, const std::string& generator) {
  const ODEFamily family = load_family(family_name);
  const VectorField field = load_field(generator, family_context(family));
  const SymmetryCheck check = check_symmetry(field, family);
  out.passed = check.holds;
  out.text << "family: " << family_name << "\n"
           << "generator: " << generator << "\n"
           << "residue: " << to_string(check.residue) << "\n"
           << "symmetry " << (check.holds ? "pass" : "fail") << "\n";
  out.json["family"] = family_name;
  out.json["holds"] = check.holds;
  out.json["residue"] = to_string(check.residue);
}

void run_bracket(Output& out, const std::string& left, const std::string& right) {
  const SymbolContext context = SymbolContext::standard();
  const VectorField result = bracket(load_field(left, context), load_field(right, context));
  out.text << to_string(result) << "\n";
  out.json["bracket"] = to_string(result);
  out.json["zero"] = result.is_zero();
}

void run_verify_relations(Output& out) {
  out.json["relations"] = ordered_json::array();
  for (const auto& id : relation_ids()) {
    const RelationCheck r = verify_relation(id);
    out.passed = out.passed && r.holds;
    out.text << id << " " << (r.holds ? "pass" : "fail") << "  " << r.statement << "\n";
    if (!r.holds) out.text << "  residue: " << to_string(r.residue) << "\n";
    out.json["relations"].push_back({{"id", id},
                                     {"statement", r.statement},
                                     {"holds", r.holds},
                                     {"residue", to_string(r.residue)}});
  }
}

void run_levi(Output& out, const std::string& snapshot_name, const std::string& table,
              bool print_table) {
  if (snapshot_name.empty() == table.empty())
    throw UsageError("levi needs exactly one of --snapshot or --table");
  StructureConstants sc{{}};
  if (!table.empty()) {
    sc = StructureConstants::parse(read_text_file(resolve(table)));
  } else {
    std::vector<std::string> labels;
    const auto fields = snapshot(snapshot_name, labels);
    sc = truncate(fields, labels);
  }
  const LeviReport rep = levi_report(sc);
  out.passed = rep.radical_is_ideal && rep.complement_is_subalgebra &&
               rep.complement_semisimple && rep.complement_radical_in_radical;
  if (print_table) out.text << sc.to_text();
  out.text << rep.to_text(sc.labels());
  out.text << "radical dim " << rep.radical.size() << " / complement dim " << rep.complement.size()
           << "\n";
  out.text << "levi " << (out.passed ? "pass" : "fail") << "\n";
  out.json["labels"] = sc.labels();
  out.json["dimension"] = rep.dimension;
  out.json["derived_series"] = rep.derived_series;
  out.json["radical_dimension"] = rep.radical.size();
  out.json["radical_indices"] = rep.radical_indices;
  out.json["radical_derived_series"] = rep.radical_derived_series;
  out.json["complement_dimension"] = rep.complement.size();
  out.json["complement_killing_rank"] = rep.complement_killing_rank;
  out.json["complement_semisimple"] = rep.complement_semisimple;
  out.json["complement_is_subalgebra"] = rep.complement_is_subalgebra;
  out.json["radical_is_ideal"] = rep.radical_is_ideal;
  out.json["complement_radical_in_radical"] = rep.complement_radical_in_radical;
  out.json["table"] = sc.to_text();
}

void run_transform(Output& out, const std::string& family_name, const std::string& path,
                   bool lift) {
  const ODEFamily family = load_family(family_name);
  const PointTransform transform = load_transform(path);
  const TransformResult tr = transform_equation(family, transform);
  out.passed = tr.is_equivalence();
  ordered_json coefficients = ordered_json::object();
  for (const auto& [k, b] : tr.by_order) {
    out.text << "B" << k << " = " << to_string(b) << "\n";
    coefficients[std::to_string(k)] = to_string(b);
  }
  out.text << "inhomogeneous = " << to_string(tr.inhomogeneous) << "\n"
           << "certificate = " << to_string(tr.certificate) << "\n";
  for (int k : tr.obstructions) out.text << "obstruction: order " << k << "\n";
  if (tr.inhomogeneous_obstruction) out.text << "obstruction: inhomogeneous term\n";
  out.json["family"] = family_name;
  out.json["coefficients"] = coefficients;
  out.json["inhomogeneous"] = to_string(tr.inhomogeneous);
  out.json["certificate"] = to_string(tr.certificate);
  out.json["obstructions"] = tr.obstructions;
  out.json["inhomogeneous_obstruction"] = tr.inhomogeneous_obstruction;
  if (lift) {
    const LiftResult l = lift_to_symmetry(family, transform);
    out.passed = out.passed && l.ok;
    ordered_json gamma = ordered_json::object();
    for (const auto& [symbol, e] : l.gamma) {
      out.text << symbol << " -> " << to_string(e) << "\n";
      gamma[symbol] = to_string(e);
    }
    out.text << "multiplier = " << to_string(l.multiplier) << "\n";
    for (const auto& o : l.obstructions) out.text << "lift obstruction: " << o << "\n";
    out.json["lift"] = {{"ok", l.ok},
                        {"gamma", gamma},
                        {"multiplier", to_string(l.multiplier)},
                        {"obstructions", l.obstructions}};
  }
  out.text << "equivalence " << (out.passed ? "pass" : "fail") << "\n";
  out.json["equivalence"] = tr.is_equivalence();
}

std::string family_or_order(const std::string& family, int order) {
  if (order > 0) return "normal:" + std::to_string(order);
  return family;
}

void run_determining(Output& out, const std::string& family_name, bool show) {
  const DeterminingSystem sys = determining_system(load_family(family_name));
  out.text << "family: " << family_name << "\n"
           << "ansatz: " << to_string(sys.ansatz) << "\n"
           << "equations: " << sys.equations.size() << "\n";
  ordered_json eqs = ordered_json::array();
  for (std::size_t i = 0; i < sys.equations.size(); ++i) {
    if (show) out.text << "[" << i << "] " << to_string(sys.equations[i]) << " = 0\n";
    eqs.push_back(to_string(sys.equations[i]));
  }
  out.json["family"] = family_name;
  out.json["ansatz"] = to_string(sys.ansatz);
  out.json["count"] = sys.equations.size();
  out.json["equations"] = eqs;
}

void run_verify_generator(Output& out, const std::string& family_name,
                          const std::string& generator) {
  const ODEFamily family = load_family(family_name);
  const DeterminingSystem sys = determining_system(family);
  const VectorField field = load_field(generator, family_context(family));
  const GeneratorVerdict v = verify_generator(field, sys);
  out.passed = v.holds;
  out.text << "family: " << family_name << "\n"
           << "generator: " << generator << "\n"
           << "equations: " << sys.equations.size() << "\n";
  for (std::size_t i : v.failing)
    out.text << "failing [" << i << "] " << to_string(sys.equations[i]) << " = 0\n";
  out.text << "generator " << (v.holds ? "pass" : "fail") << "\n";
  out.json["family"] = family_name;
  out.json["holds"] = v.holds;
  out.json["equations"] = sys.equations.size();
  out.json["failing"] = v.failing;
}

void run_split(Output& out, const std::string& generator, const std::vector<std::string>& zero) {
  const GeneratorSplit s = split_generator(load_field(generator, SymbolContext::standard()), zero);
  out.text << "X1: " << to_string(s.x1) << "\n"
           << "X2: " << to_string(s.x2) << "\n";
  for (const auto& w : s.warnings) out.text << "warning: " << w << "\n";
  out.json["x1"] = to_string(s.x1);
  out.json["x2"] = to_string(s.x2);
  out.json["warnings"] = s.warnings;
}

void run_invariants_verify(Output& out, const std::string& name, const std::string& group,
                           bool no_k1) {
  std::vector<InvariantCandidate> candidates;
  if (name == "all")
    candidates = psi_catalog();
  else
    candidates.push_back(invariant_by_name(name));
  const GroupTag tag = parse_group(group);
  out.json["group"] = to_string(tag);
  out.json["include_k1"] = !no_k1;
  out.json["results"] = ordered_json::array();
  for (const auto& c : candidates) {
    const AnnihilationResult r = annihilation_check(c, tag, !no_k1);
    out.passed = out.passed && r.holds;
    out.text << c.name << " " << (r.holds ? "pass" : "fail") << " order " << c.order << "\n";
    if (!c.note.empty()) out.text << "  reading: " << c.note << "\n";
    if (!r.holds) out.text << "  residue: " << to_string(r.residue) << "\n";
    out.json["results"].push_back({{"name", c.name},
                                   {"order", c.order},
                                   {"holds", r.holds},
                                   {"note", c.note},
                                   {"residue", to_string(r.residue)}});
  }
}

void run_count(Output& out, const std::string& group, int order, int trials, std::uint64_t seed,
               int expect) {
  const RankReport r = invariant_count(parse_group(group), order, trials, seed);
  out.text << "group " << to_string(r.group) << " order " << r.order << "\n"
           << "dimension " << r.dimension << "\n"
           << "generators " << r.generators << "\n"
           << "trial ranks";
  for (auto t : r.trial_ranks) out.text << " " << t;
  out.text << "\nrank " << r.rank << "\ncount " << r.count << "\n";
  if (expect >= 0) {
    out.passed = static_cast<int>(r.count) == expect;
    out.text << "expected " << expect << " " << (out.passed ? "pass" : "fail") << "\n";
  }
  out.json["group"] = to_string(r.group);
  out.json["order"] = r.order;
  out.json["seed"] = seed;
  out.json["dimension"] = r.dimension;
  out.json["generators"] = r.generators;
  out.json["coordinates"] = r.coordinates;
  out.json["trial_ranks"] = r.trial_ranks;
  out.json["rank"] = r.rank;
  out.json["count"] = r.count;
}

std::map<std::string, NumericFunction> parse_functions(const std::vector<std::string>& specs) {
  std::map<std::string, NumericFunction> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("function binding needs name=value");
    const std::string name = s.substr(0, eq), value = s.substr(eq + 1);
    if (value == "exp") {
      out.insert_or_assign(name, NumericFunction::exponential());
    } else {
      SymbolContext context = SymbolContext::standard();
      out.insert_or_assign(name, NumericFunction::from_expression(parse_expression(value, context)));
    }
  }
  return out;
}

void run_invariants_numeric(Output& out, const std::string& name, const std::string& transform,
                            const std::string& a1, const std::string& a0,
                            const std::vector<std::string>& functions, const std::string& points,
                            double tol) {
  require_positive(tol);
  const InvariantCandidate inv = invariant_by_name(name);
  const InvarianceReport r = numeric_invariance_check(
      inv, load_transform(transform), parse_expression(a1), parse_expression(a0),
      parse_functions(functions), parse_numbers(points), tol);
  out.passed = r.passed;
  ordered_json samples = ordered_json::array();
  for (const auto& s : r.samples) {
    if (s.skipped)
      out.text << "z " << s.z << " skipped (" << s.reason << ")\n";
    else
      out.text << "z " << s.z << " original " << s.original << " transformed " << s.transformed
               << " deviation " << fmt(s.deviation) << "\n";
    samples.push_back({{"z", s.z},
                       {"skipped", s.skipped},
                       {"original", s.original},
                       {"transformed", s.transformed},
                       {"deviation", s.deviation}});
  }
  out.text << r.line() << "\n";
  out.json["name"] = r.name;
  out.json["tolerance"] = tol;
  out.json["max_deviation"] = r.max_deviation;
  out.json["samples"] = samples;
}

std::vector<std::string> fixture_list(const std::string& name) {
  if (name == "all") return flow_fixture_names();
  return {name};
}

void run_flow_integrate(Output& out, const std::string& fixture_name, double k1, double x,
                        double y, double t, const std::string& a1, const std::string& a0,
                        int order, int steps, double tol, const std::string& csv) {
  require_positive(tol);
  const FlowFixture fixture = flow_fixture(fixture_name);
  FlowSpec spec;
  if (!a1.empty() || !a0.empty()) {
    spec = augmented_flow_spec(fixture, k1, parse_expression(a1.empty() ? "0" : a1),
                               parse_expression(a0.empty() ? "0" : a0), x, y, t, order);
  } else {
    spec.field = x1_generator(fixture.f, Expression(Rational(k1)));
    spec.jets = {{"y", 0}};
    spec.initial = {x, y};
    spec.t_end = t;
  }
  spec.steps = steps;
  spec.tolerance = tol;
  const Trajectory traj = integrate_flow(spec);
  if (!csv.empty()) {
    if (csv == "-") {
      out.text << traj.to_csv();
    } else {
      std::ofstream file(csv);
      if (!file) throw UsageError("cannot write '" + csv + "'");
      file << traj.to_csv();
    }
  }
  out.text << "steps " << traj.steps << "\nerror estimate " << fmt(traj.error_estimate) << "\n";
  ordered_json endpoint = ordered_json::object();
  for (std::size_t i = 0; i < traj.coordinates.size(); ++i) {
    out.text << traj.coordinates[i] << " = " << traj.endpoint()[i] << "\n";
    endpoint[traj.coordinates[i]] = traj.endpoint()[i];
  }
  out.json["fixture"] = fixture_name;
  out.json["steps"] = traj.steps;
  out.json["error_estimate"] = traj.error_estimate;
  out.json["endpoint"] = endpoint;
}

void run_flow_verify(Output& out, const std::string& fixture_name, const std::string& k1_list,
                     double t, const std::string& grid, double tol) {
  require_positive(tol);
  out.json["reports"] = ordered_json::array();
  for (const auto& name : fixture_list(fixture_name)) {
    const FlowFixture fixture = flow_fixture(name);
    for (double k1 : parse_numbers(k1_list)) {
      FlowReport r = verify_flow_formula(fixture, k1, t, parse_grid(grid), tol);
      std::ostringstream label;
      label << name << " k1=" << k1;
      r.name = label.str();
      out.passed = out.passed && r.passed;
      std::size_t skipped = 0;
      for (const auto& p : r.points) skipped += p.skipped ? 1 : 0;
      out.text << r.line();
      if (skipped) out.text << " (" << skipped << " skipped)";
      out.text << "\n";
      out.json["reports"].push_back({{"fixture", name},
                                     {"k1", k1},
                                     {"passed", r.passed},
                                     {"max_error", r.max_error},
                                     {"skipped", skipped}});
    }
  }
}

void run_flow_lemma(Output& out, const std::string& fixture_name, const std::string& k1_list,
                    double t, const std::string& a1, const std::string& a0,
                    const std::string& samples, double tol) {
  require_positive(tol);
  out.json["reports"] = ordered_json::array();
  for (const auto& name : fixture_list(fixture_name)) {
    const FlowFixture fixture = flow_fixture(name);
    for (double k1 : parse_numbers(k1_list)) {
      const LemmaReport r = lemma_consistency_check(fixture, k1, t, parse_expression(a1),
                                                    parse_expression(a0), parse_numbers(samples),
                                                    tol);
      out.passed = out.passed && r.passed;
      out.text << name << " k1=" << k1 << " " << r.line() << "\n";
      out.json["reports"].push_back(
          {{"fixture", name}, {"k1", k1}, {"passed", r.passed}, {"max_error", r.max_error}});
    }
  }
}

bool is_comment(const std::string& line) {
  const auto p = line.find_first_not_of(" \t");
  return p == std::string::npos || line.compare(p, 2, "//") == 0;
}

void run_parse(Output& out, const std::string& kind, const std::string& path) {
  const std::string text = read_text_file(resolve(path));
  std::string printed;
  bool same = false;
  if (kind == "expr") {
    std::istringstream in(text);
    std::string line;
    std::size_t lines = 0, matched = 0;
    while (std::getline(in, line)) {
      if (is_comment(line)) continue;
      SymbolContext c1 = SymbolContext::standard(), c2 = SymbolContext::standard();
      const Expression e = parse_expression(line, c1);
      const std::string p = to_string(e);
      const bool ok = parse_expression(p, c2) == e;
      ++lines;
      matched += ok ? 1 : 0;
      out.text << p << (ok ? "" : "   <- round trip differs") << "\n";
    }
    same = matched == lines;
    out.json["expressions"] = lines;
    out.json["round_trips"] = matched;
  } else if (kind == "field") {
    const VectorField f = parse_vector_field(text);
    printed = to_string(f);
    same = parse_vector_field(printed) == f;
  } else if (kind == "family") {
    const ODEFamily f = ODEFamily::parse(text);
    printed = f.to_text();
    same = ODEFamily::parse(printed).to_text() == printed;
  } else if (kind == "transform") {
    const PointTransform tr = PointTransform::parse(text);
    printed = tr.to_text();
    const PointTransform again = PointTransform::parse(printed);
    same = again.x_of == tr.x_of && again.y_of == tr.y_of && again.to_text() == printed;
  } else if (kind == "table") {
    const StructureConstants sc = StructureConstants::parse(text);
    printed = sc.to_text();
    same = StructureConstants::parse(printed) == sc;
  } else {
    throw UsageError("unknown kind '" + kind + "' (expr, field, family, transform, table)");
  }
  if (!printed.empty()) {
    out.text << printed;
    if (printed.back() != '\n') out.text << "\n";
    out.json["printed"] = printed;
  }
  out.passed = same;
  out.text << "round trip " << (same ? "pass" : "fail") << "\n";
  out.json["kind"] = kind;
}

const char* kJsonSchema = R"(
Machine output (--json): one JSON object per run.
  command  subcommand path, e.g. "invariants count"
  status   "pass" | "fail" | "error"
  error    message, present when status is "error"
  plus per-command fields:
    check-symmetry    family, holds, residue
    bracket           bracket, zero
    verify-relations  relations[{id, statement, holds, residue}]
    levi              labels, dimension, derived_series, radical_dimension,
                      radical_indices, radical_derived_series,
                      complement_dimension, complement_killing_rank,
                      complement_semisimple, complement_is_subalgebra,
                      radical_is_ideal, complement_radical_in_radical, table
    transform         family, coefficients{order: B}, inhomogeneous,
                      certificate, obstructions, inhomogeneous_obstruction,
                      equivalence, lift{ok, gamma, multiplier, obstructions}
    determining       family, ansatz, count, equations[]
    verify-generator  family, holds, equations, failing[]
    split             x1, x2, warnings[]
    invariants verify group, include_k1, results[{name, order, holds, note, residue}]
    invariants count  group, order, seed, dimension, generators, coordinates,
    rank              trial_ranks, rank, count
    invariants numeric name, tolerance, max_deviation,
                      samples[{z, skipped, original, transformed, deviation}]
    flow integrate    fixture, steps, error_estimate, endpoint{coordinate: value}
    flow verify       reports[{fixture, k1, passed, max_error, skipped}]
    flow lemma        reports[{fixture, k1, passed, max_error}]
    parse             kind, printed | expressions, round_trips
Exit codes: 0 all checks pass, 1 a check failed, 2 usage or input error.
Files are looked up as given, then under the fixture directory
(SYMLIE_FIXTURES overrides it), then by name in its subdirectories.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry and equivalence checks for linear ODE families"};
  app.footer(kJsonSchema);
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Print one JSON document instead of text");

  Output out;
  std::function<void()> action;

  std::string family = "e3nor", generator, left, right, snapshot_name, table, transform;
  std::string group = "Gc", inv_name, a1, a0, points, k1_list, grid, samples, csv, kind, file;
  std::string fixture;
  std::vector<std::string> zero{"g"}, functions;
  bool print_table = false, lift = false, show = false, no_k1 = false;
  int order = 0, trials = 5, expect = -1, steps = 0;
  std::uint64_t seed = 0;
  double tol = 1e-9, t = 0.5, k1 = 0, x0 = 0.5, y0 = 1;

  auto sub = [&](CLI::App* parent, const std::string& name, const std::string& help,
                 std::function<void()> fn) {
    CLI::App* s = parent->add_subcommand(name, help);
    s->callback([&out, &action, s, fn] {
      out.command = s->get_parent()->get_parent() ? s->get_parent()->get_name() + " " +
                                                        s->get_name()
                                                  : s->get_name();
      action = fn;
    });
    return s;
  };

  auto* cs = sub(&app, "check-symmetry", "Apply a prolonged generator to a family's equation",
                 [&] { run_check_symmetry(out, family, generator); });
  cs->add_option("--family", family, "Builtin family or .fam file")->capture_default_str();
  cs->add_option("--generator", generator, "Vector field file")->required();

  auto* br = sub(&app, "bracket", "Lie bracket of two vector fields",
                 [&] { run_bracket(out, left, right); });
  br->add_option("left", left)->required();
  br->add_option("right", right)->required();

  sub(&app, "verify-relations", "Check the X1/X2 commutation relations",
      [&] { run_verify_relations(out); });

  auto* lv = sub(&app, "levi", "Levi decomposition of a finite snapshot or table",
                 [&] { run_levi(out, snapshot_name, table, print_table); });
  lv->add_option("--snapshot", snapshot_name, "deg2, x1deg2, x2deg2 or deg3");
  lv->add_option("--table", table, "Structure constant file");
  lv->add_flag("--print-table", print_table);

  auto* tr = sub(&app, "transform", "Pull a family's equation back through a point transform",
                 [&] { run_transform(out, family, transform, lift); });
  tr->add_option("--family", family)->capture_default_str();
  tr->add_option("--transform", transform, "Transform file")->required();
  tr->add_flag("--lift", lift, "Also lift to a symmetry of the augmented equation");

  auto* dt = sub(&app, "determining", "Generate the determining equations",
                 [&] { run_determining(out, family_or_order(family, order), show); });
  dt->add_option("--family", family)->capture_default_str();
  dt->add_option("--order", order, "Use normal:<n> instead of --family");
  dt->add_flag("--show", show, "Print every equation");

  auto* vg = sub(&app, "verify-generator", "Substitute a generator into the determining system",
                 [&] { run_verify_generator(out, family_or_order(family, order), generator); });
  vg->add_option("--family", family)->capture_default_str();
  vg->add_option("--order", order, "Use normal:<n> instead of --family");
  vg->add_option("--generator", generator)->required();

  auto* sp = sub(&app, "split", "Split a generator into X1 and X2 parts",
                 [&] { run_split(out, generator, zero); });
  sp->add_option("--generator", generator)->required();
  sp->add_option("--zero", zero, "Functions set to zero for X1")->capture_default_str();

  auto* inv = app.add_subcommand("invariants", "Differential invariant checks");
  inv->require_subcommand(1);
  auto* iv = sub(inv, "verify", "Annihilation by the prolonged group action",
                 [&] { run_invariants_verify(out, inv_name, group, no_k1); });
  inv_name = "all";
  iv->add_option("--name", inv_name, "psi, psi2, mu or all")->capture_default_str();
  iv->add_option("--group", group, "Gc or GS")->capture_default_str();
  iv->add_flag("--no-k1", no_k1, "Drop the y-scaling direction");

  auto add_count_options = [&](CLI::App* c) {
    c->add_option("--group", group, "Gc or GS")->capture_default_str();
    c->add_option("--order", order, "Jet order 0..4")->required();
    c->add_option("--trials", trials)->capture_default_str();
    c->add_option("--seed", seed)->capture_default_str();
    c->add_option("--expect", expect, "Fail unless the count equals this");
  };
  auto count_fn = [&] { run_count(out, group, order, trials, seed, expect); };
  add_count_options(sub(inv, "count", "Count invariants from the orbit rank", count_fn));
  add_count_options(sub(&app, "rank", "Same as 'invariants count'", count_fn));

  auto* in = sub(inv, "numeric", "Compare an invariant before and after a transform", [&] {
    run_invariants_numeric(out, inv_name, transform, a1, a0, functions, points, tol);
  });
  in->add_option("--name", inv_name, "psi, psi2 or mu");
  in->add_option("--transform", transform)->required();
  in->add_option("--a1", a1, "a1 as an expression in x")->required();
  in->add_option("--a0", a0, "a0 as an expression in x")->required();
  in->add_option("--function", functions, "name=exp or name=<expression in z>");
  in->add_option("--points", points, "Comma-separated z values")->required();
  in->add_option("--tol", tol)->capture_default_str();

  auto* fl = app.add_subcommand("flow", "One-parameter subgroups of X1");
  fl->require_subcommand(1);
  auto* fi = sub(fl, "integrate", "Integrate a flow with RK4", [&] {
    run_flow_integrate(out, fixture, k1, x0, y0, t, a1, a0, order, steps, tol, csv);
  });
  fi->add_option("--fixture", fixture, "translation, scaling or projective")->required();
  fi->add_option("--k1", k1)->capture_default_str();
  fi->add_option("--x", x0)->capture_default_str();
  fi->add_option("--y", y0)->capture_default_str();
  fi->add_option("-t,--time", t)->capture_default_str();
  fi->add_option("--a1", a1, "Carry a1 (expression in x) along the flow");
  fi->add_option("--a0", a0, "Carry a0 (expression in x) along the flow");
  fi->add_option("--order", order, "a-jet order when a1/a0 are given");
  fi->add_option("--steps", steps, "Initial step count (0 = automatic)");
  fi->add_option("--tol", tol)->capture_default_str();
  fi->add_option("--csv", csv, "Write the trajectory as CSV ('-' for stdout)");

  auto* fv = sub(fl, "verify", "Compare flows with their closed forms",
                 [&] { run_flow_verify(out, fixture, k1_list, t, grid, tol); });
  fv->add_option("--fixture", fixture, "Fixture name or all");
  fv->add_option("--k1", k1_list, "Comma-separated k1 values");
  fv->add_option("-t,--time", t)->capture_default_str();
  fv->add_option("--grid", grid, "x,y pairs");
  fv->add_option("--tol", tol);

  auto* fm = sub(fl, "lemma", "Augmented flow against the transformed coefficients", [&] {
    run_flow_lemma(out, fixture, k1_list, t, a1, a0, samples, tol);
  });
  fm->add_option("--fixture", fixture, "Fixture name or all");
  fm->add_option("--k1", k1_list, "Comma-separated k1 values");
  fm->add_option("-t,--time", t)->capture_default_str();
  fm->add_option("--a1", a1, "Expression in x");
  fm->add_option("--a0", a0, "Expression in x");
  fm->add_option("--samples", samples, "Comma-separated starting x values");
  fm->add_option("--tol", tol);

  auto* pa = sub(&app, "parse", "Parse and reprint a file, checking the round trip",
                 [&] { run_parse(out, kind, file); });
  pa->add_option("--kind", kind, "expr, field, family, transform or table")->required();
  pa->add_option("file", file)->required();

  // Subcommand-specific defaults, applied before parsing overrides them.
  fixture = "all";
  k1_list = "0,1";
  grid = "0.5,1,1,-2,2,0.25";
  samples = "0.3,0.7";
  a1 = "";
  a0 = "";

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  int code = kPass;
  std::string error;
  try {
    // flow verify/lemma share --tol with the integrator; their default is looser.
    if ((out.command == "flow verify" || out.command == "flow lemma") &&
        fl->get_subcommand(out.command.substr(5))->count("--tol") == 0)
      tol = 1e-6;
    if ((out.command == "flow lemma") && a1.empty()) a1 = "x^2", a0 = "x/3 + 1";
    if (out.command == "flow lemma" && fm->count("-t") == 0) t = 0.3;
    if (out.command == "flow integrate" && fi->count("--order") == 0) order = 3;
    if (out.command == "invariants numeric" && in->count("--name") == 0) inv_name = "psi";
    action();
    code = out.passed ? kPass : kFail;
  } catch (const ClosureViolation& e) {
    error = e.what();
    code = kFail;
  } catch (const JacobiViolation& e) {
    error = e.what();
    code = kFail;
  } catch (const UnstableRank& e) {
    error = e.what();
    code = kFail;
  } catch (const FiniteTimeEscape& e) {
    error = e.what();
    code = kFail;
  } catch (const std::exception& e) {
    error = e.what();
    code = kUsage;
  }

  if (json) {
    ordered_json doc = {{"command", out.command}};
    doc["status"] = !error.empty() && code == kUsage ? "error" : (code == kPass ? "pass" : "fail");
    if (!error.empty()) doc["error"] = error;
    for (auto& [key, value] : out.json.items()) doc[key] = value;
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << out.text.str();
    if (!error.empty()) std::cerr << "error: " << error << "\n";
  }
  return code;
}
