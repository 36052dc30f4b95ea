#pragma once

// Experiment orchestration: configuration (flags or `key = value` files with
// [section] headers), the run dispatcher behind the command-line tool, and
// the CSV / summary / SVG report writers.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "dgfem/mesh_io.hpp"
#include "dgfem/study.hpp"

namespace dgfem {

struct ExperimentConfig {
  std::string command;  // solve, audit-mesh, degiorgi-study, verify-inequalities, quasilinear-study
  std::string problem = "checkerboard";
  double ratio = 5.0;
  int levels = 6;
  bool adaptive = false;
  double mark_fraction = 0.3;
  std::string mesh_path;
  std::string coefficient = "identity";
  std::string out_dir;
  std::uint64_t seed = 1;
  bool svg = false;
  int trials = 1000;
  std::string diagnostics = "all";  // comma-separated record names, or "all"
};

inline bool diagnostics_selected(const ExperimentConfig& cfg, const std::string& name) {
  if (cfg.diagnostics == "all" || cfg.diagnostics.empty()) return true;
  std::size_t pos = 0;
  while (pos < cfg.diagnostics.size()) {
    auto comma = cfg.diagnostics.find(',', pos);
    if (comma == std::string::npos) comma = cfg.diagnostics.size();
    if (cfg.diagnostics.substr(pos, comma - pos) == name) return true;
    pos = comma + 1;
  }
  return false;
}

// exit codes: 0 pass, 1 check failure, 2 configuration/parse error, 3 solver failure
enum ExitCode { exit_ok = 0, exit_check_failed = 1, exit_parse_error = 2, exit_solver_error = 3 };

// ---------------------------------------------------------------------------
// flat config files: `key = value` lines grouped under [section] headers

using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

inline ConfigSections parse_config_file(std::istream& in) {
  ConfigSections out;
  std::string section = "experiment";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string body = line.substr(first, last - first + 1);
    if (body.front() == '[') {
      if (body.back() != ']')
        fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": unterminated section header");
      section = body.substr(1, body.size() - 2);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": expected 'key = value'");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    out[section][trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  return out;
}

inline void apply_config(const ConfigSections& sections, ExperimentConfig& cfg) {
  auto it = sections.find("experiment");
  if (it == sections.end()) return;
  for (const auto& [key, value] : it->second) {
    if (key == "problem")
      cfg.problem = value;
    else if (key == "ratio") {
      if (!parse_double(value, cfg.ratio)) fail(ErrorKind::parse, "bad ratio: " + value);
    } else if (key == "levels")
      cfg.levels = std::stoi(value);
    else if (key == "adaptive")
      cfg.adaptive = value == "true" || value == "1";
    else if (key == "mark_fraction") {
      if (!parse_double(value, cfg.mark_fraction)) fail(ErrorKind::parse, "bad mark_fraction");
    } else if (key == "mesh")
      cfg.mesh_path = value;
    else if (key == "coefficient")
      cfg.coefficient = value;
    else if (key == "out")
      cfg.out_dir = value;
    else if (key == "seed")
      cfg.seed = std::stoull(value);
    else if (key == "svg")
      cfg.svg = value == "true" || value == "1";
    else if (key == "trials")
      cfg.trials = std::stoi(value);
    else if (key == "diagnostics")
      cfg.diagnostics = value;
    else
      fail(ErrorKind::parse, "unknown configuration key: " + key);
  }
}

// ---------------------------------------------------------------------------
// report writers

class ReportSink {
public:
  explicit ReportSink(const std::string& dir) : dir_(dir) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  std::string path(const std::string& name) const { return dir_ + "/" + name; }

  void write_text(const std::string& name, const std::string& content) const {
    if (!enabled()) return;
    std::ofstream out(path(name));
    out << content;
  }
  void write_records(const std::string& name, const std::vector<InequalityRecord>& records) const {
    if (!enabled()) return;
    std::ofstream out(path(name));
    out << csv_header() << '\n';
    for (const auto& r : records) out << to_csv_row(r) << '\n';
  }

private:
  std::string dir_;
};

// minimal static log-log chart: one polyline per series
struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

inline std::string svg_loglog(const std::vector<SvgSeries>& series, const std::string& title) {
  const int width = 640, height = 480, margin = 56;
  double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0.0 || s.y[i] <= 0.0) continue;
      lx0 = std::min(lx0, std::log10(s.x[i]));
      lx1 = std::max(lx1, std::log10(s.x[i]));
      ly0 = std::min(ly0, std::log10(s.y[i]));
      ly1 = std::max(ly1, std::log10(s.y[i]));
    }
  if (lx0 > lx1 || ly0 > ly1) {
    lx0 = ly0 = 0.0;
    lx1 = ly1 = 1.0;
  }
  if (lx1 - lx0 < 1e-12) lx1 = lx0 + 1.0;
  if (ly1 - ly0 < 1e-12) ly1 = ly0 + 1.0;
  auto px = [&](double x) {
    return margin + (std::log10(x) - lx0) / (lx1 - lx0) * (width - 2 * margin);
  };
  auto py = [&](double y) {
    return height - margin - (std::log10(y) - ly0) / (ly1 - ly0) * (height - 2 * margin);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  int ci = 0;
  for (const auto& s : series) {
    const char* color = colors[ci % 6];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0.0 || s.y[i] <= 0.0) continue;
      pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    }
    svg << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
    svg << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 16 * ci
        << "\" font-size=\"12\" fill=\"" << color << "\">" << s.label << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// run dispatch

namespace detail {

inline BenchmarkProblem select_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "checkerboard") return checkerboard(cfg.ratio);
  if (cfg.problem == "sign-changing-flux") return sign_changing_flux();
  if (cfg.problem == "manufactured") return manufactured_polynomial();
  fail(ErrorKind::parse, "unknown problem: " + cfg.problem);
}

template <int N>
inline std::string audit_text(const Triangulation<N>& mesh, const CoefficientField<N>& coef) {
  const auto conf = validate_conformity(mesh);
  const auto shape = shape_regularity(mesh);
  const auto nonobtuse = check_nonobtuse(mesh, coef);
  const auto acute = check_uniform_acute(mesh, coef);
  const auto nc = measure_neighborhood_constants(mesh);
  std::ostringstream os;
  os << "dim: " << N << "\n";
  os << "nodes: " << mesh.nodes.size() << "\n";
  os << "elements: " << mesh.elements.size() << "\n";
  os << "conforming: " << (conf.conforming() ? "yes" : "no") << "\n";
  os << "conformity_issues: " << conf.issues.size() << "\n";
  os << "shape_regularity: " << format_double(shape.gamma) << "\n";
  os << "nonobtuse: " << (nonobtuse.pass ? "yes" : "no") << "\n";
  os << "worst_coupling: " << format_double(nonobtuse.worst_coupling) << "\n";
  os << "acuteness_margin: " << format_double(acute.gamma) << "\n";
  os << "path_constant: " << format_double(acute.tau) << "\n";
  os << "path_length_max: " << acute.n_max << "\n";
  os << "overlap_constant_Q: " << format_double(nc.Q) << "\n";
  os << "inclusion_constant_kappa: " << format_double(nc.kappa) << "\n";
  return os.str();
}

}  // namespace detail

inline int run_solve(const ExperimentConfig& cfg, std::ostream& log) {
  const auto p = detail::select_problem(cfg);
  Triangulation<2> mesh;
  int cells = 0;
  if (!cfg.mesh_path.empty()) {
    auto variant = read_mesh(cfg.mesh_path);
    if (!std::holds_alternative<Triangulation<2>>(variant))
      fail(ErrorKind::unsupported_dimension, "solve expects a 2d mesh");
    mesh = std::get<Triangulation<2>>(std::move(variant));
    const auto conf = validate_conformity(mesh);
    if (!conf.conforming())
      fail(ErrorKind::invalid_data,
           "mesh file fails the conformity audit (" + std::to_string(conf.issues.size()) + " issues)");
  } else {
    cells = cells_for_level(p.box, cfg.levels);
    cells += (p.alignment - cells % p.alignment) % p.alignment;
    mesh = problem_mesh(p, cells);
  }
  const auto sys = assemble(mesh, p.coefficient, p.load);
  const auto u = solve_dirichlet(sys);

  std::ostringstream summary;
  summary << "problem: " << p.name << "\n";
  summary << "level: " << cfg.levels << "\n";
  summary << "cells_per_side: " << cells << "\n";
  summary << "nodes: " << mesh.nodes.size() << "\n";
  summary << "elements: " << mesh.elements.size() << "\n";
  summary << "solution_max: " << format_double(u.max_abs()) << "\n";
  if (p.exact_solution)
    summary << "l2_error: " << format_double(l2_error(u, p.exact_solution)) << "\n";
  log << summary.str();

  ReportSink sink(cfg.out_dir);
  if (sink.enabled()) {
    std::ofstream mesh_out(sink.path("mesh.txt"));
    write_mesh(mesh, mesh_out);
    std::ofstream fun_out(sink.path("solution.txt"));
    write_function(u.values, fun_out);
    std::ofstream mat_out(sink.path("stiffness.txt"));
    sys.matrix.write_triplets(mat_out);
    sink.write_text("summary.txt", summary.str());
  }
  return exit_ok;
}

inline int run_audit_mesh(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.mesh_path.empty()) fail(ErrorKind::parse, "audit-mesh requires --mesh");
  const auto variant = read_mesh(cfg.mesh_path);
  std::string text;
  bool conforming = false;
  if (std::holds_alternative<Triangulation<2>>(variant)) {
    const auto& mesh = std::get<Triangulation<2>>(variant);
    auto coef = CoefficientField<2>::identity();
    if (cfg.coefficient == "checkerboard")
      coef = checkerboard(cfg.ratio).coefficient;
    else if (cfg.coefficient != "identity")
      fail(ErrorKind::parse, "unknown coefficient: " + cfg.coefficient);
    text = detail::audit_text(mesh, coef);
    conforming = validate_conformity(mesh).conforming();
  } else {
    const auto& mesh = std::get<Triangulation<3>>(variant);
    if (cfg.coefficient != "identity") fail(ErrorKind::parse, "3d audits support the identity coefficient");
    text = detail::audit_text(mesh, CoefficientField<3>::identity());
    conforming = validate_conformity(mesh).conforming();
  }
  log << text;
  ReportSink sink(cfg.out_dir);
  sink.write_text("audit.txt", text);
  return conforming ? exit_ok : exit_check_failed;
}

inline int run_degiorgi_study(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.problem != "checkerboard") fail(ErrorKind::parse, "the study driver expects the checkerboard problem");
  const int level_lo = 4;
  const int level_hi = level_lo + std::max(1, cfg.levels) - 1;
  const auto fam = checkerboard_family_study(cfg.ratio, level_lo, std::min(level_hi, 8), cfg.adaptive,
                                             cfg.mark_fraction);

  bool hard_pass = true;
  for (const auto& r : fam.records) hard_pass &= !r.violation;
  const bool cacc_ok = uniformity_envelope(per_level(fam, [](const FamilyLevel& l) {
                                             return l.caccioppoli.ratio;
                                           }),
                                           3);
  const bool semi_ok = seminorm_growth_ok(fam);

  std::ostringstream summary;
  summary << "problem: checkerboard\n";
  summary << "ratio: " << format_double(cfg.ratio) << "\n";
  summary << "family: " << fam.family << "\n";
  summary << "fitted_alpha: " << format_double(fam.alpha_hat) << "\n";
  for (const auto& lvl : fam.levels) {
    summary << "level " << lvl.level << ": elements=" << lvl.elements
            << " gamma=" << format_double(lvl.gamma) << " alpha=" << format_double(lvl.alpha)
            << " seminorm=" << format_double(lvl.seminorm)
            << " theta=" << format_double(lvl.theta_median)
            << " caccioppoli=" << format_double(lvl.caccioppoli.ratio) << "\n";
  }
  summary << "hard_checks: " << (hard_pass ? "pass" : "fail") << "\n";
  summary << "caccioppoli_envelope: " << (cacc_ok ? "pass" : "fail") << "\n";
  summary << "seminorm_envelope: " << (semi_ok ? "pass" : "fail") << "\n";
  summary << "note: the energy-ratio right-hand side uses the squared cutoff-gradient norm\n";
  log << summary.str();

  ReportSink sink(cfg.out_dir);
  std::vector<InequalityRecord> selected;
  for (const auto& r : fam.records)
    if (diagnostics_selected(cfg, r.name)) selected.push_back(r);
  sink.write_records("records.csv", selected);
  sink.write_text("summary.txt", summary.str());
  if (cfg.svg && sink.enabled()) {
    std::vector<SvgSeries> series;
    for (const auto& lvl : fam.levels) {
      if (lvl.osc.radii.empty()) continue;
      series.push_back({"level " + std::to_string(lvl.level), lvl.osc.radii, lvl.osc.osc_ball});
    }
    sink.write_text("oscillation.svg", svg_loglog(series, "oscillation decay"));
  }
  return hard_pass && cacc_ok && semi_ok ? exit_ok : exit_check_failed;
}

inline int run_verify_inequalities(const ExperimentConfig& cfg, std::ostream& log) {
  const auto battery = run_lemma_battery(cfg.seed, cfg.trials);
  std::vector<InequalityRecord> records;
  auto add = [&](const std::string& name, int violations) {
    InequalityRecord r;
    r.name = name;
    r.lhs = violations;
    r.rhs = 0.0;
    r.violation = violations > 0;
    r.param_json = "{\"trials\":" + std::to_string(battery.trials) + "}";
    records.push_back(r);
    log << name << ": " << violations << " violations in " << battery.trials << " trials\n";
  };
  add("jensen", battery.jensen_violations);
  add("weak_type", battery.weak_type_violations);
  add("shift_identity", battery.shift_identity_violations);
  add("prod_rearrange", battery.prod_rearrange_violations);
  add("fast_geometric", battery.fast_geometric_violations);
  add("telescoping", battery.telescoping_violations);
  log << "prod_rearrange_envelope: " << format_double(battery.prod_rearrange_envelope) << "\n";

  ReportSink sink(cfg.out_dir);
  sink.write_records("records.csv", records);
  return battery.pass() ? exit_ok : exit_check_failed;
}

inline int run_quasilinear_study(const ExperimentConfig& cfg, std::ostream& log) {
  // the envelope is asymptotic: the ladder starts where the discrete
  // Lipschitz constant has settled (see the quasilinear study protocol)
  const int level_lo = 5;
  const int level_hi = level_lo + std::max(1, std::min(cfg.levels, 4)) - 1;
  const auto study = quasilinear_study(level_lo, level_hi, cfg.seed);

  bool growth_ok = true;
  for (std::size_t i = 0; i + 1 < study.seminorms.size(); ++i)
    growth_ok &= study.seminorms[i + 1] <= 1.05 * study.seminorms[i] + 1e-300;
  const bool pass = study.converged && study.truncation_audit_failures == 0 &&
                    study.alpha_hat > 0.0 && growth_ok;

  std::ostringstream summary;
  summary << "fitted_alpha: " << format_double(study.alpha_hat) << "\n";
  for (std::size_t i = 0; i < study.levels.size(); ++i)
    summary << "level " << study.levels[i] << ": iterations=" << study.iterations[i]
            << " alpha=" << format_double(study.alphas[i])
            << " seminorm=" << format_double(study.seminorms[i]) << "\n";
  summary << "truncation_audit_failures: " << study.truncation_audit_failures << "\n";
  summary << "seminorm_envelope: " << (growth_ok ? "pass" : "fail") << "\n";
  log << summary.str();

  ReportSink sink(cfg.out_dir);
  sink.write_text("summary.txt", summary.str());
  return pass ? exit_ok : exit_check_failed;
}

inline int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    if (cfg.command == "solve") return run_solve(cfg, log);
    if (cfg.command == "audit-mesh") return run_audit_mesh(cfg, log);
    if (cfg.command == "degiorgi-study") return run_degiorgi_study(cfg, log);
    if (cfg.command == "verify-inequalities") return run_verify_inequalities(cfg, log);
    if (cfg.command == "quasilinear-study") return run_quasilinear_study(cfg, log);
    fail(ErrorKind::parse, "unknown command: " + cfg.command);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::parse:
      case ErrorKind::unsupported_dimension:
        return exit_parse_error;
      case ErrorKind::solver_failure:
      case ErrorKind::fixed_point_failure:
        return exit_solver_error;
      default:
        return exit_check_failed;
    }
  }
}

}  // namespace dgfem
