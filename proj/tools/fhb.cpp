#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhb/bound_engine.hpp"
#include "fhb/empirical.hpp"

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string geometry = "1d";
  std::string formula = "strang";
  std::string mode = "auto";
  std::string s = "auto";
  std::string grouping = "expanded";
  std::string placement = "box";
  double v = -1.0;
  double u = 1.0;
  double probe_t = 1.0;
  std::string t_grid;
  std::vector<int> extents;
  std::string output;
  std::string format = "text";
  std::string spec;
  int workers = 0;
};

fhb::Placement parse_placement(const std::string& s) {
  if (s == "folded") return fhb::Placement::folded;
  if (s == "centered") return fhb::Placement::centered;
  if (s == "overlap") return fhb::Placement::overlap;
  return fhb::Placement::box;
}

fhb::ProductFormula resolve_formula(const RunConfig& cfg, const fhb::LatticeModel& model) {
  try {
    return fhb::formula_by_name(cfg.formula, model.decomposition.size());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// "auto" picks the sharpened second-order bound for Strang and the general bound otherwise.
fhb::BoundOptions bound_options(const RunConfig& cfg, const fhb::ProductFormula& f) {
  fhb::BoundOptions o;
  const bool prop10 = cfg.mode == "prop10" || (cfg.mode == "auto" && f.name == "strang" && f.order == 2);
  if (cfg.mode == "prop10" && (f.name != "strang" || f.order != 2)) {
    throw UsageError("--mode prop10 requires --formula strang");
  }
  o.mode = prop10 ? fhb::BoundMode::prop10 : fhb::BoundMode::theorem1;
  o.grouping = cfg.grouping == "grouped" ? fhb::NormGrouping::grouped : fhb::NormGrouping::expanded;
  o.norm.placement = parse_placement(cfg.placement);
  o.workers = cfg.workers;
  if (cfg.s != "auto" && cfg.s != "scan") {
    try {
      std::size_t used = 0;
      o.s = std::stoi(cfg.s, &used);
      if (used != cfg.s.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError("--s must be an integer, auto or scan");
    }
    if (o.s < 1 || o.s > f.size()) {
      throw UsageError("--s must lie in 1.." + std::to_string(f.size()) + " for this formula");
    }
    if (prop10) throw UsageError("--s applies to theorem1 mode only");
  }
  return o;
}

fhb::BoundPolynomial compute_bound(const RunConfig& cfg, const fhb::LatticeModel& model, const fhb::ProductFormula& f,
                                   std::ostream& log) {
  fhb::BoundOptions o = bound_options(cfg, f);
  if (cfg.s != "scan") return fhb::evaluate_bound(model, f, o);
  if (o.mode != fhb::BoundMode::theorem1) throw UsageError("--s scan applies to theorem1 mode only");
  fhb::SplitScan scan = fhb::scan_split(model, f, o, cfg.probe_t, cfg.v, cfg.u);
  for (const auto& [s, value] : scan.values) log << "s=" << s << "\tbound=" << value << "\n";
  log << "best s=" << scan.best_s << "\n";
  return std::move(scan.best);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) return fhb::default_t_grid();
  auto number = [](const std::string& s) {
    try {
      std::size_t used = 0;
      const double x = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return x;
    } catch (const std::exception&) {
      throw UsageError("bad number '" + s + "' in --t-grid");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw UsageError("--t-grid range form is lo:hi:n");
    try {
      return fhb::log_grid(number(parts[0]), number(parts[1]), static_cast<int>(number(parts[2])));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  std::vector<double> grid;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    const double t = number(p);
    if (t < 0.0) throw UsageError("--t-grid times must be nonnegative");
    grid.push_back(t);
  }
  if (grid.empty()) throw UsageError("--t-grid is empty");
  return grid;
}

int cmd_bound(const RunConfig& cfg) {
  const fhb::LatticeModel model = fhb::build_model(cfg.geometry);
  const fhb::ProductFormula f = resolve_formula(cfg, model);
  const fhb::BoundPolynomial bp = compute_bound(cfg, model, f, std::cerr);
  std::cout << fhb::format_polynomial(bp) << "\n";
  if (cfg.output.empty()) {
    std::cout << "\n" << (cfg.format == "csv" ? fhb::to_csv(bp) + "\n" + fhb::terms_to_csv(bp) : fhb::to_text(bp));
  } else if (cfg.format == "csv") {
    write_file(cfg.output, fhb::to_csv(bp));
    write_file(cfg.output + ".terms.csv", fhb::terms_to_csv(bp));
  } else {
    write_file(cfg.output, fhb::to_text(bp));
  }
  return 0;
}

int cmd_empirical(const RunConfig& cfg) {
  const fhb::LatticeModel model = fhb::build_model(cfg.geometry);
  const fhb::ProductFormula f = resolve_formula(cfg, model);
  std::vector<int> extents = cfg.extents;
  if (extents.empty()) extents.assign(model.geometry.dim, 4);
  const std::vector<double> grid = parse_grid(cfg.t_grid);
  const fhb::BoundPolynomial bp = compute_bound(cfg, model, f, std::cerr);
  const fhb::EmpiricalRun run = fhb::splitting_error(model, f, extents, cfg.v, cfg.u, grid, &bp, cfg.workers);
  if (cfg.output.empty()) {
    std::cout << fhb::to_csv(run);
  } else {
    write_file(cfg.output, fhb::to_csv(run));
  }
  return 0;
}

int cmd_commutator(const RunConfig& cfg) {
  const fhb::LatticeModel model = fhb::build_model(cfg.geometry);
  fhb::CommutatorEvaluator ev(model);
  fhb::CommutatorValue value;
  try {
    value = fhb::evaluate_commutator(cfg.spec, ev);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  fhb::NormOptions opts;
  opts.placement = parse_placement(cfg.placement);
  std::ostringstream os;
  os << cfg.spec << " per unit cell:\n";
  if (value.op.is_zero()) {
    os << "Zero\nnorm per site: 0 (exact)\n";
    if (cfg.output.empty()) {
      std::cout << os.str();
    } else {
      write_file(cfg.output, os.str());
    }
    return 0;
  }
  os << value.op.local.to_string() << "\n";
  const fhb::NormResult n = fhb::per_site_norm(value.op, model.geometry, opts);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", n.value);
  os << "norm per site: " << buf;
  if (value.degree.v > 0) os << " |v|" << (value.degree.v > 1 ? "^" + std::to_string(value.degree.v) : "");
  if (value.degree.u > 0) os << " |u|" << (value.degree.u > 1 ? "^" + std::to_string(value.degree.u) : "");
  os << (n.exact ? " (exact)" : " (upper bound)") << "\n";
  if (cfg.output.empty()) {
    std::cout << os.str();
  } else {
    write_file(cfg.output, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Commutator bounds for Trotter errors of the Fermi-Hubbard model"};
  app.require_subcommand(1);
  RunConfig cfg;

  const std::vector<std::string> geometries{"1d", "square", "triangular"};
  auto common = [&](CLI::App* sub) {
    sub->add_option("--geometry", cfg.geometry, "1d, square or triangular")
        ->check(CLI::IsMember(geometries))
        ->capture_default_str();
    sub->add_option("--placement", cfg.placement, "telescoping placement of translated summands")
        ->check(CLI::IsMember({"folded", "centered", "overlap", "box"}))
        ->capture_default_str();
    sub->add_option("--output", cfg.output, "write results to this file instead of stdout");
  };
  auto bound_flags = [&](CLI::App* sub) {
    sub->add_option("--formula", cfg.formula, "strang, suzuki4, suzuki6 or custom:<path>")->capture_default_str();
    sub->add_option("--mode", cfg.mode, "theorem1, prop10, or auto (prop10 for Strang)")
        ->check(CLI::IsMember({"auto", "theorem1", "prop10"}))
        ->capture_default_str();
    sub->add_option("--s", cfg.s, "split index: integer, auto (ceil(K/2)) or scan")->capture_default_str();
    sub->add_option("--grouping", cfg.grouping, "expanded or grouped norms")
        ->check(CLI::IsMember({"expanded", "grouped"}))
        ->capture_default_str();
    sub->add_option("--v", cfg.v, "hopping coefficient")->capture_default_str();
    sub->add_option("--u", cfg.u, "interaction coefficient")->capture_default_str();
    sub->add_option("--workers", cfg.workers, "worker threads (0: FHB_WORKERS or all cores)")->capture_default_str();
  };

  CLI::App* bound = app.add_subcommand("bound", "compute the per-site error bound polynomial");
  common(bound);
  bound_flags(bound);
  bound->add_option("--format", cfg.format, "text or csv")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
  bound->add_option("--probe-t", cfg.probe_t, "time at which --s scan compares split indices")->capture_default_str();

  CLI::App* empirical = app.add_subcommand("empirical", "exact splitting error on a small torus");
  common(empirical);
  bound_flags(empirical);
  empirical->add_option("--t-grid", cfg.t_grid, "lo:hi:n (log-spaced) or a comma-separated list");
  empirical->add_option("--extents", cfg.extents, "torus extents (default 4 per axis)");
  empirical->add_option("--format", cfg.format, "csv")->check(CLI::IsMember({"csv"}));

  CLI::App* commutator = app.add_subcommand("commutator", "print a nested commutator of decomposition terms");
  common(commutator);
  commutator->add_option("spec", cfg.spec, "expression such as [H1,[H2,H1]]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*bound) return cmd_bound(cfg);
    if (*empirical) return cmd_empirical(cfg);
    return cmd_commutator(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
