#include "kdl/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "kdl/constants.hpp"
#include "kdl/discriminant.hpp"
#include "kdl/error.hpp"
#include "kdl/experiments.hpp"
#include "kdl/io.hpp"
#include "kdl/roots.hpp"

namespace kdl {

namespace fs = std::filesystem;

namespace {

constexpr double kPublishedDStar = 5.92947;
constexpr double kPublishedDStarTolerance = 5e-5;

struct Flags {
  std::string config;
  std::string dist;
  std::string n;
  int trials = 100;
  std::string seed = "0";
  std::uint64_t trial = 0;
  std::string omega = "log2";
  int quad_factor = 16;
  int workers = 1;
  std::string out;
  std::string format;
  bool force = false;
  std::string coeffs;
  std::string coeffs_file;
  double tol = 1e-12;
  int max_iter = 200;
  bool table = false;
  int table_n = 10000;
};

std::vector<int> parse_ladder(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(ErrorKind::Usage, "bad degree list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::Usage, "empty degree list");
  return out;
}

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-')
    throw Error(ErrorKind::Usage, "bad seed '" + text + "'");
  return v;
}

int default_workers() {
  if (const char* env = std::getenv("KDL_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
  }
  return 1;
}

struct Output {
  fs::path dir;
  bool force = false;
  std::vector<fs::path> written;

  bool active() const { return !dir.empty(); }
  void put(const std::string& name, const std::string& content) {
    write_atomic(dir / name, content, force);
    written.push_back(dir / name);
  }
  void manifest(const std::string& command, json resolved) {
    json m;
    m["schema"] = kSchemaVersion;
    m["subcommand"] = command;
    m["config"] = std::move(resolved);
    json files = json::array();
    for (const fs::path& p : written) files.push_back(p.filename().string());
    m["outputs"] = std::move(files);
    put(command + "_manifest.json", m.dump(2) + '\n');
  }
};

Output open_output(const std::string& dir, bool force) {
  Output o;
  o.force = force;
  if (dir.empty()) return o;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create output directory " + dir);
  o.dir = dir;
  return o;
}

Coefficients input_polynomial(const Flags& f, const CLI::App& sub) {
  const bool has_coeffs = sub.count("--coeffs") > 0;
  const bool has_file = sub.count("--coeffs-file") > 0;
  if (has_coeffs && has_file) throw Error(ErrorKind::Usage, "give --coeffs or --coeffs-file, not both");
  if (has_coeffs) return parse_coefficient_list(f.coeffs);
  if (has_file) {
    json j;
    try {
      j = json::parse(read_text(f.coeffs_file));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Usage, "cannot parse " + f.coeffs_file + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::Usage, e.what());
    }
    return coefficients_from_json(j);
  }
  if (sub.count("--n") == 0) throw Error(ErrorKind::Usage, "need --coeffs, --coeffs-file or --n (random sample)");
  const std::vector<int> n = parse_ladder(f.n);
  if (n.size() != 1) throw Error(ErrorKind::Usage, "--n takes a single degree here");
  const CoefficientDistribution dist = CoefficientDistribution::parse(f.dist.empty() ? "rademacher" : f.dist);
  return sample_kac(dist, n.front(), parse_seed(f.seed), f.trial);
}

json polynomial_echo(const Flags& f, const CLI::App& sub, const Coefficients& p) {
  json j;
  if (sub.count("--coeffs") || sub.count("--coeffs-file")) {
    j["coefficients"] = coefficients_to_json(p);
  } else {
    j["dist"] = f.dist.empty() ? "rademacher" : f.dist;
    j["n"] = p.degree();
    j["seed"] = parse_seed(f.seed);
    j["trial"] = f.trial;
  }
  return j;
}

ExperimentConfig resolve_config(const Flags& f, const CLI::App& sub, const std::string& default_dist) {
  ExperimentConfig c;
  c.dist = CoefficientDistribution::parse(default_dist);
  c.workers = default_workers();
  if (!f.config.empty()) {
    json j;
    try {
      j = json::parse(read_text(f.config));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Usage, "cannot parse config " + f.config + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::Usage, e.what());
    }
    c = config_from_json(j, c);
  }
  if (sub.count("--dist")) c.dist = CoefficientDistribution::parse(f.dist);
  if (sub.count("--n")) c.n_ladder = parse_ladder(f.n);
  if (sub.count("--trials")) c.trials = f.trials;
  if (sub.count("--seed")) c.master_seed = parse_seed(f.seed);
  if (sub.count("--omega")) c.omega = Omega::parse(f.omega);
  if (sub.count("--quad-factor")) c.quad_factor = f.quad_factor;
  if (sub.count("--workers")) c.workers = f.workers;
  if (c.n_ladder.empty()) throw Error(ErrorKind::Usage, "need --n (or n_ladder in --config)");
  c.validate();
  return c;
}

std::string rung_line(const ExperimentReport& r) {
  std::string s = r.experiment + ":";
  for (const RungSummary& g : r.rungs) {
    s += " n=" + std::to_string(g.n) + " mean=" + format_double(g.stats.mean) +
         " se=" + format_double(g.stats.std_error) + ";";
  }
  return s;
}

int run_constants(const Flags& f, std::ostream& out, std::ostream& err) {
  const ConstantTable& t = constant_table();
  const double gap = t.d_star - kPublishedDStar;
  const bool match = std::abs(gap) <= kPublishedDStarTolerance;
  json j;
  j["schema"] = kSchemaVersion;
  j["gamma"] = t.gamma;
  j["integral_phi"] = t.integral_phi;
  j["c_star"] = t.c_star;
  j["d_star"] = t.d_star;
  j["d_star_reference"] = kPublishedDStar;
  j["d_star_reference_tolerance"] = kPublishedDStarTolerance;
  j["d_star_matches_reference"] = match;
  j["exact_covariance_limit"] = t.exact_covariance_limit;
  j["quadrature"] = {{"tolerance", t.tolerance},
                     {"achieved_error", t.achieved_error},
                     {"series_split", t.series_split},
                     {"tail_start", t.tail_start},
                     {"evaluations", t.evaluations}};

  std::string table;
  if (f.table) {
    const double l = std::log(static_cast<double>(f.table_n));
    table = "t,phi,psi_limit,psi_n\n";
    for (double x : {0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) {
      const std::string psi_n = x <= l * l * l * l ? format_double(s_n_suite(f.table_n, x).psi_n) : "nan";
      table += format_double(x) + "," + format_double(phi(x)) + "," + format_double(psi_limit(x)) + "," + psi_n + "\n";
    }
  }

  if (f.format == "json") {
    out << j.dump(2) << '\n';
  } else {
    out << "gamma = " << format_double(t.gamma) << '\n'
        << "integral_phi = " << format_double(t.integral_phi) << '\n'
        << "c_star = " << format_double(t.c_star) << '\n'
        << "d_star = " << format_double(t.d_star) << "  (reference " << kPublishedDStar << " +/- "
        << kPublishedDStarTolerance << ": " << (match ? "match" : "MISMATCH by " + format_double(gap)) << ")\n"
        << "exact_covariance_limit = " << format_double(t.exact_covariance_limit) << '\n';
  }
  if (f.table) out << table;

  Output o = open_output(f.out, f.force);
  if (o.active()) {
    o.put("constants.json", j.dump(2) + '\n');
    if (f.table) o.put("constants_table.csv", table);
    o.manifest("constants", {{"table", f.table}, {"table_n", f.table_n}});
  }
  err << "constants: D* = " << format_double(t.d_star) << ", c* = " << format_double(t.c_star) << '\n';
  return kExitOk;
}

int run_sample(const Flags& f, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const Coefficients p = input_polynomial(f, sub);
  const std::string text = coefficients_to_json(p).dump() + '\n';
  Output o = open_output(f.out, f.force);
  if (o.active()) {
    o.put("sample.json", text);
    o.manifest("sample", polynomial_echo(f, sub, p));
  } else {
    out << text;
  }
  err << "sample: degree " << p.degree() << '\n';
  return kExitOk;
}

int run_roots(const Flags& f, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const Coefficients p = input_polynomial(f, sub);
  RootOptions opts;
  opts.tol = f.tol;
  opts.max_iter = f.max_iter;
  const RootSet rs = find_roots(p, opts);
  const std::string text = roots_to_jsonl(rs);
  Output o = open_output(f.out, f.force);
  if (o.active()) {
    o.put("roots.jsonl", text);
    json echo = polynomial_echo(f, sub, p);
    echo["tol"] = f.tol;
    echo["max_iter"] = f.max_iter;
    o.manifest("roots", echo);
  } else {
    out << text;
  }
  err << "roots: " << rs.roots.size() << " roots, max residual " << format_double(rs.max_residual())
      << (rs.used_fallback ? " (companion fallback)" : "") << '\n';
  return kExitOk;
}

int run_disc(const Flags& f, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const Coefficients p = input_polynomial(f, sub);
  const int n = p.degree();
  const RootSet rs = find_roots(p);
  const double total = log_abs_discriminant(p, rs);
  std::optional<DiscriminantBreakdown> b;
  std::string note;
  if (n < 2) {
    note = "degree 1: no split";
  } else if (circle_root_guard(rs)) {
    note = "root on the unit circle: no split";
  } else {
    b = decompose(p, rs, f.quad_factor * (n + 1));
  }
  std::optional<ExactInteger> exact;
  if (p.is_real() && n <= 64) {
    try {
      exact = exact_discriminant(p);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TypeError) throw;
    }
  }

  DiscriminantBreakdown row;
  if (b) {
    row = *b;
  } else {
    const double nan = std::nan("");
    row.n = n;
    row.sum_inside = row.sum_outside = row.mahler_term = row.log_n_term = nan;
    row.total_log_abs_disc = total;
    row.theorem_statistic = theorem_statistic(total, n);
  }
  std::string text;
  if (f.format == "json") {
    json j;
    j["schema"] = kSchemaVersion;
    j["n"] = n;
    j["total_log_abs_disc"] = total;
    j["theorem_statistic"] = row.theorem_statistic;
    if (b) {
      j["sum_inside"] = b->sum_inside;
      j["sum_outside"] = b->sum_outside;
      j["mahler_term"] = b->mahler_term;
      j["log_n_term"] = b->log_n_term;
    }
    if (exact) j["exact_discriminant"] = exact->decimal;
    text = j.dump(2) + '\n';
  } else {
    text = breakdown_csv_header() + '\n' + breakdown_csv_row(row) + '\n';
  }
  Output o = open_output(f.out, f.force);
  if (o.active()) {
    o.put(f.format == "json" ? "disc.json" : "disc.csv", text);
    json echo = polynomial_echo(f, sub, p);
    echo["quad_factor"] = f.quad_factor;
    o.manifest("disc", echo);
  } else {
    out << text;
  }
  err << "disc: total log|Delta| = " << format_double(total);
  if (exact) err << ", exact Delta = " << exact->decimal;
  if (!note.empty()) err << " (" << note << ")";
  err << '\n';
  return kExitOk;
}

int run_mahler_cmd(const Flags& f, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const Coefficients p = input_polynomial(f, sub);
  const RootSet rs = find_roots(p);
  const MahlerResult m = mahler(p, rs, f.quad_factor * (p.degree() + 1));
  std::string text;
  if (f.format == "json") {
    json j;
    j["schema"] = kSchemaVersion;
    j["log_M_quadrature"] = m.log_M_quadrature;
    j["log_M_roots"] = m.log_M_roots;
    j["points_used"] = m.points_used;
    j["nearest_root_distance_to_circle"] = m.nearest_root_distance_to_circle;
    text = j.dump(2) + '\n';
  } else {
    text = "log_M_quadrature,log_M_roots,points_used,nearest_root_distance_to_circle\n" +
           format_double(m.log_M_quadrature) + "," + format_double(m.log_M_roots) + "," +
           std::to_string(m.points_used) + "," + format_double(m.nearest_root_distance_to_circle) + "\n";
  }
  Output o = open_output(f.out, f.force);
  if (o.active()) {
    o.put(f.format == "json" ? "mahler.json" : "mahler.csv", text);
    json echo = polynomial_echo(f, sub, p);
    echo["quad_factor"] = f.quad_factor;
    o.manifest("mahler", echo);
  } else {
    out << text;
  }
  err << "mahler: log M = " << format_double(m.log_M_quadrature) << " (quadrature), "
      << format_double(m.log_M_roots) << " (roots)\n";
  return kExitOk;
}

int run_experiment(const std::string& name, const Flags& f, const CLI::App& sub, std::ostream& out,
                   std::ostream& err) {
  const std::string default_dist = name == "kacrice" ? "gaussian-complex" : "rademacher";
  const ExperimentConfig c = resolve_config(f, sub, default_dist);
  ExperimentReport r;
  if (name == "lln") r = run_lln(c);
  else if (name == "mahler") r = run_mahler(c);
  else if (name == "symmetry") r = run_symmetry(c);
  else if (name == "clustering") r = run_clustering(c);
  else if (name == "minmod") r = run_min_modulus(c);
  else r = run_kacrice_gaussian(c);
  const std::string format = f.format.empty() ? "csv" : f.format;
  const std::string dir = f.out.empty() ? "kdl-results" : f.out;
  Output o = open_output(dir, f.force);
  o.written = emit_report(r, o.dir, format, f.force);
  json echo = config_to_json(c);
  echo["format"] = format;
  o.manifest(r.experiment, echo);
  out << rung_line(r) << " wrote " << o.written.size() << " files to " << dir << '\n';
  (void)err;
  return kExitOk;
}

void add_output_flags(CLI::App* s, Flags& f, const std::string& formats) {
  s->add_option("--out", f.out, "output directory");
  s->add_option("--format", f.format, "output format")->check(CLI::IsMember(CLI::detail::split(formats, ',')));
  s->add_flag("--force", f.force, "overwrite existing outputs");
}

void add_polynomial_flags(CLI::App* s, Flags& f) {
  s->add_option("--coeffs", f.coeffs, "comma-separated coefficients c0,c1,...,cn");
  s->add_option("--coeffs-file", f.coeffs_file, "coefficient JSON file");
  s->add_option("--dist", f.dist, "coefficient law for a random sample");
  s->add_option("--n", f.n, "degree of a random sample");
  s->add_option("--seed", f.seed, "master seed");
  s->add_option("--trial", f.trial, "trial index");
}

void add_experiment_flags(CLI::App* s, Flags& f) {
  s->add_option("--config", f.config, "JSON config file (flags override it)");
  s->add_option("--dist", f.dist, "rademacher | gaussian-real | gaussian-complex | uniform-centered:K | uniform-raw:K");
  s->add_option("--n", f.n, "degree ladder, e.g. 200,400,800");
  s->add_option("--trials", f.trials, "trials per degree");
  s->add_option("--seed", f.seed, "master seed");
  s->add_option("--omega", f.omega, "annulus growth: log2 | log3 | constant");
  s->add_option("--quad-factor", f.quad_factor, "quadrature nodes per (n+1)");
  s->add_option("--workers", f.workers, "worker threads (default $KDL_WORKERS or 1)");
  add_output_flags(s, f, "csv,jsonl,json");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Discriminants, Mahler measures and root statistics of random Kac polynomials", "kdl"};
  app.require_subcommand(1);

  CLI::App* constants = app.add_subcommand("constants", "print gamma, int Phi, c*, D*");
  constants->add_flag("--table", f.table, "also print t, Phi, Psi, psi_n");
  constants->add_option("--table-n", f.table_n, "degree for the psi_n column");
  add_output_flags(constants, f, "text,json");

  CLI::App* sample = app.add_subcommand("sample", "draw one Kac polynomial");
  add_polynomial_flags(sample, f);
  add_output_flags(sample, f, "json");

  CLI::App* roots = app.add_subcommand("roots", "all complex roots with residuals (JSONL)");
  add_polynomial_flags(roots, f);
  roots->add_option("--tol", f.tol, "relative residual tolerance");
  roots->add_option("--max-iter", f.max_iter, "Aberth sweeps before the fallback");
  add_output_flags(roots, f, "jsonl");

  CLI::App* disc = app.add_subcommand("disc", "log|Delta| and its split");
  add_polynomial_flags(disc, f);
  disc->add_option("--quad-factor", f.quad_factor, "quadrature nodes per (n+1)");
  add_output_flags(disc, f, "csv,json");

  CLI::App* mahler_cmd = app.add_subcommand(
      "mahler", "normalized log Mahler measure over trials; with --coeffs(-file), both routes for one polynomial");
  add_experiment_flags(mahler_cmd, f);
  mahler_cmd->add_option("--coeffs", f.coeffs, "comma-separated coefficients c0,c1,...,cn");
  mahler_cmd->add_option("--coeffs-file", f.coeffs_file, "coefficient JSON file");

  struct Exp {
    const char* name;
    const char* key;
    const char* help;
  };
  const Exp experiments[] = {
      {"lln", "lln", "theorem statistic along an n ladder"},
      {"symmetry", "symmetry", "inside vs outside sums, KS test"},
      {"clustering", "clustering", "annulus fraction, sector bound, discrepancy"},
      {"minmod", "minmod", "scaled minimum modulus on the circle"},
      {"kacrice", "kacrice", "Gaussian root sum against the Kac-Rice quadrature"},
  };
  std::vector<std::pair<CLI::App*, std::string>> exp_cmds;
  for (const Exp& e : experiments) {
    CLI::App* s = app.add_subcommand(e.name, e.help);
    add_experiment_flags(s, f);
    exp_cmds.emplace_back(s, e.key);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (f.trials < 1 && !(*constants)) throw Error(ErrorKind::Usage, "--trials must be >= 1");
    if (*constants) return run_constants(f, out, err);
    if (*sample) return run_sample(f, *sample, out, err);
    if (*roots) return run_roots(f, *roots, out, err);
    if (*disc) return run_disc(f, *disc, out, err);
    if (*mahler_cmd) {
      if (mahler_cmd->count("--coeffs") || mahler_cmd->count("--coeffs-file"))
        return run_mahler_cmd(f, *mahler_cmd, out, err);
      return run_experiment("mahler", f, *mahler_cmd, out, err);
    }
    for (const auto& [s, key] : exp_cmds) {
      if (*s) return run_experiment(key, f, *s, out, err);
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::ExperimentIntegrity:
      case ErrorKind::NonConvergence:
      case ErrorKind::Accuracy:
        return kExitIntegrity;
      default:
        return kExitUsage;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  err << app.help();
  return kExitUsage;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace kdl
