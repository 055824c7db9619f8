#include "kdl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

#include "kdl/error.hpp"

namespace kdl {

namespace fs = std::filesystem;

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

double to_double(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

json breakdown_to_json(const DiscriminantBreakdown& b) {
  json j;
  j["n"] = b.n;
  j["sum_inside"] = number(b.sum_inside);
  j["sum_outside"] = number(b.sum_outside);
  j["mahler_term"] = number(b.mahler_term);
  j["log_n_term"] = number(b.log_n_term);
  j["total"] = number(b.total_log_abs_disc);
  j["theorem_statistic"] = number(b.theorem_statistic);
  return j;
}

DiscriminantBreakdown breakdown_from_json(const json& j) {
  DiscriminantBreakdown b;
  b.n = j.at("n").get<int>();
  b.sum_inside = to_double(j.at("sum_inside"));
  b.sum_outside = to_double(j.at("sum_outside"));
  b.mahler_term = to_double(j.at("mahler_term"));
  b.log_n_term = to_double(j.at("log_n_term"));
  b.total_log_abs_disc = to_double(j.at("total"));
  b.theorem_statistic = to_double(j.at("theorem_statistic"));
  return b;
}

json metrics_to_json(const Metrics& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = number(v);
  return j;
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  for (auto it = j.begin(); it != j.end(); ++it) m.emplace_back(it.key(), to_double(it.value()));
  return m;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorKind::InvalidArgument, "not a number: '" + text + "'");
  return v;
}

json coefficients_to_json(const Coefficients& p) {
  json j;
  j["degree"] = p.degree();
  json coeffs = json::array();
  for (const cplx& c : p.values()) {
    if (p.is_real()) coeffs.push_back(c.real());
    else coeffs.push_back(json::array({c.real(), c.imag()}));
  }
  j["coeffs"] = std::move(coeffs);
  return j;
}

Coefficients coefficients_from_json(const json& j) {
  if (!j.is_object() || !j.contains("coeffs") || !j.at("coeffs").is_array())
    throw Error(ErrorKind::InvalidArgument, "coefficient JSON needs a \"coeffs\" array");
  std::vector<cplx> c;
  bool real = true;
  for (const json& e : j.at("coeffs")) {
    if (e.is_number()) {
      c.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      c.emplace_back(e[0].get<double>(), e[1].get<double>());
      real = false;
    } else {
      throw Error(ErrorKind::InvalidArgument, "coefficient entries must be numbers or [re, im] pairs");
    }
  }
  if (j.contains("degree") && j.at("degree").get<long long>() + 1 != static_cast<long long>(c.size()))
    throw Error(ErrorKind::InvalidArgument, "\"degree\" does not match the number of coefficients");
  if (real) {
    std::vector<double> r;
    for (const cplx& x : c) r.push_back(x.real());
    return Coefficients::real(std::move(r));
  }
  return Coefficients::complex(std::move(c));
}

Coefficients parse_coefficient_list(const std::string& text) {
  std::vector<double> c;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw Error(ErrorKind::InvalidArgument, "empty coefficient in '" + text + "'");
    c.push_back(parse_double(item.substr(b, e - b + 1)));
  }
  return Coefficients::real(std::move(c));
}

std::string roots_to_jsonl(const RootSet& rs) {
  std::string out;
  for (std::size_t i = 0; i < rs.roots.size(); ++i) {
    json j;
    j["re"] = rs.roots[i].real();
    j["im"] = rs.roots[i].imag();
    j["residual"] = rs.residuals[i];
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string breakdown_csv_header() {
  return "n,sum_inside,sum_outside,mahler_term,log_n_term,total,theorem_statistic";
}

std::string breakdown_csv_row(const DiscriminantBreakdown& b) {
  return join({std::to_string(b.n), format_double(b.sum_inside), format_double(b.sum_outside),
               format_double(b.mahler_term), format_double(b.log_n_term), format_double(b.total_log_abs_disc),
               format_double(b.theorem_statistic)});
}

std::vector<std::string> summary_csv_columns() {
  return {"count", "mean", "std", "stderr", "min", "q25", "q50", "q75", "max"};
}

std::string summary_csv_row(const SummaryStats& s) {
  return join({std::to_string(s.count), format_double(s.mean), format_double(s.stddev), format_double(s.std_error),
               format_double(s.min), format_double(s.q25), format_double(s.q50), format_double(s.q75),
               format_double(s.max)});
}

json summary_to_json(const SummaryStats& s) {
  json j;
  j["count"] = s.count;
  j["mean"] = number(s.mean);
  j["std"] = number(s.stddev);
  j["stderr"] = number(s.std_error);
  j["min"] = number(s.min);
  j["q05"] = number(s.q05);
  j["q25"] = number(s.q25);
  j["q50"] = number(s.q50);
  j["q75"] = number(s.q75);
  j["q95"] = number(s.q95);
  j["max"] = number(s.max);
  return j;
}

SummaryStats summary_from_json(const json& j) {
  SummaryStats s;
  s.count = j.at("count").get<int>();
  s.mean = to_double(j.at("mean"));
  s.stddev = to_double(j.at("std"));
  s.std_error = to_double(j.at("stderr"));
  s.min = to_double(j.at("min"));
  s.q05 = to_double(j.at("q05"));
  s.q25 = to_double(j.at("q25"));
  s.q50 = to_double(j.at("q50"));
  s.q75 = to_double(j.at("q75"));
  s.q95 = to_double(j.at("q95"));
  s.max = to_double(j.at("max"));
  return s;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["dist"] = c.dist.name();
  j["n_ladder"] = c.n_ladder;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["omega"] = c.omega.name();
  j["quad_factor"] = c.quad_factor;
  j["workers"] = c.workers;
  return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
  static const char* const known[] = {"dist", "n_ladder", "trials", "master_seed", "omega", "quad_factor", "workers"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw Error(ErrorKind::InvalidArgument, "unknown config key '" + it.key() + "'");
  }
  try {
    if (j.contains("dist")) base.dist = CoefficientDistribution::parse(j.at("dist").get<std::string>());
    if (j.contains("n_ladder")) base.n_ladder = j.at("n_ladder").get<std::vector<int>>();
    if (j.contains("trials")) base.trials = j.at("trials").get<int>();
    if (j.contains("master_seed")) base.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("omega")) {
      const json& o = j.at("omega");
      base.omega = o.is_number() ? Omega::parse(format_double(o.get<double>())) : Omega::parse(o.get<std::string>());
    }
    if (j.contains("quad_factor")) base.quad_factor = j.at("quad_factor").get<int>();
    if (j.contains("workers")) base.workers = j.at("workers").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad config value: ") + e.what());
  }
  return base;
}

json report_to_json(const ExperimentReport& r) {
  json j;
  j["schema"] = kSchemaVersion;
  j["experiment"] = r.experiment;
  j["statistic"] = r.statistic;
  j["config"] = config_to_json(r.config);
  j["references"] = metrics_to_json(r.references);
  json rungs = json::array();
  for (const RungSummary& s : r.rungs) {
    json g;
    g["double_roots"] = s.guards.double_roots;
    g["circle_roots"] = s.guards.circle_roots;
    g["nonconvergences"] = s.guards.nonconvergences;
    g["resamples"] = s.guards.resamples;
    json e;
    e["n"] = s.n;
    e["summary"] = summary_to_json(s.stats);
    e["guards"] = std::move(g);
    e["metrics"] = metrics_to_json(s.metrics);
    rungs.push_back(std::move(e));
  }
  j["rungs"] = std::move(rungs);
  j["record_columns"] = r.record_columns;
  json records = json::array();
  for (const TrialRecord& t : r.records) {
    json e;
    e["n"] = t.n;
    e["trial"] = t.trial;
    e["attempt"] = t.attempt;
    e["status"] = t.status;
    e["statistic"] = number(t.statistic);
    json v = json::array();
    for (double x : t.values) v.push_back(number(x));
    e["values"] = std::move(v);
    if (t.breakdown) e["breakdown"] = breakdown_to_json(*t.breakdown);
    records.push_back(std::move(e));
  }
  j["records"] = std::move(records);
  return j;
}

ExperimentReport report_from_json(const json& j) {
  if (j.value("schema", 0) != kSchemaVersion) throw Error(ErrorKind::InvalidArgument, "unsupported report schema");
  ExperimentReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.statistic = j.at("statistic").get<std::string>();
  r.config = config_from_json(j.at("config"));
  r.references = metrics_from_json(j.at("references"));
  for (const json& e : j.at("rungs")) {
    RungSummary s;
    s.n = e.at("n").get<int>();
    s.stats = summary_from_json(e.at("summary"));
    const json& g = e.at("guards");
    s.guards.double_roots = g.at("double_roots").get<int>();
    s.guards.circle_roots = g.at("circle_roots").get<int>();
    s.guards.nonconvergences = g.at("nonconvergences").get<int>();
    s.guards.resamples = g.at("resamples").get<int>();
    s.metrics = metrics_from_json(e.at("metrics"));
    r.rungs.push_back(std::move(s));
  }
  r.record_columns = j.at("record_columns").get<std::vector<std::string>>();
  for (const json& e : j.at("records")) {
    TrialRecord t;
    t.n = e.at("n").get<int>();
    t.trial = e.at("trial").get<int>();
    t.attempt = e.at("attempt").get<int>();
    t.status = e.at("status").get<std::string>();
    t.statistic = to_double(e.at("statistic"));
    for (const json& x : e.at("values")) t.values.push_back(to_double(x));
    if (e.contains("breakdown")) t.breakdown = breakdown_from_json(e.at("breakdown"));
    r.records.push_back(std::move(t));
  }
  return r;
}

std::string records_csv(const ExperimentReport& r) {
  std::vector<std::string> head{"n", "trial", "attempt", "status", "statistic"};
  head.insert(head.end(), r.record_columns.begin(), r.record_columns.end());
  std::string out = join(head) + '\n';
  for (const TrialRecord& t : r.records) {
    std::vector<std::string> row{std::to_string(t.n), std::to_string(t.trial), std::to_string(t.attempt), t.status,
                                 format_double(t.statistic)};
    for (double x : t.values) row.push_back(format_double(x));
    out += join(row) + '\n';
  }
  return out;
}

std::string records_jsonl(const ExperimentReport& r) {
  std::string out;
  for (const TrialRecord& t : r.records) {
    json e;
    e["n"] = t.n;
    e["trial"] = t.trial;
    e["attempt"] = t.attempt;
    e["status"] = t.status;
    e["statistic"] = number(t.statistic);
    for (std::size_t i = 0; i < t.values.size() && i < r.record_columns.size(); ++i)
      e[r.record_columns[i]] = number(t.values[i]);
    out += e.dump() + '\n';
  }
  return out;
}

std::string rungs_csv(const ExperimentReport& r) {
  std::vector<std::string> head{"n"};
  for (const std::string& c : summary_csv_columns()) head.push_back(c);
  for (const char* g : {"double_roots", "circle_roots", "nonconvergences", "resamples"}) head.emplace_back(g);
  if (!r.rungs.empty()) {
    for (const auto& [k, v] : r.rungs.front().metrics) head.push_back(k);
  }
  std::string out = join(head) + '\n';
  for (const RungSummary& s : r.rungs) {
    std::vector<std::string> row{std::to_string(s.n), summary_csv_row(s.stats), std::to_string(s.guards.double_roots),
                                 std::to_string(s.guards.circle_roots), std::to_string(s.guards.nonconvergences),
                                 std::to_string(s.guards.resamples)};
    for (const auto& [k, v] : s.metrics) row.push_back(format_double(v));
    out += join(row) + '\n';
  }
  return out;
}

void write_atomic(const fs::path& path, const std::string& content, bool force) {
  std::error_code ec;
  if (fs::exists(path, ec) && !force)
    throw Error(ErrorKind::Io, "refusing to overwrite " + path.string() + " (use --force)");
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorKind::Io, "write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move output into place at " + path.string());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> emit_report(const ExperimentReport& r, const fs::path& dir, const std::string& format,
                                  bool force) {
  std::vector<fs::path> written;
  const auto put = [&](const std::string& name, const std::string& content) {
    const fs::path p = dir / name;
    write_atomic(p, content, force);
    written.push_back(p);
  };
  if (format == "csv") {
    put(r.experiment + "_records.csv", records_csv(r));
    put(r.experiment + "_summary.csv", rungs_csv(r));
  } else if (format == "jsonl") {
    put(r.experiment + "_records.jsonl", records_jsonl(r));
  } else if (format != "json") {
    throw Error(ErrorKind::Usage, "unknown format '" + format + "'");
  }
  put(r.experiment + ".json", report_to_json(r).dump(2) + '\n');
  return written;
}

}  // namespace kdl
