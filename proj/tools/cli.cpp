#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "magtunnel/magtunnel.hpp"

#ifndef MAGTUNNEL_VERSION
#define MAGTUNNEL_VERSION "dev"
#endif

namespace magtunnel::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;
using Columns = std::vector<std::string>;

class Row {
 public:
  explicit Row(const Columns& columns) : columns_(&columns), cells_(columns.size()) {}

  template <class T>
  Row& set(std::string_view name, const T& value) {
    const auto it = std::find(columns_->begin(), columns_->end(), name);
    if (it == columns_->end()) throw std::logic_error("unknown output column " + std::string(name));
    auto& cell = cells_[static_cast<std::size_t>(it - columns_->begin())];
    if constexpr (std::is_same_v<T, bool>) cell = value;
    else if constexpr (std::is_floating_point_v<T>) cell = static_cast<double>(value);
    else if constexpr (std::is_integral_v<T>) cell = static_cast<long long>(value);
    else cell = std::string(value);
    return *this;
  }

  std::vector<Cell> take() { return std::move(cells_); }

 private:
  const Columns* columns_;
  std::vector<Cell> cells_;
};

struct Outcome {
  std::vector<Cell> cells;
  int code = kOk;
};

/// Runs `fill` and turns library errors into a status/message pair.
template <class F>
Outcome evaluate(const Columns& columns, F&& fill) {
  Row row(columns);
  int code = kOk;
  auto fail = [&](int c, const char* status, const std::exception& e) {
    code = c;
    row.set("status", status).set("message", e.what());
  };
  try {
    fill(row);
    row.set("status", "ok");
  } catch (const DomainError& e) {
    fail(kRegime, "domain_error", e);
  } catch (const RegimeError& e) {
    fail(kRegime, "regime_error", e);
  } catch (const NoCrossingError& e) {
    fail(kRegime, "no_crossing", e);
  } catch (const Error& e) {
    fail(kNumerical, "numerical_error", e);
  }
  return {row.take(), code};
}

// ---------------------------------------------------------------- output

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_cell(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return csv_escape(v); }
  } visitor;
  return std::visit(visitor, c);
}

nlohmann::ordered_json json_cell(const Cell& c) {
  struct {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return format_number(v);
      return v;
    }
    nlohmann::ordered_json operator()(long long v) const { return v; }
    nlohmann::ordered_json operator()(bool v) const { return v; }
    nlohmann::ordered_json operator()(const std::string& v) const { return v; }
  } visitor;
  return std::visit(visitor, c);
}

struct OutputOptions {
  std::string format = "csv";
  bool json_lines = false;
  std::string path;
  int jobs = 0;
};

void write_table(const std::string& command, const Columns& columns, const std::vector<Outcome>& rows,
                 const OutputOptions& opts, std::ostream& os) {
  if (opts.format == "json") {
    auto object = [&](const Outcome& r) {
      nlohmann::ordered_json o;
      for (std::size_t i = 0; i < columns.size(); ++i) o[columns[i]] = json_cell(r.cells[i]);
      return o;
    };
    if (opts.json_lines) {
      for (const auto& r : rows) os << object(r).dump() << '\n';
    } else if (rows.size() == 1) {
      os << object(rows.front()).dump(2) << '\n';
    } else {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : rows) arr.push_back(object(r));
      os << arr.dump(2) << '\n';
    }
    return;
  }
  os << "# magtunnel " << MAGTUNNEL_VERSION << '\n';
  os << "# command: " << command << '\n';
  os << "# columns: see docs/schema.md\n";
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.cells.size(); ++i) os << (i ? "," : "") << csv_cell(r.cells[i]);
    os << '\n';
  }
}

int exit_code(const std::vector<Outcome>& rows) {
  for (const auto& r : rows)
    if (r.code != kOk) return r.code;
  return kOk;
}

// ---------------------------------------------------------------- sweeps

using Point = std::map<std::string, double>;

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("invalid number '" + text + "' in " + what);
  }
  if (used != text.size()) throw UsageError("invalid number '" + text + "' in " + what);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

/// start:stop:count[:lin|log]
std::vector<double> parse_range(const std::string& text, const std::string& what) {
  const auto parts = split(text, ':');
  if (parts.size() < 3 || parts.size() > 4) throw UsageError(what + " expects start:stop:count[:log]");
  const double start = parse_number(parts[0], what);
  const double stop = parse_number(parts[1], what);
  const double count_d = parse_number(parts[2], what);
  if (!(count_d >= 1.0) || count_d != std::floor(count_d) || count_d > 1e6)
    throw UsageError(what + ": count must be a positive integer");
  const auto count = static_cast<std::size_t>(count_d);
  bool log_scale = false;
  if (parts.size() == 4) {
    if (parts[3] == "log") log_scale = true;
    else if (parts[3] != "lin") throw UsageError(what + ": scale must be 'lin' or 'log'");
  }
  if (log_scale && !(start > 0.0 && stop > 0.0)) throw UsageError(what + ": log scale needs positive bounds");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    values[i] = log_scale ? std::exp(std::log(start) + f * (std::log(stop) - std::log(start)))
                          : start + f * (stop - start);
  }
  values.front() = start;
  if (count > 1) values.back() = stop;
  return values;
}

SweepAxis parse_sweep(const std::string& text, const std::vector<std::string>& allowed) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("--sweep expects name=start:stop:count[:log]");
  SweepAxis axis{text.substr(0, eq), {}};
  if (std::find(allowed.begin(), allowed.end(), axis.name) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw UsageError("cannot sweep '" + axis.name + "' here (allowed: " + list + ")");
  }
  axis.values = parse_range(text.substr(eq + 1), "--sweep " + axis.name);
  return axis;
}

/// Cartesian product, first axis varying slowest.
std::vector<Point> expand(const std::vector<std::string>& specs, const std::vector<std::string>& allowed) {
  std::vector<Point> points{Point{}};
  for (const auto& s : specs) {
    const auto axis = parse_sweep(s, allowed);
    std::vector<Point> next;
    for (const auto& p : points) {
      if (p.count(axis.name)) throw UsageError("parameter '" + axis.name + "' swept twice");
      for (double v : axis.values) {
        Point q = p;
        q[axis.name] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

double value_or(const Point& p, const std::string& name, double fallback) {
  const auto it = p.find(name);
  return it == p.end() ? fallback : it->second;
}

unsigned resolve_jobs(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("MAGTUNNEL_JOBS"); env && *env) {
    const double v = parse_number(env, "MAGTUNNEL_JOBS");
    if (!(v >= 1.0) || v != std::floor(v) || v > 1024) throw UsageError("MAGTUNNEL_JOBS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return 1;
}

/// Evaluates points on up to `jobs` workers; results keep input order.
std::vector<Outcome> run_points(std::size_t n, unsigned jobs, const std::function<Outcome(std::size_t)>& f) {
  std::vector<Outcome> out(n);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::future<void>> workers;
  for (unsigned t = 0; t < jobs; ++t) {
    workers.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < n; i += jobs) out[i] = f(i);
    }));
  }
  for (auto& w : workers) w.get();
  return out;
}

// ---------------------------------------------------------------- config files

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// key = value lines become "--key value" (true/false for switches).
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

/// Pulls --config out of the argument list and splices the file's flags in
/// right after the subcommand so that later command-line flags win.
std::vector<std::string> splice_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& subcommands) {
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return rest;
  const auto file_args = read_config(*path);
  auto at = std::find_if(rest.begin(), rest.end(), [&](const std::string& a) {
    return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
  });
  if (at == rest.end()) throw UsageError("--config needs a subcommand");
  rest.insert(at + 1, file_args.begin(), file_args.end());
  return rest;
}

// ---------------------------------------------------------------- shared options

struct ModelOptions {
  double omega = 1.0;
  double omega_c = 0.0;
  double alpha = 0.01;
  std::string mode = "physical";
};

void add_model_options(CLI::App* cmd, ModelOptions& m, const std::string& default_mode) {
  m.mode = default_mode;
  cmd->add_option("--omega", m.omega, "well frequency omega")->capture_default_str();
  cmd->add_option("--omega-c", m.omega_c, "cyclotron frequency omega_c")->capture_default_str();
  cmd->add_option("--alpha", m.alpha, "quartic coefficient alpha")->capture_default_str();
  cmd->add_option("--mode", m.mode, "continuation convention for Omega")
      ->check(CLI::IsMember({"euclidean", "physical"}))
      ->capture_default_str();
}

void add_output_options(CLI::App* cmd, OutputOptions& o, std::vector<std::string>& sweeps, bool with_sweep) {
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  cmd->add_flag("--json-lines", o.json_lines, "with --format json: one object per line");
  cmd->add_option("--output,-o", o.path, "write records to this file instead of standard output");
  cmd->add_option("--jobs,-j", o.jobs, "worker threads for sweeps (default: $MAGTUNNEL_JOBS or 1)")
      ->check(CLI::PositiveNumber);
  if (with_sweep) {
    cmd->add_option("--sweep", sweeps, "sweep a parameter: name=start:stop:count[:log] (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  }
}

ModelParams make_params(const ModelOptions& m, const Point& pt) {
  ModelParams p;
  p.omega = value_or(pt, "omega", m.omega);
  p.omega_c = value_or(pt, "omega_c", m.omega_c);
  p.alpha = value_or(pt, "alpha", m.alpha);
  p.mode = m.mode == "euclidean" ? Continuation::Euclidean : Continuation::Physical;
  return p;
}

void set_model(Row& row, const ModelParams& p) {
  row.set("omega", p.omega).set("omega_c", p.omega_c).set("alpha", p.alpha).set("mode", to_string(p.mode));
  row.set("Omega", derived_frequency(p));
}

void require_alpha(const CLI::App* cmd, const std::vector<std::string>& sweeps) {
  const bool swept = std::any_of(sweeps.begin(), sweeps.end(), [](const std::string& s) { return s.rfind("alpha=", 0) == 0; });
  if (cmd->count("--alpha") == 0 && !swept) throw UsageError(std::string(cmd->get_name()) + ": --alpha is required");
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------- columns

const Columns kRateColumns{"omega", "omega_c", "alpha", "mode", "Omega", "S_cl", "gamma_closed", "semiclassical",
                           "ground_below_barrier", "horizon_requested", "horizon", "gamma_assembled",
                           "relative_deviation", "status", "message"};

const Columns kFluctColumns{"omega", "omega_c", "alpha", "mode", "Omega", "horizon_requested", "horizon", "Omega_T",
                            "J", "J_asymptotic", "log_J0", "log_J0_asymptotic", "lambda_phi", "lambda_tau",
                            "lambda_ratio", "lambda_phi_asymptotic", "lambda_tau_asymptotic", "norm_phi1",
                            "norm_phi2", "jacobian_phi_tau", "faddeev_popov", "n_grid", "status", "message"};

const Columns kSampleColumns{"tau", "J_xx", "J_yx", "J_xy", "J_yy", "det_J", "status", "message"};

const Columns kWkbColumns{"omega", "omega_c", "alpha", "mode", "Omega", "E", "r1", "r2", "W_direct",
                          "W_three_region", "W0", "S_cl", "C", "D_direct", "D_three_region", "D_assembled",
                          "status", "message"};

const Columns kCompareColumns{"omega", "omega_c", "alpha", "mode", "Omega", "S_cl", "horizon", "gamma_closed",
                              "gamma_assembled", "gamma_wkb", "gamma_wkb_assembled", "dev_assembled_closed",
                              "dev_wkb_closed", "dev_wkb_assembled", "semiclassical", "ground_below_barrier",
                              "status", "message"};

const Columns kVortexColumns{"R", "h", "H", "V0", "well_exists", "r_barrier", "deltaV", "deltaV_over_V0", "omega",
                             "alpha", "Omega", "action", "log_rate_quantum", "rate_quantum", "rate_thermal",
                             "status", "message"};

const Columns kExpulsionColumns{"R", "channel", "threshold", "h_star", "H_star", "rate", "rate_min", "rate_max",
                                "status", "message"};

/// Default horizon: Omega T = 10 at the pipeline frequency.
double default_horizon(const ModelParams& p) { return 10.0 / derived_frequency(pipeline_params(p)); }

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decay rates of a metastable 2D well in a magnetic field: instanton closed form, "
               "fluctuation-determinant pipeline, radial WKB, and the vortex-in-a-disk application",
               "magtunnel"};
  app.set_version_flag("--version", MAGTUNNEL_VERSION);
  app.footer("Any subcommand also accepts --config FILE with 'flag = value' lines; explicit flags override the file.\n"
             "Exit codes: 0 ok, 64 usage, 65 domain/regime, 70 numerical failure.");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  OutputOptions output;
  std::vector<std::string> sweeps;

  // rate
  auto* rate = app.add_subcommand("rate", "closed-form rate, optionally checked against the determinant pipeline");
  ModelOptions rate_model;
  std::optional<double> rate_horizon;
  bool rate_assemble = false;
  add_model_options(rate, rate_model, "physical");
  rate->add_option("--horizon", rate_horizon, "horizon T for the assembled rate (implies --assemble)");
  rate->add_flag("--assemble", rate_assemble, "also run the determinant pipeline (default horizon Omega T = 10)");
  add_output_options(rate, output, sweeps, true);

  // fluct
  auto* fluct = app.add_subcommand("fluct", "Jacobi determinants, quasi-zero eigenvalues, norms and Jacobians");
  ModelOptions fluct_model;
  std::optional<double> fluct_horizon;
  int grid = kDefaultGrid;
  double tolerance = 1e-10;
  bool samples = false;
  add_model_options(fluct, fluct_model, "euclidean");
  fluct->add_option("--horizon", fluct_horizon, "requested horizon T (snapped to 4 pi k / omega_c); default Omega T = 10");
  fluct->add_option("--grid", grid, "number of sample points on [-T, T]")->check(CLI::Range(2001, 10000001))->capture_default_str();
  fluct->add_option("--tolerance", tolerance, "target accuracy of the determinants")->check(CLI::PositiveNumber)->capture_default_str();
  fluct->add_flag("--samples", samples, "emit the sampled Jacobi matrix instead of the summary record");
  add_output_options(fluct, output, sweeps, true);

  // wkb
  auto* wkb = app.add_subcommand("wkb", "radial WKB: turning points, barrier integral and decay rate");
  ModelOptions wkb_model;
  std::string energy_text = "ground";
  add_model_options(wkb, wkb_model, "physical");
  wkb->add_option("--energy", energy_text, "energy E, or 'ground' for E = Omega")->capture_default_str();
  add_output_options(wkb, output, sweeps, true);

  // compare
  auto* compare = app.add_subcommand("compare", "closed form vs determinant pipeline vs WKB");
  ModelOptions cmp_model;
  std::optional<double> cmp_horizon;
  add_model_options(compare, cmp_model, "physical");
  compare->add_option("--horizon", cmp_horizon, "horizon T for the pipeline; default Omega T = 10");
  add_output_options(compare, output, sweeps, true);

  // vortex
  auto* vortex = app.add_subcommand("vortex", "vortex in a mesoscopic disk: barrier, rates, expulsion field");
  vortex->set_help_flag("--help", "print this help message and exit");  // frees --h for the reduced field
  VortexDot dot;
  std::optional<double> h_opt;
  double temperature = 0.05;
  double attempt = 1.0;
  double threshold = 1e-6;
  std::string sweep_radius;
  std::vector<std::string> channel_names{"quantum", "thermal"};
  vortex->add_option("--R", dot.R, "disk radius")->capture_default_str();
  vortex->add_option("--xi", dot.xi, "coherence length")->capture_default_str();
  vortex->add_option("--lambda", dot.lambda_L, "penetration depth")->capture_default_str();
  vortex->add_option("--d", dot.d, "film thickness")->capture_default_str();
  vortex->add_option("--phi0", dot.Phi0, "flux quantum")->capture_default_str();
  vortex->add_option("--mass", dot.M, "vortex mass")->capture_default_str();
  vortex->add_option("--magnus", dot.magnus, "effective cyclotron frequency of the vortex")->capture_default_str();
  vortex->add_option("--hbar", dot.hbar, "Planck constant in the chosen units")->capture_default_str();
  vortex->add_option("--kB", dot.k_B, "Boltzmann constant in the chosen units")->capture_default_str();
  vortex->add_option("--h", h_opt, "reduced field h = H pi R^2 / Phi0 for a single-point record");
  vortex->add_option("--temperature", temperature, "temperature for the thermal channel")->capture_default_str();
  vortex->add_option("--attempt-frequency", attempt, "attempt frequency of the thermal channel")->capture_default_str();
  vortex->add_option("--threshold", threshold, "rate defining the expulsion field")->capture_default_str();
  vortex->add_option("--sweep-radius", sweep_radius, "radii start:stop:count[:log] for the expulsion curve");
  vortex->add_option("--channels", channel_names, "expulsion channels")
      ->delimiter(',')
      ->check(CLI::IsMember({"quantum", "thermal"}))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  add_output_options(vortex, output, sweeps, true);

  std::vector<std::string> args;
  try {
    args = splice_config(raw_args, {"rate", "fluct", "wkb", "compare", "vortex"});
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    err << "magtunnel: " << e.what() << '\n';
    return kUsage;
  }

  std::string command;
  Columns columns;
  std::vector<Outcome> rows;
  try {
    const unsigned jobs = resolve_jobs(output.jobs);
    if (output.json_lines && output.format != "json") throw UsageError("--json-lines requires --format json");

    if (*rate) {
      command = "rate";
      columns = kRateColumns;
      require_alpha(rate, sweeps);
      const auto points = expand(sweeps, {"omega", "omega_c", "alpha", "horizon"});
      const bool assemble = rate_assemble || rate_horizon || std::any_of(sweeps.begin(), sweeps.end(), [](auto& s) {
                              return s.rfind("horizon=", 0) == 0;
                            });
      rows = run_points(points.size(), jobs, [&](std::size_t i) {
        return evaluate(columns, [&](Row& row) {
          const auto p = make_params(rate_model, points[i]);
          set_model(row, p);
          const auto closed = decay_rate_closed_form(p);
          row.set("S_cl", closed.action).set("gamma_closed", closed.gamma);
          row.set("semiclassical", closed.validity.semiclassical);
          row.set("ground_below_barrier", closed.validity.ground_below_barrier);
          if (!assemble) return;
          const double T = value_or(points[i], "horizon", rate_horizon.value_or(default_horizon(p)));
          row.set("horizon_requested", T);
          const auto b = assemble_rate(p, T);
          row.set("horizon", b.T).set("gamma_assembled", b.Gamma).set("relative_deviation", b.relative_deviation());
        });
      });
    } else if (*fluct) {
      command = "fluct";
      require_alpha(fluct, sweeps);
      if (samples) {
        if (!sweeps.empty()) throw UsageError("--samples cannot be combined with --sweep");
        columns = kSampleColumns;
        const auto p = make_params(fluct_model, {});
        std::vector<Outcome> sampled;
        auto failure = evaluate(columns, [&](Row&) {
          const double T = fluct_horizon.value_or(default_horizon(p));
          JacobiOptions jo;
          jo.tolerance = tolerance;
          jo.n_grid = grid;
          const auto jm = integrate_jacobi(p, T, jo);
          for (const auto& s : jm.samples) {
            sampled.push_back(evaluate(columns, [&](Row& row) {
              const auto v = s.value();
              row.set("tau", s.tau).set("J_xx", v(0, 0)).set("J_yx", v(1, 0)).set("J_xy", v(0, 1));
              row.set("J_yy", v(1, 1)).set("det_J", v.determinant());
            }));
          }
        });
        rows = failure.code == kOk ? std::move(sampled) : std::vector<Outcome>{failure};
      } else {
        columns = kFluctColumns;
        const auto points = expand(sweeps, {"omega", "omega_c", "alpha", "horizon"});
        rows = run_points(points.size(), jobs, [&](std::size_t i) {
          return evaluate(columns, [&](Row& row) {
            const auto p = make_params(fluct_model, points[i]);
            set_model(row, p);
            const double Omega = derived_frequency(p);
            const double T = value_or(points[i], "horizon", fluct_horizon.value_or(10.0 / Omega));
            JacobiOptions jo;
            jo.tolerance = tolerance;
            row.set("horizon_requested", T).set("n_grid", grid);
            const auto J = determinant_J(p, T, jo);
            row.set("horizon", J.T).set("Omega_T", Omega * J.T).set("J", J.value).set("J_asymptotic", J.asymptotic);
            const auto J0 = determinant_J0(p, T, jo);
            row.set("log_J0", J0.log_abs).set("log_J0_asymptotic", J0.asymptotic_log);
            const auto z = extract_zero_eigenvalues(p, T);
            row.set("lambda_phi", z.lambda_phi).set("lambda_tau", z.lambda_tau);
            row.set("lambda_ratio", z.lambda_tau / z.lambda_phi);
            row.set("lambda_phi_asymptotic", z.asymptotic_phi).set("lambda_tau_asymptotic", z.asymptotic_tau);
            const auto n = mode_norms(p);
            row.set("norm_phi1", n.norm_phi1).set("norm_phi2", n.norm_phi2);
            row.set("jacobian_phi_tau", zero_mode_jacobian(p)).set("faddeev_popov", faddeev_popov_determinant(p));
          });
        });
      }
    } else if (*wkb) {
      command = "wkb";
      columns = kWkbColumns;
      require_alpha(wkb, sweeps);
      std::optional<double> energy;
      if (energy_text != "ground") energy = parse_number(energy_text, "--energy");
      const auto points = expand(sweeps, {"omega", "omega_c", "alpha", "energy"});
      rows = run_points(points.size(), jobs, [&](std::size_t i) {
        return evaluate(columns, [&](Row& row) {
          const auto p = make_params(wkb_model, points[i]);
          set_model(row, p);
          WkbEnergy e = GroundState{};
          if (points[i].count("energy")) e = points[i].at("energy");
          else if (energy) e = *energy;
          const auto w = wkb_decay_rate(p, e);
          row.set("E", w.E).set("r1", w.r1).set("r2", w.r2).set("W_direct", w.W);
          row.set("W_three_region", w.W_three_region).set("W0", w.W0).set("S_cl", classical_action(p));
          row.set("C", w.C).set("D_direct", w.D).set("D_three_region", w.D_three_region);
          row.set("D_assembled", w.D_assembled);
        });
      });
    } else if (*compare) {
      command = "compare";
      columns = kCompareColumns;
      const auto points = expand(sweeps, {"omega", "omega_c", "alpha", "horizon"});
      rows = run_points(points.size(), jobs, [&](std::size_t i) {
        return evaluate(columns, [&](Row& row) {
          const auto p = make_params(cmp_model, points[i]);
          set_model(row, p);
          const auto closed = decay_rate_closed_form(p);
          row.set("S_cl", closed.action).set("gamma_closed", closed.gamma);
          row.set("semiclassical", closed.validity.semiclassical);
          row.set("ground_below_barrier", closed.validity.ground_below_barrier);
          const double T = value_or(points[i], "horizon", cmp_horizon.value_or(default_horizon(p)));
          const auto b = assemble_rate(p, T);
          const auto w = wkb_decay_rate(p);
          row.set("horizon", b.T).set("gamma_assembled", b.Gamma).set("gamma_wkb", w.D);
          row.set("gamma_wkb_assembled", w.D_assembled_quadrature);
          row.set("dev_assembled_closed", relative_gap(b.Gamma, closed.gamma));
          row.set("dev_wkb_closed", relative_gap(w.D, closed.gamma));
          row.set("dev_wkb_assembled", relative_gap(w.D, b.Gamma));
        });
      });
    } else if (*vortex) {
      command = "vortex";
      std::vector<Channel> channels;
      for (const auto& name : channel_names) {
        if (name == "quantum") channels.emplace_back(QuantumChannel{});
        else channels.emplace_back(ThermalChannel{temperature, attempt});
      }
      if (h_opt || std::any_of(sweeps.begin(), sweeps.end(), [](auto& s) { return s.rfind("h=", 0) == 0; })) {
        if (!sweep_radius.empty()) throw UsageError("--h and --sweep-radius are exclusive");
        columns = kVortexColumns;
        if (!h_opt && sweeps.empty()) throw UsageError("vortex point records need --h");
        const auto points = expand(sweeps, {"h", "R", "d", "lambda", "magnus", "mass", "temperature"});
        rows = run_points(points.size(), jobs, [&](std::size_t i) {
          return evaluate(columns, [&](Row& row) {
            VortexDot v = dot;
            v.R = value_or(points[i], "R", v.R);
            v.d = value_or(points[i], "d", v.d);
            v.lambda_L = value_or(points[i], "lambda", v.lambda_L);
            v.magnus = value_or(points[i], "magnus", v.magnus);
            v.M = value_or(points[i], "mass", v.M);
            const double kT = value_or(points[i], "temperature", temperature);
            const double h = value_or(points[i], "h", h_opt.value_or(0.0));
            row.set("R", v.R).set("h", h);
            v.validate();
            const auto g = barrier_geometry(v, h);
            const double V0 = v.energy_scale();
            row.set("H", v.field_from_reduced(h)).set("V0", V0).set("well_exists", g.well_exists);
            if (!g.well_exists) throw RegimeError("no metastable well for h <= 1 (h = " + format_number(h) + ")");
            row.set("r_barrier", g.r_barrier).set("deltaV", g.deltaV).set("deltaV_over_V0", g.deltaV / V0);
            const auto q = quartic_fit(v, h);
            row.set("omega", q.omega).set("alpha", q.alpha);
            const auto t = tunneling_rate(v, h);
            row.set("Omega", t.Omega).set("action", t.action).set("log_rate_quantum", t.log_rate);
            row.set("rate_quantum", t.rate).set("rate_thermal", thermal_rate(v, h, kT, attempt));
          });
        });
      } else {
        if (!sweeps.empty()) throw UsageError("vortex expulsion runs sweep radii with --sweep-radius");
        columns = kExpulsionColumns;
        std::vector<double> radii{dot.R};
        if (!sweep_radius.empty()) radii = parse_range(sweep_radius, "--sweep-radius");
        if (!std::is_sorted(radii.begin(), radii.end())) throw UsageError("--sweep-radius must be ascending");
        if (!(threshold > 0.0)) throw UsageError("--threshold must be positive");
        const auto sweep = radius_sweep(dot, radii, threshold, channels, jobs);
        for (const auto& s : sweep) {
          Row row(columns);
          row.set("R", s.R).set("channel", s.channel).set("threshold", threshold);
          int code = kOk;
          if (s.ok) {
            row.set("h_star", s.h_star).set("H_star", s.H_star).set("rate", s.rate).set("status", "ok");
          } else {
            code = s.status == "numerical_error" ? kNumerical : kRegime;
            if (s.status == "no_crossing") row.set("rate_min", s.rate_min).set("rate_max", s.rate_max);
            row.set("status", s.status).set("message", s.error);
          }
          rows.push_back({row.take(), code});
        }
      }
    }
  } catch (const UsageError& e) {
    err << "magtunnel: " << e.what() << '\n';
    return kUsage;
  }

  std::ofstream file;
  std::ostream* os = &out;
  if (!output.path.empty()) {
    file.open(output.path);
    if (!file) {
      err << "magtunnel: cannot open output file '" << output.path << "'\n";
      return kUsage;
    }
    os = &file;
  }
  write_table(command, columns, rows, output, *os);
  const int code = exit_code(rows);
  if (code != kOk) {
    for (const auto& r : rows) {
      if (r.code == kOk) continue;
      const auto& msg = r.cells.back();
      if (const auto* s = std::get_if<std::string>(&msg)) err << "magtunnel: " << *s << '\n';
      break;
    }
  }
  return code;
}

}  // namespace magtunnel::cli
