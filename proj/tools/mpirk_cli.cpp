// mpirk command line: solve, tableau, stability, bench.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpirk/io.hpp"
#include "mpirk/mpirk.hpp"

namespace {

using namespace mpirk;
using nlohmann::json;

constexpr int kExitStepFailed = 2;
constexpr int kExitConfig = 3;
constexpr int kExitBench = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ConfigMap = std::map<std::string, std::string>;

int default_bits() {
  if (const char* env = std::getenv("MPIRK_BITS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError("MPIRK_BITS: not an integer: '" + std::string(env) + "'");
    }
  }
  return 167;
}

ConfigMap solve_defaults() {
  return {{"problem", "mxy"},
          {"family", "gauss"},
          {"stages", "3"},
          {"bits", std::to_string(default_bits())},
          {"rtol", "1e-20"},
          {"atol", "0"},
          {"gamma0", "1/8"},
          {"mode", "adaptive"},
          {"fixed_h", ""},
          {"h0", ""},
          {"interval", ""},
          {"solver", "lu"},
          {"s_bits", "53"},
          {"precond", "none"},
          {"restart", "30"},
          {"inner_tol", "1e-10"},
          {"refine_max_iter", "30"},
          {"newton", "simplified"},
          {"newton_tol", ""},
          {"max_newton", "40"},
          {"seed", "1"},
          {"max_steps", "10000000"},
          {"propagate_embedded", "false"},
          {"positive_exponent_controller", "false"},
          {"constant_sink_brusselator", "false"}};
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// key=value lines, '#' comments; or a report.json whose "config" object is reused.
void load_config_file(const std::string& path, ConfigMap& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    const json& c = j.contains("config") ? j["config"] : j;
    for (const auto& [k, v] : c.items()) {
      if (!cfg.count(k)) throw ConfigError(path + ": unknown key '" + k + "'");
      cfg[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return;
  }
  std::istringstream lines(text);
  std::string line;
  for (int lineno = 1; std::getline(lines, line); ++lineno) {
    const std::string s = trim(line.substr(0, line.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string k = trim(s.substr(0, eq));
    if (!cfg.count(k)) throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + k + "'");
    cfg[k] = trim(s.substr(eq + 1));
  }
}

int parse_int(const ConfigMap& cfg, const std::string& key) {
  const std::string& v = cfg.at(key);
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

bool parse_bool(const ConfigMap& cfg, const std::string& key) {
  const std::string& v = cfg.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

/// Decimal, hex float, or a ratio "p/q".
Real parse_number(const std::string& key, const std::string& v, PrecisionContext ctx) {
  try {
    const auto slash = v.find('/');
    if (slash != std::string::npos)
      return Real::from_string(trim(v.substr(0, slash)), ctx) / Real::from_string(trim(v.substr(slash + 1)), ctx);
    return Real::from_string(trim(v), ctx);
  } catch (const InvalidArgument&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

std::pair<Real, Real> parse_range(const std::string& key, const std::string& v, PrecisionContext ctx) {
  const auto colon = v.find(':');
  if (colon == std::string::npos) throw ConfigError(key + ": expected lo:hi, got '" + v + "'");
  return {parse_number(key, v.substr(0, colon), ctx), parse_number(key, v.substr(colon + 1), ctx)};
}

Real parse_gamma0(const std::string& v, PrecisionContext ctx) {
  if (v == "hairer") return radau2a_classic_gamma0(ctx);
  return parse_number("gamma0", v, ctx);
}

Tableau build_tableau(const std::string& family, int m, PrecisionContext ctx, const std::string& key = "stages") {
  Family f;
  try {
    f = family_from_string(family);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("family: ") + e.what());
  }
  if (m < 1) throw ConfigError(key + ": must be >= 1");
  if (f == Family::Gauss && m > 50) throw ConfigError(key + ": Gauss tableaux are limited to m <= 50");
  if (f == Family::RadauIIA && m != 3) throw ConfigError(key + ": Radau IIA is only available with 3 stages");
  return make_tableau(f, m, ctx);
}

PrecisionContext parse_bits(const ConfigMap& cfg, const std::string& key) {
  const int bits = parse_int(cfg, key);
  if (bits < 24) throw ConfigError(key + ": must be >= 24");
  return PrecisionContext{bits};
}

json library_versions() {
  return {{"mpfr", mpfr_version_string()}, {"gmp", gmp_version}, {"mpirk", "0.1.0"}};
}

// ---- solve ----

struct SolveSetup {
  IVProblem prob;
  Tableau tab;
  std::optional<WTransform> wt;
  EmbeddedWeights emb;
  Real x0, x_end, h0;
  NewtonOptions opt;
  StepControl ctl;
};

SolveSetup resolve_solve(const ConfigMap& cfg) {
  const PrecisionContext ctx = parse_bits(cfg, "bits");
  const PrecisionContext s_ctx = parse_bits(cfg, "s_bits");
  if (s_ctx.bits > ctx.bits) throw ConfigError("s_bits: exceeds bits");
  const int m = parse_int(cfg, "stages");

  SolveSetup s;
  s.tab = build_tableau(cfg.at("family"), m, ctx);
  ProblemOptions popt;
  const int seed = parse_int(cfg, "seed");
  if (seed < 0) throw ConfigError("seed: must be non-negative");
  popt.seed = static_cast<std::uint64_t>(seed);
  popt.constant_sink_brusselator = parse_bool(cfg, "constant_sink_brusselator");
  try {
    s.prob = make_problem(cfg.at("problem"), ctx, popt);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  if (s.tab.family == Family::Gauss) s.wt = w_transform(s.tab);
  const Real gamma0 = parse_gamma0(cfg.at("gamma0"), ctx);
  if (gamma0.is_zero()) throw ConfigError("gamma0: must be non-zero");
  s.emb = embedded_weights(s.tab, gamma0);

  s.x0 = s.prob.x0;
  s.x_end = s.prob.x_end;
  if (!cfg.at("interval").empty()) std::tie(s.x0, s.x_end) = parse_range("interval", cfg.at("interval"), ctx);
  if (!(s.x_end > s.x0)) throw ConfigError("interval: end must exceed start");

  const Real rtol = parse_number("rtol", cfg.at("rtol"), ctx);
  const Real atol = parse_number("atol", cfg.at("atol"), ctx);
  if (rtol < 0.0 || atol < 0.0) throw ConfigError("rtol/atol: must be non-negative");
  s.ctl = StepControl::make(ctx, m, atol, rtol);
  s.ctl.positive_exponent_controller = parse_bool(cfg, "positive_exponent_controller");
  s.ctl.propagate_embedded = parse_bool(cfg, "propagate_embedded");
  s.ctl.max_steps = parse_int(cfg, "max_steps");

  const std::string mode = cfg.at("mode");
  if (mode == "fixed") {
    if (cfg.at("fixed_h").empty()) throw ConfigError("fixed_h: required in fixed mode");
    s.ctl.fixed_step = true;
    s.h0 = parse_number("fixed_h", cfg.at("fixed_h"), ctx);
  } else if (mode == "adaptive") {
    if (atol.is_zero() && rtol.is_zero()) throw ConfigError("rtol/atol: both zero in adaptive mode");
    s.h0 = cfg.at("h0").empty() ? (s.x_end - s.x0) / 100.0 : parse_number("h0", cfg.at("h0"), ctx);
  } else {
    throw ConfigError("mode: expected adaptive or fixed, got '" + mode + "'");
  }
  if (!(s.h0 > 0.0)) throw ConfigError("step size: must be positive");

  s.opt = make_newton_options(s_ctx, ctx, rtol);
  const std::string newton = cfg.at("newton");
  if (newton == "simplified") {
    s.opt.mode = NewtonMode::SimplifiedNewton;
  } else if (newton == "quasi") {
    s.opt.mode = NewtonMode::QuasiNewton;
  } else {
    throw ConfigError("newton: expected simplified or quasi, got '" + newton + "'");
  }
  if (!cfg.at("newton_tol").empty())
    s.opt.newton_tol = parse_number("newton_tol", cfg.at("newton_tol"), ctx);
  else if (s.ctl.fixed_step)
    s.opt.newton_tol = pow2(20 - ctx.bits, ctx);
  s.opt.max_newton = parse_int(cfg, "max_newton");
  try {
    s.opt.refinement.inner = inner_solver_from_string(cfg.at("solver"));
    s.opt.refinement.precondition = preconditioning_from_string(cfg.at("precond"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("solver/precond: ") + e.what());
  }
  s.opt.refinement.restart = parse_int(cfg, "restart");
  s.opt.refinement.inner_tol = parse_number("inner_tol", cfg.at("inner_tol"), PrecisionContext{53}).to_double();
  s.opt.refinement.max_iter = parse_int(cfg, "refine_max_iter");
  try {
    s.opt.validate();
    s.ctl.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

json report_json(const ConfigMap& cfg, const SolveSetup& s, const RunReport& r, const std::string& status,
                 const std::string& message) {
  json j;
  j["status"] = status;
  if (!message.empty()) j["message"] = message;
  j["config"] = cfg;
  j["seed"] = s.prob.seed;
  j["problem"] = s.prob.name;
  j["versions"] = library_versions();
  j["steps_accepted"] = r.steps_accepted;
  j["steps_rejected"] = r.steps_rejected;
  j["newton_iters"] = r.newton_iters;
  j["linear_iters"] = r.linear_iters;
  j["refine_iters"] = r.refine_iters;
  if (status == "ok") {
    j["final_x"] = r.final_x.to_hex();
    j["final_y"] = io::to_json(r.final_y);
    j["final_y_hat"] = io::to_json(r.final_y_hat);
    if (r.steps_accepted > 0) {
      j["min_h_accepted"] = r.min_h_accepted.to_hex();
      j["max_h_accepted"] = r.max_h_accepted.to_hex();
    }
    if (r.has_exact) {
      j["max_rel_error"] = r.max_rel_error.to_hex();
      j["min_rel_error"] = r.min_rel_error.to_hex();
    }
  }
  j["wall_time"] = r.wall_time;
  return j;
}

int cmd_solve(const ConfigMap& cfg, const std::string& report_path, const std::string& history_path) {
  const SolveSetup s = resolve_solve(cfg);
  RunReport r;
  std::string status = "ok", message;
  int code = 0;
  try {
    r = integrate(s.prob, s.tab, s.wt ? &*s.wt : nullptr, s.emb, s.x0, s.x_end, s.prob.y0, s.h0, s.opt, s.ctl);
  } catch (const StepFailed& e) {
    status = "step_failed";
    message = e.what();
    code = kExitStepFailed;
  } catch (const MaxStepsExceeded& e) {
    status = "max_steps_exceeded";
    message = e.what();
    code = kExitStepFailed;
  }
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw ConfigError("report: cannot write '" + report_path + "'");
    out << report_json(cfg, s, r, status, message).dump(2) << '\n';
  }
  if (!history_path.empty()) {
    std::ofstream out(history_path);
    if (!out) throw ConfigError("history: cannot write '" + history_path + "'");
    io::write_history_csv(out, r.history);
  }
  if (code != 0) {
    std::cerr << "solve: " << message << '\n';
    return code;
  }
  std::cout << "problem        " << s.prob.name << '\n'
            << "steps          " << r.steps_accepted << " accepted, " << r.steps_rejected << " rejected\n"
            << "final x        " << r.final_x.to_string(20) << '\n';
  if (r.has_exact) std::cout << "max rel error  " << r.max_rel_error.to_string(6) << '\n';
  std::cout << "wall time      " << r.wall_time << " s\n";
  return 0;
}

// ---- tableau ----

int cmd_tableau(int m, const std::string& family, int bits, const std::string& gamma0_text) {
  if (bits < 24) throw ConfigError("--bits: must be >= 24");
  const PrecisionContext ctx{bits};
  const Tableau t = build_tableau(family, m, ctx, "-m");
  const Real gamma0 = parse_gamma0(gamma0_text, ctx);
  if (gamma0.is_zero()) throw ConfigError("--gamma0: must be non-zero");
  const EmbeddedWeights e = embedded_weights(t, gamma0);

  json j = io::tableau_to_json(t);
  j["embedded"] = io::embedded_to_json(e);
  json res;
  res["B"] = {{"q", t.order}, {"max", quadrature_residual(t.c, t.b, t.order).to_double()}};
  res["C"] = {{"q", t.m}, {"max", collocation_residual(t, t.m).to_double()}};
  res["Bhat"] = {{"q", e.order_hat}, {"max", quadrature_residual(t.c, e.bhat, t.m, &e.gamma0).to_double()}};
  if (t.family == Family::Gauss) {
    const WTransform w = w_transform(t);
    res["W_cond_inf"] = cond_inf(w.W).to_double();
  }
  j["residuals"] = res;
  std::cout << j.dump(2) << '\n';
  return 0;
}

// ---- stability ----

int cmd_stability(int m, const std::string& family, int bits, const std::string& gamma0_text,
                  const std::string& re_range, const std::string& im_range, int nx, int ny,
                  const std::string& output) {
  if (bits < 24) throw ConfigError("--bits: must be >= 24");
  const PrecisionContext ctx{bits};
  const Tableau t = build_tableau(family, m, ctx, "-m");
  std::optional<EmbeddedWeights> e;
  if (!gamma0_text.empty()) {
    const Real g = parse_gamma0(gamma0_text, ctx);
    if (g.is_zero()) throw ConfigError("--gamma0: must be non-zero");
    e = embedded_weights(t, g);
  }
  const auto [re_lo, re_hi] = parse_range("--re", re_range, ctx);
  const auto [im_lo, im_hi] = parse_range("--im", im_range, ctx);
  std::vector<StabilitySample> grid;
  try {
    grid = stability_grid(t, e ? &*e : nullptr, re_lo, re_hi, im_lo, im_hi, nx, ny);
  } catch (const InvalidArgument& ex) {
    throw ConfigError(std::string("--nx/--ny: ") + ex.what());
  }
  if (output.empty() || output == "-") {
    io::write_stability_csv(std::cout, grid);
  } else {
    std::ofstream out(output);
    if (!out) throw ConfigError("--output: cannot write '" + output + "'");
    io::write_stability_csv(out, grid);
  }
  return 0;
}

// ---- bench ----

struct BenchCell {
  std::string algorithm;
  int m = 0;
  Real rel_error;
  double wall_time = 0;
  long newton_iters = 0, refine_iters = 0, linear_iters = 0;
  std::string status = "ok";
};

int cmd_bench(const std::string& suite, const std::string& stages, int bits, int n, int seed,
              const std::string& output) {
  if (suite != "linear") throw ConfigError("--suite: unknown suite '" + suite + "' (available: linear)");
  if (bits < 24) throw ConfigError("--bits: must be >= 24");
  if (n < 1) throw ConfigError("--n: must be >= 1");
  int m_lo = 3, m_hi = 12;
  const auto colon = stages.find(':');
  try {
    if (colon == std::string::npos) {
      m_lo = m_hi = std::stoi(stages);
    } else {
      m_lo = std::stoi(stages.substr(0, colon));
      m_hi = std::stoi(stages.substr(colon + 1));
    }
  } catch (const std::exception&) {
    throw ConfigError("--stages: expected m or lo:hi, got '" + stages + "'");
  }
  if (m_lo < 3 || m_hi > 12 || m_lo > m_hi) throw ConfigError("--stages: must lie within 3..12");

  const PrecisionContext ctx{bits};
  const PrecisionContext dp{53}, mp25 = PrecisionContext::from_digits(25);
  const IVProblem prob = make_linear_random(static_cast<std::size_t>(n), static_cast<std::uint64_t>(seed), ctx);
  const Real h = Real::from_ratio(1, 2, ctx);

  struct Algo {
    const char* name;
    NewtonMode mode;
    PrecisionContext s;
  };
  const std::vector<Algo> algos = {{"Iter.Ref-DM", NewtonMode::QuasiNewton, dp},
                                   {"W-Trans", NewtonMode::SimplifiedNewton, ctx},
                                   {"W-Iter.Ref-MM", NewtonMode::SimplifiedNewton, mp25},
                                   {"W-Iter.Ref-DM", NewtonMode::SimplifiedNewton, dp}};

  std::vector<BenchCell> cells;
  bool failed = false;
  for (int m = m_lo; m <= m_hi; ++m) {
    const Tableau t = gauss_tableau(m, ctx);
    const WTransform wt = w_transform(t);
    const EmbeddedWeights e = embedded_weights(t, Real::from_ratio(1, 8, ctx));
    StepControl ctl = StepControl::make(ctx, m, Real(ctx), Real(ctx));
    ctl.fixed_step = true;
    for (const Algo& a : algos) {
      BenchCell c;
      c.algorithm = a.name;
      c.m = m;
      NewtonOptions opt = make_newton_options(a.s, ctx, Real(ctx));
      opt.mode = a.mode;
      opt.newton_tol = pow2(20 - bits, ctx);
      try {
        const RunReport r = integrate(prob, t, &wt, e, prob.x0, prob.x0 + h, prob.y0, h, opt, ctl);
        c.rel_error = r.max_rel_error;
        c.wall_time = r.wall_time;
        c.newton_iters = r.newton_iters;
        c.refine_iters = r.refine_iters;
        c.linear_iters = r.linear_iters;
      } catch (const Error& ex) {
        c.status = std::string("diverged: ") + ex.what();
        c.rel_error = Real::inf(ctx);
        failed = true;
      }
      cells.push_back(std::move(c));
    }
  }

  std::ofstream file;
  if (!output.empty() && output != "-") {
    file.open(output);
    if (!file) throw ConfigError("--output: cannot write '" + output + "'");
  }
  std::ostream& os = file.is_open() ? file : std::cout;
  os << "algorithm,m,max_rel_error,wall_time,newton_iters,refine_iters,linear_iters,status\n";
  for (const auto& c : cells)
    os << c.algorithm << ',' << c.m << ',' << io::decimal(c.rel_error, 6) << ',' << c.wall_time << ','
       << c.newton_iters << ',' << c.refine_iters << ',' << c.linear_iters << ',' << (c.status == "ok" ? "ok" : "FLAGGED")
       << '\n';

  for (int m = m_lo; m <= m_hi; ++m) {
    Real lo = Real::inf(ctx), hi(ctx);
    const BenchCell *trans = nullptr, *dm = nullptr;
    for (const auto& c : cells) {
      if (c.m != m) continue;
      lo = min(lo, c.rel_error);
      hi = max(hi, c.rel_error);
      if (c.algorithm == "W-Trans") trans = &c;
      if (c.algorithm == "W-Iter.Ref-DM") dm = &c;
    }
    const bool parity = hi.is_finite() && hi <= lo * 10.0;
    if (!parity) failed = true;
    std::cerr << "m=" << m << " parity " << (parity ? "ok" : "FAIL") << " (errors " << lo.to_string(3) << " .. "
              << hi.to_string(3) << ")";
    if (trans && dm) std::cerr << ", W-Iter.Ref-DM " << dm->wall_time << " s vs W-Trans " << trans->wall_time << " s";
    std::cerr << '\n';
  }
  for (const auto& c : cells)
    if (c.status != "ok") std::cerr << c.algorithm << " m=" << c.m << ": " << c.status << '\n';
  return failed ? kExitBench : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-precision implicit Runge-Kutta solver"};
  app.require_subcommand(1);

  ConfigMap flags;
  std::string config_path, report_path = "report.json", history_path;
  auto* solve = app.add_subcommand("solve", "integrate a problem and write report.json");
  solve->add_option("--config", config_path, "key=value file or a previous report.json");
  solve->add_option("--report", report_path, "report path (empty to skip)");
  solve->add_option("--history", history_path, "per-step CSV path");
  const ConfigMap defaults = solve_defaults();
  std::map<std::string, std::string> flag_values;
  const std::map<std::string, std::string> help = {
      {"problem", "mxy, lorenz, vdpol, linearN, bruss1d:N"},
      {"family", "gauss or radau2a"},
      {"stages", "stage count"},
      {"bits", "working precision L in bits"},
      {"rtol", "relative tolerance"},
      {"atol", "absolute tolerance"},
      {"gamma0", "embedded weight on f(x0, y0); a number, p/q or hairer"},
      {"mode", "adaptive or fixed"},
      {"fixed_h", "step size in fixed mode (implies --mode fixed)"},
      {"h0", "initial step (default span/100)"},
      {"interval", "x0:x_end, overrides the problem's interval"},
      {"solver", "lu, bicgstab or gmres"},
      {"s_bits", "precision S of the inner solves; 53 uses double"},
      {"precond", "none or blocklu"},
      {"restart", "GMRES restart length"},
      {"inner_tol", "relative residual target of each Krylov solve"},
      {"refine_max_iter", "refinement iteration cap"},
      {"newton", "simplified or quasi"},
      {"newton_tol", "relative stage increment threshold"},
      {"max_newton", "Newton iteration cap"},
      {"seed", "seed for linearN"},
      {"max_steps", "step cap (accepted + rejected)"},
      {"propagate_embedded", "advance with the embedded solution"},
      {"positive_exponent_controller", "step update with err^(+1/(m+1))"},
      {"constant_sink_brusselator", "Brusselator reaction 1 + u^2 v - 4"}};
  std::vector<std::pair<std::string, CLI::Option*>> flag_opts;
  for (const auto& [key, value] : defaults) {
    std::string text = help.count(key) ? help.at(key) : "";
    if (!value.empty() && value != "false") text += " [" + value + "]";
    std::string flag = "--" + key;
    for (auto& ch : flag)
      if (ch == '_') ch = '-';
    if (key == "stages") flag = "-m," + flag;
    if (key == "propagate_embedded" || key == "positive_exponent_controller" || key == "constant_sink_brusselator") {
      flag_opts.emplace_back(key, solve->add_flag(flag, flag_values[key], text));
    } else {
      flag_opts.emplace_back(key, solve->add_option(flag, flag_values[key], text));
    }
  }

  int tab_m = 3, tab_bits = 0;
  std::string tab_family = "gauss", tab_gamma0 = "1/8";
  auto* tableau = app.add_subcommand("tableau", "print a tableau, embedded weights and residuals as JSON");
  tableau->add_option("-m,--stages", tab_m, "stage count");
  tableau->add_option("--family", tab_family, "gauss or radau2a");
  tableau->add_option("--bits", tab_bits, "precision in bits");
  tableau->add_option("--gamma0", tab_gamma0, "embedded weight on f(x, y): ratio, decimal, or 'hairer'");

  int st_m = 3, st_bits = 0, nx = 101, ny = 101;
  std::string st_family = "gauss", st_gamma0, re_range = "-6:0", im_range = "-6:6", st_output;
  auto* stability = app.add_subcommand("stability", "sample |R(z)| on a grid, CSV re,im,abs_R");
  stability->add_option("-m,--stages", st_m, "stage count");
  stability->add_option("--family", st_family, "gauss or radau2a");
  stability->add_option("--bits", st_bits, "precision in bits");
  stability->add_option("--gamma0", st_gamma0, "sample the embedded formula with this gamma0");
  stability->add_option("--re", re_range, "real range lo:hi");
  stability->add_option("--im", im_range, "imaginary range lo:hi");
  stability->add_option("--nx", nx, "samples along Re z");
  stability->add_option("--ny", ny, "samples along Im z");
  stability->add_option("-o,--output", st_output, "CSV path (default stdout)");

  std::string suite = "linear", bench_stages = "3:12", bench_output;
  int bench_bits = 0, bench_n = 128, bench_seed = 1;
  auto* bench = app.add_subcommand("bench", "compare inner solvers on the linear benchmark");
  bench->add_option("--suite", suite, "benchmark suite (linear)");
  bench->add_option("--stages", bench_stages, "m or lo:hi within 3..12");
  bench->add_option("--bits", bench_bits, "precision in bits");
  bench->add_option("--n", bench_n, "dimension");
  bench->add_option("--seed", bench_seed, "random seed");
  bench->add_option("-o,--output", bench_output, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve) {
      ConfigMap cfg = defaults;
      if (!config_path.empty()) load_config_file(config_path, cfg);
      for (const auto& [key, opt] : flag_opts) {
        if (opt->count() == 0) continue;
        cfg[key] = flag_values[key];
        if (opt->get_expected_min() == 0) cfg[key] = "true";
      }
      if (flag_opts.size() && cfg["mode"] == "adaptive" && !cfg["fixed_h"].empty()) {
        for (const auto& [key, opt] : flag_opts)
          if (key == "fixed_h" && opt->count() > 0) cfg["mode"] = "fixed";
      }
      return cmd_solve(cfg, report_path, history_path);
    }
    const int bits = default_bits();
    if (*tableau) return cmd_tableau(tab_m, tab_family, tab_bits ? tab_bits : bits, tab_gamma0);
    if (*stability)
      return cmd_stability(st_m, st_family, st_bits ? st_bits : bits, st_gamma0, re_range, im_range, nx, ny,
                           st_output);
    if (*bench) return cmd_bench(suite, bench_stages, bench_bits ? bench_bits : bits, bench_n, bench_seed, bench_output);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
