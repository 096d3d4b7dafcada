#include "nfnls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "nfnls/certify.hpp"

namespace nfnls {

double kinetic_number(const Grid& g, double dt) {
  const double xi = std::max(std::abs(g.xi(g.j_min())), std::abs(g.xi(g.j_max() - 1)));
  return dt * xi * xi;
}

namespace {

void nonlinear_rotation(Spectrum& S, double dt, int sign) {
  Field f = inverse(S);
  for (auto& z : f.samples) z *= std::polar(1.0, sign * std::norm(z) * dt);
  S = forward(f);
}

}  // namespace

Trajectory split_step_solve(const Field& u0, double dt, int steps, int sign, int record_every) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("split_step_solve: dt must be positive");
  if (steps < 0) throw ConfigError("split_step_solve: steps must be >= 0");
  if (sign != 1 && sign != -1) throw ConfigError("split_step_solve: sign must be +1 or -1");
  if (record_every < 0) throw ConfigError("split_step_solve: record_every must be >= 0");
  Spectrum S = forward(u0);
  const double n0 = S.l2_norm();
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.states.push_back(make_state(S, 0.0));
  for (int k = 1; k <= steps; ++k) {
    free_propagate_inplace(S, 0.5 * dt, Semigroup::minus);
    nonlinear_rotation(S, dt, sign);
    free_propagate_inplace(S, 0.5 * dt, Semigroup::minus);
    if (n0 > 0.0) {
      const double drift = std::abs(S.l2_norm() - n0) / n0;
      if (!(drift <= 1e-4))
        throw NumericalError("split_step_solve: norm drift " + std::to_string(drift) + " at step " +
                             std::to_string(k));
    }
    const bool keep = k == steps || (record_every > 0 && k % record_every == 0);
    if (keep) {
      tr.times.push_back(k * dt);
      tr.states.push_back(make_state(S, k * dt));
    }
  }
  return tr;
}

Spectrum embed(const Spectrum& S, const Grid& g) {
  if (g.B != S.grid.B || g.n_max < S.grid.n_max) throw ConfigError("embed: target grid must contain the source");
  Spectrum out = zero_spectrum(g);
  for (int j = S.grid.j_min(); j < S.grid.j_max(); ++j) out.at(j) = S.at(j);
  return out;
}

Spectrum restrict_to(const Spectrum& S, const Grid& g) {
  if (g.B != S.grid.B || g.n_max > S.grid.n_max) throw ConfigError("restrict_to: target grid must be contained");
  Spectrum out = zero_spectrum(g);
  for (int j = g.j_min(); j < g.j_max(); ++j) out.at(j) = S.at(j);
  return out;
}

Spectrum reference_solution(const Field& u0, double T, int K, int sign) {
  if (K < 1) throw ConfigError("reference_solution: K must be >= 1");
  const Grid& g = u0.grid;
  const Grid fine = make_grid(g.B, 4 * g.n_max);
  const Field f0 = inverse(embed(forward(u0), fine));
  if (T == 0.0) return forward(u0);
  const int steps = 16 * K;
  Trajectory tr = split_step_solve(f0, T / steps, steps, sign);
  return restrict_to(tr.states.back().v, g);
}

double relative_l2(const Spectrum& a, const Spectrum& ref) {
  if (a.grid != ref.grid) throw ConfigError("relative_l2: grids differ");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.coeffs.size(); ++i) {
    num += std::norm(a.coeffs[i] - ref.coeffs[i]);
    den += std::norm(ref.coeffs[i]);
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

std::vector<ComparisonRow> compare_with_reference(const Field& u0, const SolverParams& p, const std::vector<int>& Js) {
  const Spectrum ref = reference_solution(u0, p.T, p.K, p.sigma);
  std::vector<ComparisonRow> rows;
  for (int J : Js) {
    SolverParams pj = p;
    pj.J = J;
    pj.J_max = std::max(pj.J_max, J);
    SolveResult r = solve(u0, pj);
    ComparisonRow row;
    row.J = J;
    row.error = relative_l2(r.u.states.back().v, ref);
    row.iterations = r.iterations;
    row.differences = r.differences;
    row.ratios = r.ratios;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::verify_lemmas: return "verify_lemmas";
    case ExperimentKind::converge: return "converge";
    case ExperimentKind::solve: return "solve";
    case ExperimentKind::compare: return "compare";
    case ExperimentKind::trees: return "trees";
    case ExperimentKind::norms: return "norms";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::verify_lemmas, ExperimentKind::converge, ExperimentKind::solve,
                 ExperimentKind::compare, ExperimentKind::trees, ExperimentKind::norms})
    if (kind_name(k) == s) return k;
  throw ConfigError("unknown experiment kind: " + s);
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
}

int to_small_int(const std::string& key, const std::string& v) {
  long long x = to_int(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError("config: " + key + " out of range");
  return static_cast<int>(x);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

const char* kDataKeys[] = {"profile", "amplitude", "width", "boxes", "tones"};

void validate_config(const ExperimentConfig& c) {
  make_grid(c.B, c.n_max);
  const SolverParams& p = c.solver;
  if (p.J < 1 || p.J > kKernelJMax) throw ConfigError("config: solver.J must lie in [1, 3]");
  if (!(p.q >= 1.0 && p.q <= 2.0)) throw ConfigError("config: solver.q must lie in [1, 2]");
  if (!c.N_auto && !(p.N > 0.0)) throw ConfigError("config: solver.N must be positive");
  if (!c.T_auto && !(p.T >= 0.0)) throw ConfigError("config: solver.T must be nonnegative");
  if (!(p.R >= 1.0)) throw ConfigError("config: solver.R must be >= 1");
  if (p.K < 1) throw ConfigError("config: solver.K must be >= 1");
  if (p.picard_max_iter < 1) throw ConfigError("config: solver.picard_max_iter must be >= 1");
  if (!(p.picard_tol > 0.0)) throw ConfigError("config: solver.picard_tol must be positive");
  if (!(p.prune_tol >= 0.0)) throw ConfigError("config: solver.prune_tol must be >= 0");
  if (!c.C_auto && !(p.C > 0.0)) throw ConfigError("config: solver.C must be positive");
  if (!(p.eps > 0.0)) throw ConfigError("config: solver.eps must be positive");
  if (c.trees_J < 1 || c.trees_J > 8) throw ConfigError("config: trees.J must lie in [1, 8]");
  auto it = c.data.find("profile");
  if (it != c.data.end() && it->second != "gaussian" && it->second != "random" && it->second != "tones")
    throw ConfigError("config: data.profile must be gaussian, random or tones");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  c.solver.J = 2;
  c.solver.J_max = kKernelJMax;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Setter> setters = {
      {"grid.B", [&](auto& k, auto& v) { c.B = to_small_int(k, v); }},
      {"grid.n_max", [&](auto& k, auto& v) { c.n_max = to_small_int(k, v); }},
      {"solver.J", [&](auto& k, auto& v) { c.solver.J = to_small_int(k, v); }},
      {"solver.N",
       [&](auto& k, auto& v) {
         c.N_auto = v == "auto";
         if (!c.N_auto) c.solver.N = to_double(k, v);
       }},
      {"solver.T",
       [&](auto& k, auto& v) {
         c.T_auto = v == "auto";
         if (!c.T_auto) c.solver.T = to_double(k, v);
       }},
      {"solver.q", [&](auto& k, auto& v) { c.solver.q = to_double(k, v); }},
      {"solver.s", [&](auto& k, auto& v) { c.solver.s = to_double(k, v); }},
      {"solver.R", [&](auto& k, auto& v) { c.solver.R = to_double(k, v); }},
      {"solver.K", [&](auto& k, auto& v) { c.solver.K = to_small_int(k, v); }},
      {"solver.picard_tol", [&](auto& k, auto& v) { c.solver.picard_tol = to_double(k, v); }},
      {"solver.picard_max_iter", [&](auto& k, auto& v) { c.solver.picard_max_iter = to_small_int(k, v); }},
      {"solver.sign",
       [&](auto& k, auto& v) {
         int s = to_small_int(k, v);
         if (s != 1 && s != -1) throw ConfigError("config: solver.sign must be +1 or -1");
         c.solver.sigma = s;
       }},
      {"solver.rule",
       [&](auto&, auto& v) {
         if (v == "tuple") c.solver.rule = PhaseRule::tuple;
         else if (v == "factorized") c.solver.rule = PhaseRule::factorized;
         else throw ConfigError("config: solver.rule must be tuple or factorized");
       }},
      {"solver.prune_tol", [&](auto& k, auto& v) { c.solver.prune_tol = to_double(k, v); }},
      {"solver.C",
       [&](auto& k, auto& v) {
         c.C_auto = v == "auto";
         if (!c.C_auto) c.solver.C = to_double(k, v);
       }},
      {"solver.eps", [&](auto& k, auto& v) { c.solver.eps = to_double(k, v); }},
      {"experiment.kind", [&](auto&, auto& v) { c.kind = parse_kind(v); }},
      {"experiment.seed",
       [&](auto& k, auto& v) {
         long long s = to_int(k, v);
         if (s < 0) throw ConfigError("config: experiment.seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"output.path", [&](auto&, auto& v) { c.output_path = v; }},
      {"trees.J", [&](auto& k, auto& v) { c.trees_J = to_small_int(k, v); }},
  };
  for (const char* d : kDataKeys) {
    std::string key = std::string("data.") + d;
    setters[key] = [&c, d](auto&, auto& v) { c.data[d] = v; };
  }

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = unquote(trim(line.substr(eq + 1)));
    if (!section.empty()) key = section + "." + key;
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second(key, value);
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::map<std::string, std::string> config_echo(const ExperimentConfig& c) {
  std::map<std::string, std::string> m;
  m["grid.B"] = std::to_string(c.B);
  m["grid.n_max"] = std::to_string(c.n_max);
  m["solver.J"] = std::to_string(c.solver.J);
  m["solver.N"] = c.N_auto ? "auto" : fmt(c.solver.N);
  m["solver.T"] = c.T_auto ? "auto" : fmt(c.solver.T);
  m["solver.q"] = fmt(c.solver.q);
  m["solver.s"] = fmt(c.solver.s);
  m["solver.R"] = fmt(c.solver.R);
  m["solver.K"] = std::to_string(c.solver.K);
  m["solver.picard_tol"] = fmt(c.solver.picard_tol);
  m["solver.picard_max_iter"] = std::to_string(c.solver.picard_max_iter);
  m["solver.sign"] = std::to_string(c.solver.sigma);
  m["solver.rule"] = c.solver.rule == PhaseRule::tuple ? "tuple" : "factorized";
  m["solver.prune_tol"] = fmt(c.solver.prune_tol);
  m["solver.C"] = c.C_auto ? "auto" : fmt(c.solver.C);
  m["solver.eps"] = fmt(c.solver.eps);
  m["experiment.kind"] = kind_name(c.kind);
  m["experiment.seed"] = std::to_string(c.seed);
  m["output.path"] = c.output_path;
  m["trees.J"] = std::to_string(c.trees_J);
  for (const auto& [k, v] : c.data) m["data." + k] = v;
  return m;
}

namespace {

std::string data_value(const ExperimentConfig& c, const std::string& key, const std::string& dflt) {
  auto it = c.data.find(key);
  return it == c.data.end() ? dflt : it->second;
}

double data_number(const ExperimentConfig& c, const std::string& key, double dflt) {
  auto it = c.data.find(key);
  return it == c.data.end() ? dflt : to_double("data." + key, it->second);
}

}  // namespace

Field initial_datum(const ExperimentConfig& cfg) {
  const Grid g = make_grid(cfg.B, cfg.n_max);
  const std::string profile = data_value(cfg, "profile", "gaussian");
  const double amp = data_number(cfg, "amplitude", 0.01);
  if (!(amp >= 0.0)) throw ConfigError("config: data.amplitude must be >= 0");
  if (profile == "gaussian") {
    const double w = data_number(cfg, "width", 1.0);
    if (!(w > 0.0)) throw ConfigError("config: data.width must be positive");
    Field f = zero_field(g);
    for (int m = 0; m < g.M; ++m) {
      double x = g.x(m);
      if (x >= 0.5 * g.L) x -= g.L;
      f.samples[m] = amp * std::exp(-(x / w) * (x / w));
    }
    return f;
  }
  Spectrum S = zero_spectrum(g);
  if (profile == "random") {
    const int boxes = static_cast<int>(data_number(cfg, "boxes", 4));
    if (boxes < 1 || boxes > g.n_max) throw ConfigError("config: data.boxes must lie in [1, n_max]");
    std::mt19937_64 rng(cfg.seed);
    for (int n = -boxes; n < boxes; ++n) add_band(S, random_band(g, n, rng));
  } else {
    const std::string list = data_value(cfg, "tones", "0");
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const int k = to_small_int("data.tones", trim(item));
      if (k < g.box_min() || k > g.box_max()) throw ConfigError("config: data.tones entry outside the grid");
      S.at(k * g.B) += 1.0;
    }
  }
  const double norm = modulation_norm(S, cfg.solver.s, cfg.solver.q);
  if (norm > 0.0)
    for (auto& z : S.coeffs) z *= amp / norm;
  return inverse(S);
}

SolverParams resolve_params(const ExperimentConfig& cfg, double C) {
  SolverParams p = cfg.solver;
  p.C = C;
  p.J_max = std::max(p.J_max, p.J);
  if (cfg.N_auto || cfg.T_auto) {
    SolverParams a = choose_parameters(p.R, p.q, C, p.eps);
    p.R_tilde = a.R_tilde;
    p.argg5_satisfied = a.argg5_satisfied;
    if (cfg.N_auto) p.N = a.N;
    if (cfg.T_auto) p.T = cfg.N_auto ? a.T : 0.1 * (1.0 - 1e-6) / (C * time_bracket(p.N, p.R_tilde, p.q, p.eps));
  }
  validate(p);
  return p;
}

namespace {

CheckRecord make_check(const std::string& name, double measured, double bound, bool pass, const std::string& anchor,
                       const std::string& detail = "") {
  return CheckRecord{name, measured, bound, pass, anchor, detail};
}

// runs one sub-check; exceptions other than configuration errors become a failed record
void guarded(RunReport& r, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r.checks.push_back(make_check(name, std::numeric_limits<double>::quiet_NaN(), 0.0, false, "", e.what()));
  }
}

double empirical_C(const ExperimentConfig& cfg, RunReport& r) {
  if (!cfg.C_auto) return cfg.solver.C;
  EmpiricalConstants k;
  check_fir(cfg.seed, k);
  k.C_R = measure_C_R(cfg.seed);
  r.constants["C_fir"] = k.C_fir;
  r.constants["C_Q1"] = k.C_Q1;
  r.constants["C_R"] = k.C_R;
  r.constants["C"] = k.C();
  return k.C();
}

void put_params(RunReport& r, const SolverParams& p) {
  r.constants["N"] = p.N;
  r.constants["T"] = p.T;
  r.constants["R_tilde"] = p.R_tilde;
  r.constants["C_used"] = p.C;
}

void run_trees(const ExperimentConfig& cfg, RunReport& r) {
  Table t{"trees", {"J", "count", "expected", "max_nodes", "max_terminals"}, {}};
  for (int J = 1; J <= cfg.trees_J; ++J) {
    guarded(r, "tree count J=" + std::to_string(J), [&] {
      auto ts = enumerate_trees(J, std::max(kDefaultJMax, cfg.trees_J));
      const i64 expect = double_factorial_odd(J);
      int bad = 0, max_nodes = 0, max_term = 0;
      for (const auto& tr : ts) {
        const int nodes = tr.size(), term = static_cast<int>(tr.terminals().size());
        if (nodes != 3 * J + 1 || term != 2 * J + 1) ++bad;
        max_nodes = std::max(max_nodes, nodes);
        max_term = std::max(max_term, term);
      }
      t.rows.push_back({double(J), double(ts.size()), double(expect), double(max_nodes), double(max_term)});
      const bool ok = static_cast<i64>(ts.size()) == expect && bad == 0;
      r.checks.push_back(make_check("tree count J=" + std::to_string(J), double(ts.size()), double(expect), ok,
                                    "ordered trees", bad ? std::to_string(bad) + " trees with wrong size" : ""));
    });
  }
  r.tables.push_back(std::move(t));
}

void run_norms(const ExperimentConfig& cfg, RunReport& r) {
  const Field f = initial_datum(cfg);
  const Spectrum F = forward(f);
  const double s = cfg.solver.s;
  const double inf = std::numeric_limits<double>::infinity();
  const double m1 = modulation_norm(F, s, 1.0), m15 = modulation_norm(F, s, 1.5), m2 = modulation_norm(F, s, 2.0);
  const double minf = modulation_norm(F, s, inf), mq = modulation_norm(F, s, cfg.solver.q);
  r.tables.push_back(Table{"norms", {"L2", "M2_1", "M2_1.5", "M2_2", "M2_inf"}, {{f.l2_norm(), m1, m15, m2, minf}}});
  r.checks.push_back(make_check("embedding M2inf <= M2q", minf, mq, minf <= mq, "modulation embedding"));
  r.checks.push_back(make_check("embedding M2q <= M21", mq, m1, mq <= m1, "modulation embedding"));
  guarded(r, "propagator invariance", [&] {
    double drift = 0.0;
    for (double t : {0.1, 1.0, 10.0}) {
      Spectrum G = free_propagate(F, t);
      const double l2 = F.l2_norm();
      if (l2 > 0.0) drift = std::max(drift, std::abs(G.l2_norm() - l2) / l2);
      if (mq > 0.0) drift = std::max(drift, std::abs(modulation_norm(G, s, cfg.solver.q) - mq) / mq);
    }
    r.checks.push_back(make_check("propagator invariance", drift, 1e-10, drift <= 1e-10, "Schrodinger group"));
  });
}

void run_converge(const ExperimentConfig& cfg, RunReport& r) {
  const Field f = initial_datum(cfg);
  const double T = cfg.T_auto ? 1.0 : cfg.solver.T;
  if (!(T > 0.0)) throw ConfigError("converge: solver.T must be positive");
  const std::vector<int> steps = {32, 64, 128, 256, 512};
  std::vector<Spectrum> end;
  guarded(r, "split-step self-convergence", [&] {
    for (int n : steps) end.push_back(split_step_solve(f, T / n, n, cfg.solver.sigma).states.back().v);
    // Richardson extrapolant from the two finest runs
    Spectrum rich = end.back();
    const Spectrum& c = end[end.size() - 2];
    for (size_t i = 0; i < rich.coeffs.size(); ++i) rich.coeffs[i] += (rich.coeffs[i] - c.coeffs[i]) / 3.0;
    Table t{"split_step_convergence", {"steps", "dt", "error", "ratio"}, {}};
    double worst = 0.0;
    double prev = 0.0;
    for (size_t k = 0; k + 1 < end.size(); ++k) {
      const double e = relative_l2(end[k], rich);
      const double ratio = k == 0 ? 0.0 : prev / e;
      if (k > 0) worst = std::max(worst, std::max(ratio / 4.0, 4.0 / ratio));
      t.rows.push_back({double(steps[k]), T / steps[k], e, ratio});
      prev = e;
    }
    r.tables.push_back(std::move(t));
    r.checks.push_back(make_check("second-order halving ratio", worst, 1.5, worst <= 1.5, "Strang splitting",
                                  "max factor between observed halving ratio and 4"));
  });
}

void run_solve(const ExperimentConfig& cfg, RunReport& r) {
  const double C = empirical_C(cfg, r);
  const SolverParams p = resolve_params(cfg, C);
  put_params(r, p);
  const Field f = initial_datum(cfg);
  guarded(r, "picard", [&] {
    SolveResult res = solve(f, p);
    Table t{"picard", {"iteration", "difference", "ratio"}, {}};
    for (size_t k = 0; k < res.differences.size(); ++k)
      t.rows.push_back({double(k + 1), res.differences[k], k == 0 ? 0.0 : res.ratios[k - 1]});
    r.tables.push_back(std::move(t));
    const double last = res.differences.back();
    r.checks.push_back(make_check("picard converged", last, p.picard_tol, last < p.picard_tol, "Picard iteration"));
    double worst = 0.0;
    for (double q : res.ratios) worst = std::max(worst, q);
    r.checks.push_back(make_check("contraction ratio", worst, 0.5, worst <= 0.5, "Picard iteration"));
    const Spectrum& uT = res.u.states.back().v;
    r.constants["final_l2"] = uT.l2_norm();
  });
}

void run_compare(const ExperimentConfig& cfg, RunReport& r) {
  const double C = empirical_C(cfg, r);
  const SolverParams p = resolve_params(cfg, C);
  put_params(r, p);
  const Field f = initial_datum(cfg);
  guarded(r, "oracle agreement", [&] {
    auto rows = compare_with_reference(f, p, {1, 2, 3});
    Table t{"compare", {"J", "relative_l2", "iterations"}, {}};
    double atJ = 0.0;
    bool monotone = true;
    for (size_t k = 0; k < rows.size(); ++k) {
      t.rows.push_back({double(rows[k].J), rows[k].error, double(rows[k].iterations)});
      if (rows[k].J == p.J) atJ = rows[k].error;
      if (k > 0 && rows[k].error > rows[k - 1].error) monotone = false;
    }
    r.tables.push_back(std::move(t));
    r.checks.push_back(make_check("oracle agreement J=" + std::to_string(p.J), atJ, 1e-3, atJ <= 1e-3,
                                  "split-step oracle"));
    r.checks.push_back(make_check("error non-increasing in J", monotone ? 0.0 : 1.0, 0.0, monotone,
                                  "split-step oracle"));
  });
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  switch (cfg.kind) {
    case ExperimentKind::verify_lemmas: r = acceptance_suite(cfg.seed); break;
    case ExperimentKind::trees: run_trees(cfg, r); break;
    case ExperimentKind::norms: run_norms(cfg, r); break;
    case ExperimentKind::converge: run_converge(cfg, r); break;
    case ExperimentKind::solve: run_solve(cfg, r); break;
    case ExperimentKind::compare: run_compare(cfg, r); break;
  }
  r.kind = kind_name(cfg.kind);
  r.config = config_echo(cfg);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!cfg.output_path.empty()) write_report(r, cfg.output_path);
  return r;
}

}  // namespace nfnls
