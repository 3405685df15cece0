// twsolve: command-line front end for the travelling-wave toolbox.
// Subcommands: portrait, homoclinic, series, verify, hamiltonian.
// Exit codes: 0 ok, 2 usage, 3 integration failure, 4 bracketing failure,
// 5 series failure, 6 verification failure.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twsolve/twsolve.hpp"

using json = nlohmann::ordered_json;
using namespace twsolve;

namespace {

constexpr const char* kVersion = version_string;

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    atomic_write(path, content);
}

json meta_block(json flags, json tolerances) {
  json m;
  m["version"] = kVersion;
  m["flags"] = std::move(flags);
  m["tolerances"] = std::move(tolerances);
  return m;
}

unsigned thread_cap() {
  if (const char* env = std::getenv("TWSOLVE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

// Seeds file: one "U W" (or "U,W") pair per line, '#' starts a comment.
std::vector<PhaseState> read_seeds(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw InvalidParams("cannot open seeds file '" + file + "'");
  std::vector<PhaseState> seeds;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream row(line);
    double u, w;
    if (row >> u >> w) seeds.push_back({u, w});
  }
  if (seeds.empty())
    throw InvalidParams("seeds file '" + file + "' contains no seeds");
  return seeds;
}

std::pair<double, double> parse_bracket(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == s.size())
    throw InvalidParams("bracket must be 'lo:hi', got '" + s + "'");
  try {
    std::size_t used = 0;
    const double lo = std::stod(s.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument(s);
    const std::string hi_s = s.substr(colon + 1);
    const double hi = std::stod(hi_s, &used);
    if (used != hi_s.size()) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw InvalidParams("bracket must be 'lo:hi', got '" + s + "'");
  }
}

// ---------------------------------------------------------------- portrait --

struct PortraitArgs {
  double A = 1.0;
  double mu = 0.0;
  double t_budget = 200.0;
  std::string seeds_file;
  std::string out;
};

int run_portrait(const PortraitArgs& a) {
  const std::vector<PhaseState> seeds = a.seeds_file.empty()
                                            ? default_portrait_seeds(a.A, a.mu)
                                            : read_seeds(a.seeds_file);
  const auto trajectories = portrait(a.A, a.mu, seeds, a.t_budget);
  emit(a.out, trajectories_csv(trajectories));
  return 0;
}

// -------------------------------------------------------------- homoclinic --

struct HomoclinicArgs {
  double A = 1.0;
  std::string bracket = "-0.9:-0.8";
  double mu_tol = 1e-6;
  std::string out;
};

int run_homoclinic(const HomoclinicArgs& a) {
  const auto [lo, hi] = parse_bracket(a.bracket);
  const HomoclinicResult hr = find_homoclinic(a.A, lo, hi, a.mu_tol);
  json j;
  j["A"] = hr.A;
  j["mu_star"] = hr.mu_star;
  j["x_star"] = hr.x_star;
  j["alpha"] = hr.alpha;
  j["beta"] = hr.beta;
  j["alpha_times_beta"] = hr.alpha * hr.beta;
  j["iterations"] = hr.iterations;
  j["meta"] = meta_block(
      json{{"A", a.A}, {"bracket", a.bracket}, {"tol", a.mu_tol}},
      json{{"mu_tol", hr.mu_tol}, {"mismatch_tol", hr.mismatch_tol}});
  emit(a.out, j.dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------------ series --

struct SeriesArgs {
  double A = 1.0;
  double mu = -0.836;
  double xstar = 1.426095;
  int Nl = 40;
  int Nu = 20;
  bool compare = false;
  std::string out;  // CSV profile path; JSON always goes to stdout
};

int run_series(const SeriesArgs& a) {
  const UpperBranch ub = upper_branch_coeffs(a.A, a.mu, a.xstar, a.Nu);
  const LowerBranch lb = lower_branch(a.A, a.mu, a.xstar, a.Nl);
  const ExpSeriesApproximant s = sew(ub, lb);

  json j;
  j["A"] = a.A;
  j["mu"] = a.mu;
  j["x_star"] = a.xstar;
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  j["N_lower"] = a.Nl;
  j["N_upper"] = a.Nu;
  j["b1"] = lb.b1;
  j["a"] = s.a;
  j["b"] = s.b;
  j["derivative_jump"] = s.derivative_jump();
  j["upper_residual"] = ub.residual;
  j["upper_ill_conditioned"] = ub.ill_conditioned;

  Trajectory ref_up, ref_lo;
  if (a.compare) {
    IntegratorOptions opt;
    opt.abs_tol = 1e-12;
    opt.rel_tol = 1e-12;
    const double A = a.A, mu = a.mu;
    auto field = [A, mu](double, const PhaseState& st) {
      return vector_field(st, A, mu);
    };
    const PhaseState apex{a.xstar, 0.0};
    ref_up = integrate_adaptive(field, apex, 0.0, -8.0, opt).trajectory;
    ref_lo = integrate_adaptive(field, apex, 0.0, 8.0, opt).trajectory;
    json errors;
    errors["lower_sup_T_0_6"] =
        branch_error([&](double T) { return s.eval(T); }, ref_lo, 0.0, 6.0);
    errors["upper_sup_T_m6_0"] =
        branch_error([&](double T) { return s.eval(T); }, ref_up, -6.0, 0.0);
    j["errors"] = errors;
  }

  j["meta"] = meta_block(json{{"A", a.A},
                              {"mu", a.mu},
                              {"xstar", a.xstar},
                              {"Nl", a.Nl},
                              {"Nu", a.Nu},
                              {"compare", a.compare}},
                         json{{"reference_tol", a.compare ? 1e-12 : 0.0}});
  std::cout << j.dump(2) << "\n";

  if (!a.out.empty()) {
    std::string csv = a.compare ? "T,U,U_ref\n" : "T,U\n";
    for (int i = -400; i <= 400; ++i) {
      const double T = 0.02 * i;
      csv += format_double(T) + "," + format_double(s.eval(T));
      if (a.compare) {
        const Trajectory& ref = T >= 0.0 ? ref_lo : ref_up;
        csv += "," + format_double(ref.at(T).U);
      }
      csv += "\n";
    }
    atomic_write(a.out, csv);
  }
  return 0;
}

// ------------------------------------------------------------------ verify --

struct VerifyArgs {
  std::string target = "all";
  int draws = 100;
  std::uint64_t seed = 7;
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  std::vector<std::string> ids;
  if (a.target == "all") {
    ids = catalog_ids();
  } else {
    case_info(a.target);  // throws InvalidParams for unknown ids
    ids.push_back(a.target);
  }

  std::vector<VerifyReport> reports(ids.size());
  std::exception_ptr first_error;
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < ids.size();) {
      try {
        reports[i] = verify_case(ids[i], a.draws, a.seed);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const unsigned K = std::min<unsigned>(thread_cap(),
                                        static_cast<unsigned>(ids.size()));
  if (K <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(K);
    for (unsigned t = 0; t < K; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  bool all_pass = true;
  json cases = json::array();
  for (const auto& r : reports) {
    all_pass = all_pass && r.pass;
    cases.push_back(json{{"id", r.id},
                         {"draws", r.draws},
                         {"pass", r.pass},
                         {"max_residual", r.max_residual},
                         {"failures", r.failures},
                         {"pole_reports", r.pole_reports},
                         {"samples_excluded", r.samples_excluded}});
  }
  json j;
  j["cases"] = std::move(cases);
  j["all_pass"] = all_pass;
  j["meta"] = meta_block(
      json{{"case", a.target}, {"draws", a.draws}, {"seed", a.seed}},
      json{{"threshold", 1e-10}, {"samples", 200}, {"lo", -10.0}, {"hi", 10.0}});
  emit(a.out, j.dump(2) + "\n");
  return all_pass ? 0 : 6;
}

// ------------------------------------------------------------- hamiltonian --

struct HamiltonianArgs {
  double delta = 1.0;
  double lambda0 = 2.0, lambda1 = -11.0, lambda2 = 15.0, lambda3 = -6.0;
  std::string out;  // CSV orbits path; JSON always goes to stdout
};

int run_hamiltonian(const HamiltonianArgs& a) {
  const HamiltonianCase c{a.delta,
                          {a.lambda0, a.lambda1, a.lambda2, a.lambda3},
                          0.0};
  const auto eqs = hamiltonian_equilibria(c);

  // Level grid: each center seeded at (u_c + du, 0) for du in {.02,.05,.1};
  // the implied energies are reported in the JSON.
  const std::array<double, 3> offsets{0.02, 0.05, 0.1};
  IntegratorOptions opt;
  opt.abs_tol = 1e-10;
  opt.rel_tol = 1e-10;
  auto field = [&c](double, const PhaseState& s) {
    return hamiltonian_field(s, c);
  };
  std::vector<Trajectory> orbits;
  json orbit_meta = json::array();
  for (const auto& [u, kind] : eqs) {
    if (kind != EqKind::center) continue;
    for (double du : offsets) {
      const PhaseState start{u + du, 0.0};
      orbits.push_back(
          integrate_adaptive(field, start, 0.0, 50.0, opt).trajectory);
      orbit_meta.push_back(json{{"center", u},
                                {"offset", du},
                                {"H", hamiltonian_energy(start, c)}});
    }
  }

  json j;
  json eq_list = json::array();
  for (const auto& [u, kind] : eqs)
    eq_list.push_back(json{{"u", u}, {"kind", to_string(kind)}});
  j["equilibria"] = std::move(eq_list);
  j["orbits"] = std::move(orbit_meta);
  j["meta"] = meta_block(json{{"delta", a.delta},
                              {"lambda0", a.lambda0},
                              {"lambda1", a.lambda1},
                              {"lambda2", a.lambda2},
                              {"lambda3", a.lambda3}},
                         json{{"abs_tol", 1e-10},
                              {"rel_tol", 1e-10},
                              {"t_span", 50.0}});
  std::cout << j.dump(2) << "\n";

  if (!a.out.empty()) atomic_write(a.out, trajectories_csv(orbits));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"travelling-wave phase portraits, homoclinic shooting, "
               "exponential-series approximants and exact-solution checks"};
  app.set_config("--config", "", "key=value config file ([subcommand] "
                                 "sections); flags override");
  app.require_subcommand(1);

  PortraitArgs pa;
  auto* sp = app.add_subcommand("portrait", "phase-portrait CSV");
  sp->add_option("--A", pa.A, "damping scale A");
  sp->add_option("--mu", pa.mu, "bifurcation parameter mu")->required();
  sp->add_option("--t-budget", pa.t_budget, "per-orbit time budget");
  sp->add_option("--seeds-file", pa.seeds_file, "file of 'U W' seed rows");
  sp->add_option("--out", pa.out, "output CSV path (default stdout)");

  HomoclinicArgs ha;
  auto* sh = app.add_subcommand("homoclinic", "locate the homoclinic loop");
  sh->add_option("--A", ha.A, "damping scale A");
  sh->add_option("--bracket", ha.bracket, "mu bracket 'lo:hi'");
  sh->add_option("--tol", ha.mu_tol, "bracket width tolerance on mu");
  sh->add_option("--out", ha.out, "output JSON path (default stdout)");

  SeriesArgs sa;
  auto* ss = app.add_subcommand("series",
                                "two-sided exponential-series approximant");
  ss->add_option("--A", sa.A, "damping scale A");
  ss->add_option("--mu", sa.mu, "bifurcation parameter mu");
  ss->add_option("--xstar", sa.xstar, "loop apex U value");
  ss->add_option("--Nl", sa.Nl, "lower-branch truncation order");
  ss->add_option("--Nu", sa.Nu, "upper-branch truncation order");
  ss->add_flag("--compare", sa.compare,
               "add reference profile and per-branch sup errors");
  ss->add_option("--out", sa.out, "profile CSV path (JSON goes to stdout)");

  VerifyArgs va;
  auto* sv = app.add_subcommand("verify",
                                "verify exact-solution families by residual");
  sv->add_option("case", va.target, "case id or 'all'");
  sv->add_option("--draws", va.draws, "random admissible draws per case");
  sv->add_option("--seed", va.seed, "base RNG seed");
  sv->add_option("--out", va.out, "output JSON path (default stdout)");

  HamiltonianArgs ma;
  auto* sm = app.add_subcommand("hamiltonian",
                                "conservative-case equilibria and level sets");
  sm->add_option("--delta", ma.delta, "delta = tau v^2 - kappa");
  sm->add_option("--lambda0", ma.lambda0, "source coefficient lambda0");
  sm->add_option("--lambda1", ma.lambda1, "source coefficient lambda1");
  sm->add_option("--lambda2", ma.lambda2, "source coefficient lambda2");
  sm->add_option("--lambda3", ma.lambda3, "source coefficient lambda3");
  sm->add_option("--out", ma.out, "orbit CSV path (JSON goes to stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sp->parsed()) return run_portrait(pa);
    if (sh->parsed()) return run_homoclinic(ha);
    if (ss->parsed()) return run_series(sa);
    if (sv->parsed()) return run_verify(va);
    if (sm->parsed()) return run_hamiltonian(ma);
  } catch (const NoSignChange& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 4;
  } catch (const ResonantIndex& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 5;
  } catch (const CalibrationFailed& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 5;
  } catch (const InvalidParams& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 2;
  } catch (const NonHyperbolicFrame& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 2;
  } catch (const ConstraintViolation& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 2;
  } catch (const NoRealRoots& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "twsolve: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
