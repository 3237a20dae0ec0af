// dfx: command-line laboratory for Diederich-Fornaess exponents of worm
// domains. Subcommands: worm-index, sweep, criterion, psh, riccati, validate.
//
// Output contract: one JSON object per run on standard output; grid data as
// CSV (header row, LF, '.' decimal point, 17 significant digits). When --out
// is given the CSV goes to that file and the summary JSON to stdout;
// otherwise the CSV itself is the stdout payload and the summary goes to
// stderr. Exit codes: 0 success/feasible, 1 mathematical failure or
// infeasibility, 2 usage/config errors. DFX_LOG in {error, info, debug}
// controls diagnostics on stderr.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dfx/dfx.hpp"

using nlohmann::json;
using namespace dfx;

namespace {

int log_level() {
  const char* e = std::getenv("DFX_LOG");
  if (!e) return 0;
  std::string s(e);
  if (s == "debug") return 2;
  if (s == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "[dfx] %s\n", msg.c_str());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// CSV writer: fixed headers, LF line endings, 17 significant digits.
struct Csv {
  std::ostringstream body;
  Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i)
      body << (i ? "," : "") << header[i];
    body << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      body << (i ? "," : "") << fmt(vals[i]);
    body << "\n";
  }
};

// Emits CSV (to --out or stdout) and the summary JSON (to stdout or stderr).
void emit_csv_and_summary(const Csv& csv, const json& summary,
                          const std::string& out_path) {
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + out_path);
    f << csv.body.str();
    std::cout << summary.dump() << "\n";
  } else {
    std::cout << csv.body.str();
    std::fprintf(stderr, "%s\n", summary.dump().c_str());
  }
}

void emit_json(const json& report, const std::string& out_path) {
  std::cout << report.dump() << "\n";
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + out_path);
    f << report.dump(2) << "\n";
  }
}

std::pair<int, int> parse_grid(const std::string& s, int def_r, int def_phi) {
  if (s.empty()) return {def_r, def_phi};
  auto x = s.find('x');
  if (x == std::string::npos) {
    int n = std::stoi(s);
    return {n, def_phi};
  }
  return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

std::vector<double> parse_depths(const std::string& s) {
  if (s.empty()) return defaults::psh_depths();
  std::vector<double> d;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) d.push_back(std::stod(tok));
  return d;
}

// --config support: a JSON file whose keys mirror the long flags. Values from
// the file are appended as synthesized flags unless the flag already appears
// on the command line (flags override the file).
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config file " + path);
  json cfg = json::parse(f);
  for (auto& [key, val] : cfg.items()) {
    bool present = false;
    for (const std::string& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) present = true;
    if (present) continue;
    std::string sval = val.is_string() ? val.get<std::string>() : val.dump();
    args.push_back("--" + key + "=" + sval);
  }
  return args;
}

json point_json(const CPoint& p) {
  json j = json::array();
  for (const Cx& z : p.coords) j.push_back({z.real(), z.imag()});
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_worm_index(double beta, double tol, const std::string& out) {
  double am = max_alpha(beta, tol / 2);
  double index = eta_from_alpha(am);
  double predicted = kPi / (2 * beta);
  json rep = {{"command", "worm-index"},
              {"beta", beta},
              {"alpha_max", am},
              {"index", index},
              {"predicted", predicted},
              {"abs_err", std::abs(index - predicted)},
              {"tol", tol}};
  emit_json(rep, out);
  return 0;
}

int cmd_sweep(double beta_min, double beta_max, int steps, double tol,
              const std::string& out) {
  if (steps < 1 || !(beta_min > kPi / 2) || !(beta_max >= beta_min))
    throw CLI::ValidationError("sweep", "need beta_max >= beta_min > pi/2 and steps >= 1");
  Csv csv({"beta", "alpha_max", "index_computed", "index_predicted", "abs_err"});
  double max_err = 0;
  for (int i = 0; i < steps; ++i) {
    double beta = (steps == 1)
                      ? beta_min
                      : beta_min + (beta_max - beta_min) * i / (steps - 1);
    // Tight bisection so the per-row error stays below tol for every beta.
    double bis = std::min(tol / 2, tol / (2 * beta - kPi));
    double am = max_alpha(beta, bis);
    double index = eta_from_alpha(am);
    double predicted = kPi / (2 * beta);
    double err = std::abs(index - predicted);
    max_err = std::max(max_err, err);
    csv.row({beta, am, index, predicted, err});
    log_info("sweep beta=" + fmt(beta) + " index=" + fmt(index));
  }
  json summary = {{"command", "sweep"}, {"rows", steps},
                  {"max_abs_err", max_err}, {"tol", tol}};
  emit_csv_and_summary(csv, summary, out);
  return max_err <= tol ? 0 : 1;
}

int cmd_criterion(double beta, double alpha, double eta, double theta,
                  const std::string& grid, const std::string& out) {
  WormParams params = WormParams::make(beta);
  auto [nr, nphi] = parse_grid(grid, 256, 16);
  Weight psi = build_psi_radial(alpha, theta, beta);  // may throw InfeasibleError
  double alpha_eval = (eta > 0) ? alpha_from_eta(eta) : alpha;
  WormCriterionReport rep = criterion_sweep_worm(params, psi, alpha_eval, nr, nphi);
  Csv csv({"r", "phi", "value"});
  for (const WormCriterionRow& row : rep.rows) csv.row({row.r, row.phi, row.value});
  json summary = {{"command", "criterion"},
                  {"beta", beta},
                  {"alpha_psi", alpha},
                  {"alpha_eval", alpha_eval},
                  {"theta", theta},
                  {"grid", std::to_string(nr) + "x" + std::to_string(nphi)},
                  {"max_value", rep.max_value},
                  {"argmax_r", rep.argmax_r},
                  {"argmax_phi", rep.argmax_phi},
                  {"margin", -rep.max_value},
                  {"feasible", rep.feasible()}};
  emit_csv_and_summary(csv, summary, out);
  return rep.feasible() ? 0 : 1;
}

int cmd_riccati(double a, double b, double theta, double t0, double t1,
                double step, double s0, bool s0_given, const std::string& out) {
  RiccatiParams params = RiccatiParams::make(a, b, theta);
  if (!s0_given) s0 = closed_form(params, t0);
  RiccatiSolution sol = integrate(params, s0, t0, t1, step);
  Csv csv({"t", "s_closed", "s_numeric", "abs_err"});
  double max_err = 0;
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    double sc = closed_form(params, sol.t[i]);
    double err = std::abs(sc - sol.s[i]);
    max_err = std::max(max_err, err);
    csv.row({sol.t[i], sc, sol.s[i], err});
  }
  json summary = {{"command", "riccati"},
                  {"a", a},
                  {"b", b},
                  {"theta", theta},
                  {"samples", sol.t.size()},
                  {"max_abs_err", max_err},
                  {"blew_up", sol.blew_up}};
  if (sol.blew_up) summary["blow_up_t"] = sol.blow_up_t;
  emit_csv_and_summary(csv, summary, out);
  return sol.blew_up ? 1 : 0;
}

int cmd_psh(double beta, double eta, double alpha_psi, double theta,
            const std::string& grid, const std::string& depths_str,
            const std::string& out) {
  WormParams params = WormParams::make(beta);
  DomainSpec spec = worm_defining(params);
  auto [nr, nphi] = parse_grid(grid, 24, 6);
  std::vector<double> depths = parse_depths(depths_str);
  if (alpha_psi <= 0) {
    // Default family parameter: midway between alpha(eta) and the largest
    // feasible alpha, found by blow-up bisection.
    double am = max_alpha(beta, 1e-6);
    double a_eta = alpha_from_eta(eta);
    if (a_eta >= am)
      alpha_psi = am;  // family cannot reach: the check will produce a witness
    else
      alpha_psi = 0.5 * (a_eta + am);
    log_info("psh: alpha_psi defaulted to " + fmt(alpha_psi));
  }
  Weight psi = build_psi_radial(alpha_psi, theta, beta);
  InteriorSamples samples =
      interior_sampler(spec, worm_sigma_grid(params, nr, nphi), depths);
  ExponentCheckReport rep = check_psh_grid(spec, psi, eta, samples);
  json jrep = {{"command", "psh"},
               {"beta", beta},
               {"eta", eta},
               {"alpha_psi", alpha_psi},
               {"theta", theta},
               {"grid", std::to_string(nr) + "x" + std::to_string(nphi)},
               {"depths", depths},
               {"sample_count", rep.sample_count},
               {"eval_failures", rep.eval_failures},
               {"escaped", samples.escaped},
               {"min_eig", rep.min_eig},
               {"pass", rep.pass()},
               {"note",
                "sampled certificate near Sigma; the sharp upper bound comes "
                "from the Riccati blow-up bisection, not from sampling"}};
  if (rep.has_witness) {
    jrep["witness"] = {{"point", point_json(rep.witness_point)},
                       {"depth", rep.witness_depth},
                       {"direction",
                        {{rep.witness_direction[0].real(),
                          rep.witness_direction[0].imag()},
                         {rep.witness_direction[1].real(),
                          rep.witness_direction[1].imag()}}}};
  }
  emit_json(jrep, out);
  return rep.pass() ? 0 : 1;
}

int cmd_validate(const std::string& domain, double beta, int samples,
                 unsigned long long seed, const std::string& out) {
  DomainSpec spec;
  WormParams params{};
  bool is_worm = (domain == "worm");
  if (is_worm) {
    params = WormParams::make(beta);
    spec = worm_defining(params);
  } else if (domain == "ball") {
    spec = ball_defining({1.0, 1.0});
  } else {
    throw CLI::ValidationError("validate", "unknown domain '" + domain + "'");
  }
  ValidationReport rep = validate_defining(spec, samples, seed);
  json jrep = {{"command", "validate"},
               {"domain", rep.domain},
               {"samples", rep.samples},
               {"interior_ok", rep.interior_ok},
               {"max_rel_grad_err", rep.max_rel_grad_err},
               {"max_rel_hess_err", rep.max_rel_hess_err},
               {"failures", rep.failures},
               {"pass", rep.pass()}};
  if (is_worm) {
    // Levi-flat annulus identities: r = 0, ||grad r|| = 2, Hess_r(L, L) = 0.
    auto grid = worm_sigma_grid(params, 16, 8);
    double max_r = 0, max_gn = 0, max_levi = 0;
    for (const CPoint& p : grid) {
      max_r = std::max(max_r, std::abs(spec.r(p)));
      max_gn = std::max(max_gn, std::abs(grad_norm(spec.r, p) - 2.0));
      Field1_0 l = tangent_field_c2(spec.r, p);
      max_levi = std::max(
          max_levi, std::abs(hess_pair(complex_hessian(spec.r, p), l, l).real()));
    }
    bool sigma_ok = max_r <= 1e-12 && max_gn <= 1e-10 && max_levi <= 1e-10;
    jrep["sigma_checks"] = {{"max_abs_r", max_r},
                            {"max_grad_norm_dev", max_gn},
                            {"max_levi_form", max_levi},
                            {"pass", sigma_ok}};
    if (!sigma_ok) jrep["pass"] = false;
  }
  emit_json(jrep, out);
  return jrep["pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dfx: Diederich-Fornaess index laboratory for worm domains"};
  app.require_subcommand(1);

  // worm-index
  auto* wi = app.add_subcommand("worm-index",
                                "Compute the index pi/(2 beta) by blow-up bisection");
  double wi_beta = 0, wi_tol = defaults::tol;
  std::string wi_out;
  wi->add_option("--beta", wi_beta, "worm parameter (> pi/2)")->required();
  wi->add_option("--tol", wi_tol, "index tolerance");
  wi->add_option("--out", wi_out, "also write the JSON report to this path");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Index sweep over a uniform beta grid (CSV)");
  double sw_min = 0.6 * kPi, sw_max = 4 * kPi, sw_tol = defaults::tol;
  int sw_steps = 20;
  std::string sw_out;
  sw->add_option("--beta-min", sw_min, "first beta");
  sw->add_option("--beta-max", sw_max, "last beta");
  sw->add_option("--steps", sw_steps, "number of rows");
  sw->add_option("--tol", sw_tol, "per-row tolerance");
  sw->add_option("--out", sw_out, "CSV output path");

  // criterion
  auto* cr = app.add_subcommand(
      "criterion", "Radial-weight criterion values on the Sigma grid (CSV)");
  double cr_beta = 0, cr_alpha = 0, cr_eta = 0, cr_theta = defaults::theta;
  std::string cr_grid, cr_out;
  cr->add_option("--beta", cr_beta, "worm parameter (> pi/2)")->required();
  cr->add_option("--alpha", cr_alpha, "Riccati parameter of the radial weight")->required();
  cr->add_option("--eta", cr_eta, "evaluate at alpha(eta) instead of --alpha");
  cr->add_option("--theta", cr_theta, "cotangent phase");
  cr->add_option("--grid", cr_grid, "Sigma grid as RxP (default 256x16)");
  cr->add_option("--out", cr_out, "CSV output path");

  // riccati
  auto* rc = app.add_subcommand("riccati",
                                "Integrate s' = -a s^2 - s/t - b/t^2 vs closed form (CSV)");
  double rc_a = 0, rc_b = 0, rc_theta = defaults::theta, rc_t0 = 0, rc_t1 = 0,
         rc_step = 1e-4, rc_s0 = 0;
  std::string rc_out;
  rc->add_option("--a", rc_a, "quadratic coefficient")->required();
  rc->add_option("--b", rc_b, "1/t^2 coefficient")->required();
  rc->add_option("--theta", rc_theta, "closed-form phase");
  rc->add_option("--t0", rc_t0, "start time")->required();
  rc->add_option("--t1", rc_t1, "end time")->required();
  rc->add_option("--step", rc_step, "max RK4 step");
  auto* rc_s0_opt = rc->add_option("--s0", rc_s0, "initial value (default: closed form at t0)");
  rc->add_option("--out", rc_out, "CSV output path");

  // psh
  auto* ph = app.add_subcommand("psh",
                                "Plurisubharmonicity certificate for -(-r e^psi)^eta");
  double ph_beta = 0, ph_eta = 0, ph_alpha = 0, ph_theta = defaults::theta;
  std::string ph_grid, ph_depths, ph_out;
  ph->add_option("--beta", ph_beta, "worm parameter (> pi/2)")->required();
  ph->add_option("--eta", ph_eta, "exponent to certify")->required();
  ph->add_option("--alpha-psi", ph_alpha, "radial weight parameter (default: auto)");
  ph->add_option("--theta", ph_theta, "cotangent phase");
  ph->add_option("--grid", ph_grid, "Sigma grid as RxP (default 24x6)");
  ph->add_option("--depths", ph_depths, "comma list of inward depths");
  ph->add_option("--out", ph_out, "also write the JSON report to this path");

  // validate
  auto* va = app.add_subcommand("validate", "Domain catalog self-checks");
  std::string va_domain = "worm", va_out;
  double va_beta = kPi;
  int va_samples = 100;
  unsigned long long va_seed = 42;
  va->add_option("--domain", va_domain, "worm | ball");
  va->add_option("--beta", va_beta, "worm parameter");
  va->add_option("--samples", va_samples, "boundary sample count");
  va->add_option("--seed", va_seed, "RNG seed");
  va->add_option("--out", va_out, "also write the JSON report to this path");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_config(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dfx: %s\n", e.what());
    return 2;
  }
  // CLI11 parses reversed vectors.
  std::vector<std::string> rargs(args.rbegin(), args.rend());
  try {
    app.parse(rargs);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints usage/help text
    return code == 0 ? 0 : 2;
  }

  try {
    if (wi->parsed()) return cmd_worm_index(wi_beta, wi_tol, wi_out);
    if (sw->parsed()) return cmd_sweep(sw_min, sw_max, sw_steps, sw_tol, sw_out);
    if (cr->parsed())
      return cmd_criterion(cr_beta, cr_alpha, cr_eta, cr_theta, cr_grid, cr_out);
    if (rc->parsed())
      return cmd_riccati(rc_a, rc_b, rc_theta, rc_t0, rc_t1, rc_step, rc_s0,
                         rc_s0_opt->count() > 0, rc_out);
    if (ph->parsed())
      return cmd_psh(ph_beta, ph_eta, ph_alpha, ph_theta, ph_grid, ph_depths, ph_out);
    if (va->parsed())
      return cmd_validate(va_domain, va_beta, va_samples, va_seed, va_out);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "dfx: infeasible: %s\n", e.what());
    return 1;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "dfx: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "dfx: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dfx: %s\n", e.what());
    return 2;
  }
  return 2;
}
