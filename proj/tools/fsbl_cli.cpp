// Command-line harness: synthetic data generation, solving, criterion
// verification at scale, and plot-data emission for the two illustrative
// figure cases.
//
// Exit codes: 0 success, 1 invariant violation, 2 input error.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>

#include "fsbl/fsbl.hpp"

using json = nlohmann::json;
using namespace fsbl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInputError = 2;

struct GlobalOpts {
  std::uint64_t seed = 0;
  double quad_rel_tol = 1e-10;
  std::size_t quad_max_subdiv = 4096;
  double kappa = 1.0;
  std::string out;
};

QuadratureSpec quad_spec(const GlobalOpts& g) {
  QuadratureSpec spec;
  spec.rel_tol = g.quad_rel_tol;
  spec.max_subdivisions = g.quad_max_subdiv;
  return spec;
}

ScaleFamilyPrior prior_from_flags(const std::string& family, double dof) {
  return ScaleFamilyPrior::from_name(family, dof);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << content;
}

json support_to_json(const std::vector<Eigen::Index>& support) {
  json arr = json::array();
  for (auto j : support) arr.push_back(j);
  return arr;
}

// ---------------------------------------------------------------- generate

int cmd_generate(const GlobalOpts& g, Eigen::Index n, Eigen::Index m,
                 Eigen::Index k, double snr_db, bool noiseless,
                 const std::string& dict_kind, const std::string& prior_family,
                 double prior_dof) {
  SyntheticSpec spec;
  spec.n = n;
  spec.m = m;
  spec.k = k;
  spec.snr_db = noiseless ? std::numeric_limits<double>::infinity() : snr_db;
  spec.dictionary_kind = dict_kind == "dct_overcomplete"
                             ? DictionaryKind::dct_overcomplete
                             : DictionaryKind::gaussian_iid;
  spec.weight_prior = prior_from_flags(prior_family, prior_dof);
  spec.seed = g.seed;
  const auto gen = generate(spec);

  const std::string stem = g.out.empty() ? "problem" : g.out;
  write_csv(stem + "_dictionary.csv", gen.problem.dictionary);
  write_csv(stem + "_observation.csv", gen.problem.observation);

  json meta;
  meta["noise_precision"] = gen.problem.noise_precision;
  meta["seed"] = spec.seed;
  meta["n"] = spec.n;
  meta["m"] = spec.m;
  meta["k"] = spec.k;
  meta["snr_db"] = noiseless ? json() : json(spec.snr_db);
  meta["realized_snr_db"] = std::isfinite(gen.planted.realized_snr_db)
                                ? json(gen.planted.realized_snr_db)
                                : json();
  meta["dictionary_kind"] = dict_kind;
  meta["weight_prior"] = {{"family", prior_family}};
  if (prior_family == "student_t") meta["weight_prior"]["dof"] = prior_dof;
  meta["planted_support"] = support_to_json(gen.planted.support);
  json weights = json::array();
  for (Eigen::Index j : gen.planted.support) {
    weights.push_back(gen.planted.weights(j));
  }
  meta["planted_weights"] = weights;
  write_text(stem + "_meta.json", meta.dump(2) + "\n");

  std::cout << "wrote " << stem << "_{dictionary,observation}.csv and "
            << stem << "_meta.json\n";
  return kExitOk;
}

// ------------------------------------------------------------------- solve

int cmd_solve(const GlobalOpts& g, const std::string& dict_path,
              const std::string& obs_path, const std::string& meta_path,
              std::size_t max_sweeps, double evidence_rel_tol,
              const std::string& order) {
  SparseProblem problem;
  json meta;
  {
    std::ifstream in(meta_path);
    if (!in) throw std::runtime_error("cannot open: " + meta_path);
    in >> meta;
  }
  problem.dictionary = read_csv(dict_path);
  problem.observation = read_csv(obs_path).col(0);
  problem.noise_precision = meta.at("noise_precision").get<double>();
  problem.validate();

  SolverConfig config;
  config.kappa = g.kappa;
  config.max_sweeps = max_sweeps;
  config.evidence_rel_tol = evidence_rel_tol;
  config.sweep_order =
      order == "largest_gain" ? SweepOrder::largest_gain : SweepOrder::cyclic;
  config.seed = g.seed;

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = solve(problem, config);
  const auto t1 = std::chrono::steady_clock::now();
  const double wall_s =
      std::chrono::duration<double>(t1 - t0).count();

  const auto post = posterior(problem, result.state);
  std::vector<Eigen::Index> recovered;
  for (const auto& [j, gamma] : result.state.active) recovered.push_back(j);

  double nmse = std::numeric_limits<double>::quiet_NaN();
  if (meta.contains("planted_support") && meta.contains("planted_weights")) {
    Eigen::VectorXd planted = Eigen::VectorXd::Zero(problem.cols());
    const auto& sup = meta["planted_support"];
    const auto& w = meta["planted_weights"];
    for (std::size_t t = 0; t < sup.size(); ++t) {
      planted(sup[t].get<Eigen::Index>()) = w[t].get<double>();
    }
    const double denom = planted.squaredNorm();
    nmse = denom > 0.0 ? (post.mean - planted).squaredNorm() / denom
                       : post.mean.squaredNorm();
  }

  json record;
  record["config"] = {{"kappa", config.kappa},
                      {"max_sweeps", config.max_sweeps},
                      {"evidence_rel_tol", config.evidence_rel_tol},
                      {"sweep_order", order},
                      {"seed", config.seed}};
  if (meta.contains("planted_support")) {
    record["planted_support"] = meta["planted_support"];
  }
  record["recovered_support"] = support_to_json(recovered);
  record["evidence_trace"] = result.trace.evidence;
  record["active_size_trace"] = result.trace.active_size;
  record["log_evidence"] = result.state.log_evidence;
  record["converged"] = result.converged;
  record["sweeps"] = result.sweeps;
  if (std::isfinite(nmse)) record["nmse"] = nmse;
  record["wall_time_s"] = wall_s;
  if (!g.out.empty()) {
    write_text(g.out, record.dump(2) + "\n");
  }

  std::cout << "support:";
  for (auto j : recovered) std::cout << ' ' << j;
  std::cout << "\nsweeps: " << result.sweeps
            << (result.converged ? "" : " (not converged)") << "\n";
  if (std::isfinite(nmse)) std::cout << "nmse: " << nmse << "\n";

  // Evidence trace must be non-decreasing up to round-off.
  for (std::size_t t = 1; t < result.trace.evidence.size(); ++t) {
    if (result.trace.evidence[t] < result.trace.evidence[t - 1] - 1e-10) {
      std::cerr << "invariant violation: evidence decreased at sweep " << t
                << "\n";
      return kExitViolation;
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const GlobalOpts& g, int n_sections) {
  std::mt19937_64 rng(g.seed == 0 ? 12345 : g.seed);
  std::uniform_real_distribution<double> um(-3.0, 3.0);
  std::uniform_real_distribution<double> us(0.1, 4.0);

  json sections = json::array();
  int violations = 0, boundary = 0;
  const auto prior = ScaleFamilyPrior::gaussian();
  const auto spec = quad_spec(g);

  for (int t = 0; t < n_sections; ++t) {
    SectionStats s{um(rng), us(rng), t};
    json rec;
    rec["mu"] = s.mu;
    rec["sigma2"] = s.sigma2;

    if (std::abs(s.mu * s.mu / s.sigma2 - 1.0) < 1e-3) {
      rec["bucket"] = "boundary";
      ++boundary;
      sections.push_back(rec);
      continue;
    }
    const auto v = evaluate_criteria(s, g.kappa);
    const auto f = SectionFunction::closed_form(s);
    const auto numeric = argmax_section_likelihood(f, prior, spec, true);

    rec["theorem1"] = to_string(v.theorem1_prune);
    rec["theorem2"] = to_string(v.theorem2_finite);
    rec["kappa_rule"] = v.kappa_rule_finite;
    rec["numeric_finite"] = numeric.finite;
    const bool agree =
        v.kappa_rule_finite == numeric.finite &&
        v.kappa_rule_finite == (v.theorem2_finite == TriState::holds) &&
        v.kappa_rule_finite == (v.theorem1_prune != TriState::holds);
    rec["agree"] = agree;
    if (!agree) ++violations;
    sections.push_back(rec);
  }

  json report;
  report["n_sections"] = n_sections;
  report["boundary_excluded"] = boundary;
  report["violations"] = violations;
  report["sections"] = sections;
  if (!g.out.empty()) {
    write_text(g.out, report.dump(2) + "\n");
  }
  std::cout << "sections: " << n_sections << ", boundary: " << boundary
            << ", violations: " << violations << "\n";
  return violations == 0 ? kExitOk : kExitViolation;
}

// ----------------------------------------------------------------- figures

std::string figure1_csv(double mu, double sigma2) {
  const SectionStats s{mu, sigma2, 0};
  const double f0 = gaussian_pdf(0.0, mu, sigma2);
  const double f1 = mu / sigma2 * f0;  // f'(0)
  std::string csv = "x,f,t,r1,r1bar\n";
  for (int k = 0; k < 801; ++k) {
    const double x = -4.0 + 8.0 * k / 800.0;
    const double f = gaussian_pdf(x, mu, sigma2);
    const double tangent = f0 + f1 * x;
    const double r1 = f - tangent;
    const double r1bar =
        x > 0.0 ? r1bar_gaussian(s, x)
                : (x < 0.0 ? r1bar_gaussian(s, -x) : 0.0);
    csv += format_double(x) + ',' + format_double(f) + ',' +
           format_double(tangent) + ',' + format_double(r1) + ',' +
           format_double(r1bar) + '\n';
  }
  return csv;
}

int cmd_figure1(const GlobalOpts& g, double mu, double sigma2,
                bool explicit_section) {
  if (!(sigma2 > 0.0)) {
    throw CLI::ValidationError("--sigma2 must be positive");
  }
  const std::string stem = g.out.empty() ? "figure1" : g.out;
  if (explicit_section) {
    write_text(stem, figure1_csv(mu, sigma2));
    std::cout << "wrote " << stem << "\n";
  } else {
    write_text(stem + "_case_a.csv", figure1_csv(1.5, 1.0));
    write_text(stem + "_case_b.csv", figure1_csv(0.5, 1.0));
    std::cout << "wrote " << stem << "_case_{a,b}.csv\n";
  }
  return kExitOk;
}

int cmd_figure2(const GlobalOpts& g, double mu, double sigma2, double gamma1,
                double gamma2, const std::string& prior_family,
                double prior_dof) {
  if (!(gamma1 < gamma2)) {
    throw CLI::ValidationError("--gamma1 must be less than --gamma2");
  }
  const auto prior = prior_from_flags(prior_family, prior_dof);
  const double f0 = gaussian_pdf(0.0, mu, sigma2);
  const double f1 = mu / sigma2 * f0;
  std::string csv = "x,f,t,p_gamma1,p_gamma2\n";
  for (int k = 0; k < 801; ++k) {
    const double x = -4.0 + 8.0 * k / 800.0;
    csv += format_double(x) + ',' +
           format_double(gaussian_pdf(x, mu, sigma2)) + ',' +
           format_double(f0 + f1 * x) + ',' +
           format_double(prior.density(x, gamma1)) + ',' +
           format_double(prior.density(x, gamma2)) + '\n';
  }
  const std::string path = g.out.empty() ? "figure2.csv" : g.out;
  write_text(path, csv);
  std::cout << "wrote " << path << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- bench

int cmd_bench(const GlobalOpts& g, int trials) {
  std::cout << "n,m,k,snr_db,trial,sweeps,active,wall_s\n";
  json rows = json::array();
  for (int t = 0; t < trials; ++t) {
    SyntheticSpec spec;
    spec.n = 100;
    spec.m = 256;
    spec.k = 10;
    spec.snr_db = 30.0;
    spec.seed = g.seed + static_cast<std::uint64_t>(t);
    const auto gen = generate(spec);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = solve(gen.problem);
    const auto t1 = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(t1 - t0).count();
    std::cout << spec.n << ',' << spec.m << ',' << spec.k << ','
              << spec.snr_db << ',' << t << ',' << r.sweeps << ','
              << r.state.active.size() << ',' << wall << "\n";
    rows.push_back({{"trial", t},
                    {"sweeps", r.sweeps},
                    {"active", r.state.active.size()},
                    {"wall_s", wall}});
  }
  if (!g.out.empty()) {
    write_text(g.out, rows.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast SBL solver and pruning-criterion verification harness"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--quad-rel-tol", g.quad_rel_tol,
                 "quadrature relative tolerance")
      ->capture_default_str();
  app.add_option("--quad-max-subdiv", g.quad_max_subdiv,
                 "quadrature subdivision budget")
      ->capture_default_str();
  app.add_option("--kappa", g.kappa, "admission threshold kappa")
      ->capture_default_str();
  app.add_option("--out", g.out, "output path (or stem for multi-file output)");

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "generate a synthetic problem");
  Eigen::Index n = 100, m = 256, k = 10;
  double snr_db = 30.0;
  bool noiseless = false;
  std::string dict_kind = "gaussian_iid", prior_family = "gaussian";
  double prior_dof = 5.0;
  gen_cmd->add_option("--n", n)->capture_default_str();
  gen_cmd->add_option("--m", m)->capture_default_str();
  gen_cmd->add_option("--k", k)->capture_default_str();
  gen_cmd->add_option("--snr", snr_db, "SNR in dB")->capture_default_str();
  gen_cmd->add_flag("--noiseless", noiseless, "zero noise");
  gen_cmd->add_option("--dict", dict_kind)
      ->check(CLI::IsMember({"gaussian_iid", "dct_overcomplete"}))
      ->capture_default_str();
  gen_cmd->add_option("--prior-family", prior_family)
      ->check(CLI::IsMember({"gaussian", "laplace", "uniform", "student_t"}))
      ->capture_default_str();
  gen_cmd->add_option("--prior-dof", prior_dof)->capture_default_str();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "run the solver on a problem");
  std::string dict_path, obs_path, meta_path;
  std::size_t max_sweeps = 1000;
  double evidence_rel_tol = 1e-8;
  std::string order = "cyclic";
  solve_cmd->add_option("--dictionary", dict_path)->required();
  solve_cmd->add_option("--observation", obs_path)->required();
  solve_cmd->add_option("--meta", meta_path)->required();
  solve_cmd->add_option("--max-sweeps", max_sweeps)->capture_default_str();
  solve_cmd->add_option("--tol", evidence_rel_tol)->capture_default_str();
  solve_cmd->add_option("--order", order)
      ->check(CLI::IsMember({"cyclic", "largest_gain"}))
      ->capture_default_str();

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "check the pruning criteria at scale");
  int n_sections = 1000;
  verify_cmd->add_option("--sections", n_sections)->capture_default_str();

  // figure1 / figure2
  auto* fig1_cmd = app.add_subcommand("figure1", "emit section/tangent data");
  double f1_mu = 1.5, f1_sigma2 = 1.0;
  auto* f1_mu_opt = fig1_cmd->add_option("--mu", f1_mu)->capture_default_str();
  fig1_cmd->add_option("--sigma2", f1_sigma2)->capture_default_str();

  auto* fig2_cmd =
      app.add_subcommand("figure2", "emit prior concentration data");
  double f2_mu = 1.5, f2_sigma2 = 1.0;
  // gamma1 puts >= 99% of the prior mass inside (-0.5, 0.5)
  double gamma1 = 26.543104, gamma2 = 265.43104;
  std::string f2_prior = "gaussian";
  double f2_dof = 5.0;
  fig2_cmd->add_option("--mu", f2_mu)->capture_default_str();
  fig2_cmd->add_option("--sigma2", f2_sigma2)->capture_default_str();
  fig2_cmd->add_option("--gamma1", gamma1)->capture_default_str();
  fig2_cmd->add_option("--gamma2", gamma2)->capture_default_str();
  fig2_cmd->add_option("--prior-family", f2_prior)->capture_default_str();
  fig2_cmd->add_option("--prior-dof", f2_dof)->capture_default_str();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "time solver runs");
  int trials = 5;
  bench_cmd->add_option("--trials", trials)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (gen_cmd->parsed()) {
      return cmd_generate(g, n, m, k, snr_db, noiseless, dict_kind,
                          prior_family, prior_dof);
    }
    if (solve_cmd->parsed()) {
      return cmd_solve(g, dict_path, obs_path, meta_path, max_sweeps,
                       evidence_rel_tol, order);
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(g, n_sections);
    }
    if (fig1_cmd->parsed()) {
      return cmd_figure1(g, f1_mu, f1_sigma2, f1_mu_opt->count() > 0);
    }
    if (fig2_cmd->parsed()) {
      return cmd_figure2(g, f2_mu, f2_sigma2, gamma1, gamma2, f2_prior,
                         f2_dof);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(g, trials);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
