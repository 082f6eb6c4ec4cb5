#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "divkit/bench.hpp"
#include "divkit/energy.hpp"
#include "divkit/errors.hpp"
#include "divkit/fourier.hpp"
#include "divkit/grid_density.hpp"
#include "divkit/infodiv.hpp"
#include "divkit/kinetics.hpp"
#include "divkit/parallel.hpp"
#include "divkit/probe.hpp"
#include "divkit/sample_set.hpp"
#include "divkit/transport.hpp"
#include "divkit/whitening.hpp"

namespace divkit::cli {

namespace {

using nlohmann::json;

struct Global {
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::string format = "json";
  std::string log_level = "quiet";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

fourier::Scheme parse_scheme(const std::string& s) {
  if (s == "auto") return fourier::Scheme::Auto;
  if (s == "product") return fourier::Scheme::Product;
  return fourier::Scheme::QMC;
}

fourier::TailMode parse_tail(const std::string& s) {
  if (s == "auto") return fourier::TailMode::Auto;
  if (s == "bound") return fourier::TailMode::Bound;
  return fourier::TailMode::MeanSquare;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void flatten(const json& node, const std::string& prefix, std::ostringstream& out) {
  if (node.is_object()) {
    for (auto it = node.begin(); it != node.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (node.is_array()) {
    if (node.empty()) out << prefix << " []\n";
    for (std::size_t i = 0; i < node.size(); ++i) flatten(node[i], prefix + "[" + std::to_string(i) + "]", out);
  } else if (node.is_string()) {
    out << prefix << ' ' << node.get<std::string>() << '\n';
  } else {
    out << prefix << ' ' << node.dump() << '\n';
  }
}

}  // namespace

std::string render_table(const json& doc) {
  std::ostringstream out;
  flatten(doc, "", out);
  return out.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Divergences between probability measures, whitening, kinetic relaxation and model scoring.",
               "divkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "divkit 0.1.0");

  Global g;
  app.add_option("--seed", g.seed, "Random seed (the DIVKIT_SEED environment variable takes precedence)");
  app.add_option("--threads", g.threads, "Worker threads, 0 = available parallelism")->check(CLI::NonNegativeNumber);
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "table"}));
  app.add_option("--log-level", g.log_level, "Progress messages on stderr")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));

  std::string mu_path, nu_path;
  double moment_tol = energy::kDefaultMomentTol;

  // energy
  auto* energy_cmd = app.add_subcommand("energy", "Squared generalized energy distance");
  double alpha = 1.0;
  std::string norm = "l2";
  energy_cmd->add_option("--alpha", alpha, "Kernel order")->required();
  energy_cmd->add_option("--norm", norm, "Ground norm")->check(CLI::IsMember({"l1", "l2"}));
  energy_cmd->add_option("--mu", mu_path, "First sample CSV")->required()->check(CLI::ExistingFile);
  energy_cmd->add_option("--nu", nu_path, "Second sample CSV")->required()->check(CLI::ExistingFile);
  energy_cmd->add_option("--moment-tol", moment_tol, "Relative tolerance for moment matching");

  // fourier
  auto* fourier_cmd = app.add_subcommand("fourier", "Fourier-based metric F_s");
  double s = 2.0;
  fourier::QuadratureSpec quad;
  std::string scheme = "auto", tail = "auto";
  fourier_cmd->add_option("--s", s, "Order s")->required();
  fourier_cmd->add_option("--mu", mu_path, "First sample CSV")->required()->check(CLI::ExistingFile);
  fourier_cmd->add_option("--nu", nu_path, "Second sample CSV")->required()->check(CLI::ExistingFile);
  fourier_cmd->add_option("--rmax", quad.truncation_radius, "Truncation radius, 0 = automatic");
  fourier_cmd->add_option("--rmin", quad.inner_cutoff, "Inner cutoff radius");
  fourier_cmd->add_option("--radial", quad.radial_points, "Outer radial panels, 0 = automatic");
  fourier_cmd->add_option("--angular", quad.angular_points, "Directions per radial node, 0 = adaptive");
  fourier_cmd->add_option("--tol", quad.tolerance, "Relative target for the truncation bound");
  fourier_cmd->add_option("--scheme", scheme)->check(CLI::IsMember({"auto", "product", "qmc"}));
  fourier_cmd->add_option("--tail", tail)->check(CLI::IsMember({"auto", "bound", "mean-square"}));
  fourier_cmd->add_option("--randomizations", quad.randomizations, "QMC replicas");
  fourier_cmd->add_option("--moment-tol", moment_tol, "Relative tolerance for moment matching");

  // wasserstein
  auto* w_cmd = app.add_subcommand("wasserstein", "Exact Wasserstein distance W_p");
  double p = 1.0;
  std::string plan_path;
  std::size_t max_support = transport::kDefaultMaxSupport;
  w_cmd->add_option("--p", p, "Order p >= 1");
  w_cmd->add_option("--mu", mu_path, "First sample CSV")->required()->check(CLI::ExistingFile);
  w_cmd->add_option("--nu", nu_path, "Second sample CSV")->required()->check(CLI::ExistingFile);
  w_cmd->add_option("--emit-plan", plan_path, "Write the optimal plan as JSON");
  w_cmd->add_option("--max-support", max_support, "Largest support size accepted by the LP solver");

  // whiten
  auto* whiten_cmd = app.add_subcommand("whiten", "Fit and apply a whitening map");
  std::string method = "zca-cor", in_path, out_path;
  double ridge = 0.0;
  whiten_cmd->add_option("--method", method)->check(CLI::IsMember({"cholesky", "zca-cor"}));
  whiten_cmd->add_option("--in", in_path, "Input sample CSV")->required()->check(CLI::ExistingFile);
  whiten_cmd->add_option("--out", out_path, "Output CSV of whitened samples")->required();
  whiten_cmd->add_option("--ridge", ridge, "Relative ridge added to the covariance");

  // div
  auto* div_cmd = app.add_subcommand("div", "Any sample divergence, optionally in whitened coordinates");
  bool whitened = false;
  std::string family = "energy";
  div_cmd->add_flag("--whitened", whitened, "Whiten each side with its own fitted map first");
  div_cmd->add_option("--family", family)->check(CLI::IsMember({"energy", "fourier", "wasserstein", "cramer"}));
  div_cmd->add_option("--alpha", alpha, "Energy order");
  div_cmd->add_option("--norm", norm)->check(CLI::IsMember({"l1", "l2"}));
  div_cmd->add_option("--s", s, "Fourier order");
  div_cmd->add_option("--p", p, "Wasserstein order");
  div_cmd->add_option("--method", method)->check(CLI::IsMember({"cholesky", "zca-cor"}));
  div_cmd->add_option("--ridge", ridge);
  div_cmd->add_option("--mu", mu_path, "First sample CSV")->required()->check(CLI::ExistingFile);
  div_cmd->add_option("--nu", nu_path, "Second sample CSV")->required()->check(CLI::ExistingFile);
  div_cmd->add_option("--moment-tol", moment_tol);

  // info
  auto* info_cmd = app.add_subcommand("info", "Entropy and Fisher functionals of gridded densities");
  std::string what = "kl", f_path, g_path;
  info_cmd->add_option("--what", what)->required()->check(CLI::IsMember({"kl", "fisher", "relfisher", "entropy"}));
  info_cmd->add_option("--f", f_path, "Grid JSON of f")->required()->check(CLI::ExistingFile);
  info_cmd->add_option("--g", g_path, "Grid JSON of g (kl, relfisher)")->check(CLI::ExistingFile);

  // kinetics
  auto* kin_cmd = app.add_subcommand("kinetics", "Relaxation of the wealth-exchange model");
  kinetics::TradeParams trade;
  kinetics::TraceOptions trace_opt;
  std::string probes = "energy:1,fourier:2,w1", eta = "two-point", clamp = "redraw", initial = "delta", trace_path;
  double burn_in = 0.1;
  kin_cmd->add_option("--lambda", trade.lambda, "Saving drift");
  kin_cmd->add_option("--sigma", trade.sigma, "Trade-risk variance");
  kin_cmd->add_option("--n", trace_opt.agents, "Agents");
  kin_cmd->add_option("--horizon", trace_opt.horizon, "Kinetic time horizon");
  kin_cmd->add_option("--checkpoints", trace_opt.checkpoints, "Geometric checkpoints after t = 0");
  kin_cmd->add_option("--first-checkpoint", trace_opt.first_checkpoint);
  kin_cmd->add_option("--probes", probes, "Comma-separated probes, e.g. energy:1,fourier:2,w1");
  kin_cmd->add_option("--out", trace_path, "Write the trace JSON here instead of stdout");
  kin_cmd->add_option("--eta", eta)->check(CLI::IsMember({"two-point", "uniform"}));
  kin_cmd->add_option("--clamp", clamp)->check(CLI::IsMember({"redraw", "truncate"}));
  kin_cmd->add_option("--grazing", trade.grazing, "Interaction strength per trade");
  kin_cmd->add_flag("--conserve-mean", trade.conserve_mean, "Rescale each pair to its pre-trade total");
  kin_cmd->add_option("--initial", initial)->check(CLI::IsMember({"delta", "equilibrium"}));
  kin_cmd->add_option("--hill-k", trace_opt.hill_k, "Order statistics used by the Hill estimator, 0 = 2%");
  kin_cmd->add_option("--reference-points", trace_opt.reference_points);
  kin_cmd->add_option("--burn-in", burn_in, "Start of the monotonicity window");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Score predictive models by whitened energy distance");
  bench::BenchConfig bc;
  std::optional<std::uint64_t> synth_seed;
  std::string regime = "sector_linear", alphas = "0.5,1,1.5", models = "LIN,LINS,NNET,NNETS", report_path;
  std::string data_path, features, targets, sector, score_method = "zca-cor";
  bench::ModelSpec nn;
  bench_cmd->add_option("--synth-seed", synth_seed, "Seed of the synthetic dataset (default: --seed)");
  bench_cmd->add_option("--split-seed", bc.split_seed);
  bench_cmd->add_option("--rows", bc.rows);
  bench_cmd->add_option("--regime", regime)->check(CLI::IsMember({"sector_linear", "global_linear", "nonlinear"}));
  bench_cmd->add_option("--noise", bc.noise);
  bench_cmd->add_option("--alphas", alphas, "Comma-separated energy orders");
  bench_cmd->add_option("--models", models, "Comma-separated subset of LIN,LINS,NNET,NNETS");
  bench_cmd->add_option("--hidden", nn.hidden);
  bench_cmd->add_option("--epochs", nn.epochs);
  bench_cmd->add_option("--lr", nn.learning_rate);
  bench_cmd->add_option("--whitening", score_method)->check(CLI::IsMember({"cholesky", "zca-cor"}));
  bench_cmd->add_option("--out", report_path, "Also write the report JSON here");
  auto* data_opt = bench_cmd->add_option("--data", data_path, "User CSV instead of synthetic data")
                       ->check(CLI::ExistingFile);
  bench_cmd->add_option("--features", features)->needs(data_opt);
  bench_cmd->add_option("--targets", targets)->needs(data_opt);
  bench_cmd->add_option("--sector", sector)->needs(data_opt);

  auto* self_cmd = app.add_subcommand("selftest", "Run the embedded oracle checks");

  try {
    app.parse(argc, argv);
    if (const char* env = std::getenv("DIVKIT_SEED")) {
      const std::string v(env);
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), g.seed);
      if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw UsageError("DIVKIT_SEED must be a nonnegative integer, got '" + v + "'");
      }
    }
    if (info_cmd->parsed() && (what == "kl" || what == "relfisher") && g_path.empty()) {
      throw UsageError("--what " + what + " needs --g");
    }
    if (bench_cmd->parsed() && !data_path.empty() && (features.empty() || targets.empty() || sector.empty())) {
      throw UsageError("--data needs --features, --targets and --sector");
    }
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "divkit: " << e.what() << '\n' << "run 'divkit --help' for usage\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "divkit: " << e.what() << '\n';
    return kExitUsage;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  json config = {{"seed", g.seed}, {"format", g.format}, {"log_level", g.log_level}};
  auto log = [&](const std::string& msg) {
    if (g.log_level != "quiet") err << "divkit " << command << ": " << msg << '\n';
  };
  set_thread_count(g.threads);

  json result;
  int code = kExitOk;
  try {
    if (sub == energy_cmd) {
      config.update({{"alpha", alpha}, {"norm", norm}, {"mu", mu_path}, {"nu", nu_path}, {"moment_tol", moment_tol}});
      const auto mu = load_samples(mu_path), nu = load_samples(nu_path);
      result = to_json(energy::energy_sq(mu, nu, {alpha, parse_norm(norm)}, moment_tol));
    } else if (sub == fourier_cmd) {
      quad.scheme = parse_scheme(scheme);
      quad.tail = parse_tail(tail);
      quad.seed = g.seed;
      config.update({{"s", s},
                     {"mu", mu_path},
                     {"nu", nu_path},
                     {"rmax", quad.truncation_radius},
                     {"rmin", quad.inner_cutoff},
                     {"radial", quad.radial_points},
                     {"angular", quad.angular_points},
                     {"tol", quad.tolerance},
                     {"scheme", scheme},
                     {"tail", tail},
                     {"randomizations", quad.randomizations},
                     {"budget", quad.budget},
                     {"moment_tol", moment_tol}});
      const auto mu = load_samples(mu_path), nu = load_samples(nu_path);
      result = to_json(fourier::fourier_metric(mu, nu, {s, mu.dim()}, quad, moment_tol));
    } else if (sub == w_cmd) {
      config.update({{"p", p}, {"mu", mu_path}, {"nu", nu_path}, {"emit_plan", plan_path}, {"max_support", max_support}});
      const auto mu = load_samples(mu_path), nu = load_samples(nu_path);
      if (plan_path.empty()) {
        result = to_json(transport::wasserstein(mu, nu, p));
      } else {
        auto [report, plan] = transport::wasserstein_lp(mu, nu, p, max_support);
        write_file(plan_path, transport::to_json(plan).dump(2) + "\n");
        result = to_json(report);
      }
    } else if (sub == whiten_cmd) {
      config.update({{"method", method}, {"in", in_path}, {"out", out_path}, {"ridge", ridge}});
      const auto mu = load_samples(in_path);
      const auto map = whitening::fit_whitening(mu, whitening::parse_method(method), ridge);
      const auto white = whitening::apply_whitening(map, mu);
      save_samples(out_path, white);
      json rows = json::array();
      for (Eigen::Index i = 0; i < map.matrix.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < map.matrix.cols(); ++j) row.push_back(json_number(map.matrix(i, j)));
        rows.push_back(row);
      }
      result = {{"method", method},
                {"matrix", rows},
                {"ridge", json_number(map.ridge)},
                {"condition_number", json_number(map.condition_number)},
                {"residual", json_number(whitening::whitening_residual(map, covariance(mu).matrix))},
                {"points", white.size()}};
    } else if (sub == div_cmd) {
      std::string text = family;
      if (family == "energy") text += ":" + json(alpha).dump() + (norm == "l1" ? ":l1" : "");
      if (family == "fourier") text += ":" + json(s).dump();
      if (family == "wasserstein") text += ":" + json(p).dump();
      Probe probe = parse_probe(text);
      probe.moment_tol = moment_tol;
      probe.quad.seed = g.seed;
      config.update({{"whitened", whitened},
                     {"family", family},
                     {"probe", probe.label()},
                     {"method", method},
                     {"ridge", ridge},
                     {"mu", mu_path},
                     {"nu", nu_path},
                     {"moment_tol", moment_tol}});
      const auto mu = load_samples(mu_path), nu = load_samples(nu_path);
      result = to_json(whitened ? whitening::whitened_divergence(probe, mu, nu, whitening::parse_method(method), ridge)
                                : evaluate(probe, mu, nu));
    } else if (sub == info_cmd) {
      config.update({{"what", what}, {"f", f_path}, {"g", g_path.empty() ? json(nullptr) : json(g_path)}});
      const GridDensity f = GridDensity::load(f_path);
      if (what == "entropy" || what == "fisher") {
        const auto e = what == "entropy" ? info::entropy_estimate(f) : info::fisher_estimate(f);
        result = {{"what", what}, {"value", json_number(e.value)}, {"error_estimate", json_number(e.error)}};
      } else {
        const GridDensity gd = GridDensity::load(g_path);
        result = to_json(what == "kl" ? info::kl(f, gd) : info::relative_fisher(f, gd));
      }
    } else if (sub == kin_cmd) {
      trade.eta = kinetics::parse_eta_law(eta);
      trade.clamp = kinetics::parse_clamp_policy(clamp);
      trace_opt.seed = g.seed;
      trace_opt.initial = initial == "delta" ? kinetics::Initial::Delta : kinetics::Initial::Equilibrium;
      trace_opt.probes = parse_probes(probes);
      config.update({{"lambda", trade.lambda},
                     {"sigma", trade.sigma},
                     {"n", trace_opt.agents},
                     {"horizon", trace_opt.horizon},
                     {"checkpoints", trace_opt.checkpoints},
                     {"first_checkpoint", trace_opt.first_checkpoint},
                     {"probes", probes},
                     {"eta", eta},
                     {"clamp", clamp},
                     {"grazing", trade.grazing},
                     {"conserve_mean", trade.conserve_mean},
                     {"initial", initial},
                     {"hill_k", trace_opt.hill_k},
                     {"reference_points", trace_opt.reference_points},
                     {"burn_in", burn_in},
                     {"out", trace_path}});
      log("simulating " + std::to_string(trace_opt.agents) + " agents to t = " + json(trace_opt.horizon).dump());
      const kinetics::Trace trace = kinetics::relaxation_trace(trade, trace_opt);
      json summary = {{"pareto_index", json_number(trade.pareto_index())},
                      {"final_tail_index", json_number(trace.final_tail_index)},
                      {"final_mean", json_number(trace.means.back())},
                      {"final_mean_standard_error", json_number(trace.mean_standard_errors.back())},
                      {"redraws", trace.redraws},
                      {"truncations", trace.truncations}};
      json per_probe = json::array();
      for (std::size_t k = 0; k < trace.probes.size(); ++k) {
        const auto m = kinetics::monotone_summary(trace, k, burn_in);
        const auto fit = kinetics::decay_fit(trace, k, burn_in);
        per_probe.push_back({{"probe", trace.probes[k]},
                             {"final_value", json_number(trace.reports.back()[k].value)},
                             {"noise_floor", json_number(trace.noise_floor[k])},
                             {"decreasing_pairs", m.decreasing},
                             {"window_pairs", m.pairs},
                             {"monotone_fraction", json_number(m.fraction)},
                             {"decay_rate", json_number(fit.rate)},
                             {"decay_r_squared", json_number(fit.r_squared)}});
      }
      summary["probes"] = per_probe;
      result = {{"summary", summary}};
      if (trace_path.empty()) {
        result["trace"] = kinetics::to_json(trace);
      } else {
        write_file(trace_path, kinetics::to_json(trace).dump(2) + "\n");
      }
    } else if (sub == bench_cmd) {
      bc.data_seed = synth_seed.value_or(g.seed);
      bc.regime = bench::parse_regime(regime);
      bc.alphas.clear();
      for (const auto& a : split_list(alphas)) bc.alphas.push_back(parse_probe("energy:" + a).order);
      bc.models.clear();
      for (const auto& m : split_list(models)) {
        bench::ModelSpec spec = nn;
        spec.kind = bench::parse_model(m);
        spec.seed = g.seed;
        bc.models.push_back(spec);
      }
      config.update({{"synth_seed", bc.data_seed},
                     {"split_seed", bc.split_seed},
                     {"rows", bc.rows},
                     {"regime", regime},
                     {"noise", bc.noise},
                     {"alphas", bc.alphas},
                     {"models", models},
                     {"hidden", nn.hidden},
                     {"epochs", nn.epochs},
                     {"lr", nn.learning_rate},
                     {"whitening", score_method},
                     {"data", data_path.empty() ? json(nullptr) : json(data_path)},
                     {"features", features},
                     {"targets", targets},
                     {"sector", sector},
                     {"out", report_path}});
      const bench::Dataset data =
          data_path.empty() ? bench::synth_dataset(bc.data_seed, bc.rows, bc.regime, bc.noise)
                            : bench::load_dataset(data_path, split_list(features), split_list(targets), sector);
      if (!data_path.empty()) config["rows"] = data.rows();
      log("fitting " + std::to_string(bc.models.size()) + " models on " + std::to_string(data.rows()) + " rows");
      const auto [train, test] = bench::split(data, bc.split_seed);
      std::vector<bench::PredictiveModel> fitted;
      for (const auto& spec : bc.models) fitted.push_back(bench::fit_model(spec, train));
      result = bench::to_json(
          bench::score_models(fitted, test, bc.alphas, whitening::parse_method(score_method)));
      if (!report_path.empty()) write_file(report_path, json{{"config", config}, {"result", result}}.dump(2) + "\n");
    } else if (sub == self_cmd) {
      result = run_selftest();
      if (!result.at("passed").get<bool>()) code = kExitFailure;
    }
  } catch (const Error& e) {
    const json doc = {{"command", command}, {"config", config}, {"error", {{"kind", e.kind()}, {"message", e.what()}}}};
    out << doc.dump(2) << '\n';
    err << "divkit " << command << ": " << e.kind() << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    const json doc = {{"command", command}, {"config", config}, {"error", {{"kind", "internal"}, {"message", e.what()}}}};
    out << doc.dump(2) << '\n';
    err << "divkit " << command << ": " << e.what() << '\n';
    return kExitFailure;
  }

  const json doc = {{"command", command}, {"config", config}, {"result", result}};
  if (g.format == "table") {
    out << render_table(doc);
  } else {
    out << doc.dump(2) << '\n';
  }
  return code;
}

}  // namespace divkit::cli
