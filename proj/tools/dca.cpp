// dca: command-line front end to the defect causal analysis library.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dca/model/synthetic.hpp"
#include "dca/service/server.hpp"
#include "dca/session/retrain.hpp"
#include "dca/util/number.hpp"

using namespace dca;
using nlohmann::json;

namespace {

std::string read(const std::string& path) { return util::read_file(path); }

json read_json(const std::string& path) {
  try {
    return json::parse(read(path));
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, "'" + path + "' is not JSON: " + e.what());
  }
}

void write(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << text;
}

struct LearnFlags {
  double alpha = learn::LearnConfig{}.pseudo_count;
  double tol = learn::LearnConfig{}.tolerance;
  int max_iters = learn::LearnConfig{}.max_iterations;
  std::uint64_t seed = 0;
  int restarts = 1;

  void add_to(CLI::App* app) {
    app->add_option("--alpha", alpha, "Dirichlet pseudo-count per cell")->capture_default_str();
    app->add_option("--tol", tol, "Convergence tolerance on the objective")->capture_default_str();
    app->add_option("--max-iters", max_iters, "EM iteration cap")->capture_default_str();
    app->add_option("--seed", seed, "Seed for random restarts")->capture_default_str();
    app->add_option("--restarts", restarts, "Random restarts; the best final log-likelihood wins")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  learn::LearnConfig config() const {
    learn::LearnConfig c;
    c.pseudo_count = alpha;
    c.tolerance = tol;
    c.max_iterations = max_iters;
    c.seed = seed;
    c.check();
    return c;
  }
};

session::ModelVersion train_model(const std::string& model_path, const std::string& citations_path,
                                  const LearnFlags& flags) {
  auto m = model::parse_model(read(model_path));
  auto compiled = model::compile(m);
  auto records = model::records_to_assignments(m, compiled, model::parse_citations_csv(m, read(citations_path)));
  auto v = session::train_version(compiled, records, flags.config(), flags.restarts);
  v.id = "v1";
  return v;
}

std::string cpd_lines(const bn::Network& net) {
  std::string out;
  for (const auto& cpd : net.cpds()) {
    if (const auto* t = std::get_if<bn::Cpt>(&cpd)) {
      if (t->fixed) continue;
      const auto& states = net.variable(t->child).states;
      for (std::size_t r = 0; r < t->rows.size(); ++r) {
        std::string cond;
        std::size_t rest = r;
        for (std::size_t k = t->parents.size(); k-- > 0;) {
          const auto& ps = net.variable(t->parents[k]).states;
          cond = t->parents[k] + "=" + ps[rest % ps.size()] + (cond.empty() ? "" : ", ") + cond;
          rest /= ps.size();
        }
        for (std::size_t s = 1; s < states.size(); ++s)
          out += "P(" + t->child + "=" + states[s] + (cond.empty() ? "" : " | " + cond) +
                 ") = " + util::format_fixed(t->rows[r][s], 4) + "\n";
      }
    } else {
      const auto& n = std::get<bn::NoisyOrCpd>(cpd);
      for (std::size_t k = 0; k < n.parents.size(); ++k)
        out += "link(" + n.parents[k] + " -> " + n.child + ") = " + util::format_fixed(n.link_probs[k], 4) + "\n";
      out += "leak(" + n.child + ") = " + util::format_fixed(n.leak, 4) + "\n";
    }
  }
  return out;
}

std::string learn_summary(int iterations, bool converged, double ll) {
  return "iterations " + std::to_string(iterations) + "\nconverged " + (converged ? "true" : "false") +
         "\nfinal log-likelihood " + util::format_fixed(ll, 4) + "\n";
}

bn::EvidenceSet parse_evidence(const std::vector<std::string>& items) {
  bn::EvidenceSet e;
  for (const auto& it : items) {
    auto eq = it.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == it.size())
      throw Error(Errc::invalid_evidence, "evidence '" + it + "' is not of the form cause=true|false");
    auto id = it.substr(0, eq);
    if (e.contains(id)) throw Error(Errc::invalid_evidence, "evidence for '" + id + "' given twice");
    e.set(id, it.substr(eq + 1));
  }
  return e;
}

struct AnalyticsInputs {
  std::string defects, units, hours;

  void add_to(CLI::App* app, bool need_stats) {
    app->add_option("--defects", defects, "Defect CSV (id,iteration,unit,nature,detail_tag,description)")
        ->required()
        ->check(CLI::ExistingFile);
    if (need_stats) {
      app->add_option("--units", units, "Unit sizes CSV (iteration,unit,size_fp[,hours])")->required()->check(CLI::ExistingFile);
      app->add_option("--hours", hours, "Inspection hours CSV (iteration,hours)")->required()->check(CLI::ExistingFile);
    }
  }

  std::vector<analytics::DefectRecord> load_defects() const { return analytics::parse_defects_csv(read(defects)); }
  std::vector<analytics::IterationStats> load_stats() const { return analytics::parse_stats_csv(read(units), read(hours)); }
};

std::string metrics_table(const json& rows, const char* key, const char* unit) {
  std::string out;
  for (const auto& r : rows.at("iterations"))
    out += r.at("iteration").get<std::string>() + "  " + util::format_fixed(r.at(key).get<double>(), 3) + " " + unit +
           "  (" + std::to_string(r.at("defects").get<std::size_t>()) + " defects)\n";
  return out;
}

httplib::Server* g_server = nullptr;

int run(int argc, char** argv) {
  CLI::App app{"Defect causal analysis workbench"};
  app.require_subcommand(1);

  // validate-model
  std::string model_path;
  auto* validate = app.add_subcommand("validate-model", "Check a model document");
  validate->add_option("model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);

  // compile
  std::string out_path;
  double initial_prior = 0.5;
  auto* compile = app.add_subcommand("compile", "Compile a model to its layered Bayesian network");
  compile->add_option("model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  compile->add_option("--initial-prior", initial_prior, "P(true) of learnable rows before training")->capture_default_str();
  compile->add_option("-o,--out", out_path, "Network JSON output (default stdout)");

  // learn
  std::string network_path, records_path;
  LearnFlags flags;
  auto* learn_cmd = app.add_subcommand("learn", "Learn parameters with EM");
  auto* net_opt = learn_cmd->add_option("--network", network_path, "Network JSON; --records holds assignments")
                      ->check(CLI::ExistingFile);
  auto* model_opt = learn_cmd->add_option("--model", model_path, "Model JSON; --records holds citations")
                        ->check(CLI::ExistingFile);
  net_opt->excludes(model_opt);
  learn_cmd->add_option("--records", records_path, "Records CSV")->required()->check(CLI::ExistingFile);
  learn_cmd->add_option("-o,--out", out_path, "Learned network (or version with --model) JSON output");
  flags.add_to(learn_cmd);

  // diagnose
  std::string version_path, problem;
  std::vector<std::string> evidence;
  auto* diag = app.add_subcommand("diagnose", "Rank causes of a problem");
  auto* ver_opt = diag->add_option("--version", version_path, "Model version JSON (as exported by the service)")
                      ->check(CLI::ExistingFile);
  auto* dmodel = diag->add_option("--model", model_path, "Model JSON, trained on --records first")->check(CLI::ExistingFile);
  auto* drec = diag->add_option("--records", records_path, "Citation CSV for --model")->check(CLI::ExistingFile);
  ver_opt->excludes(dmodel)->excludes(drec);
  dmodel->needs(drec);
  drec->needs(dmodel);
  diag->add_option("--problem", problem, "Problem id")->required();
  diag->add_option("--evidence", evidence, "cause=true|false (repeatable)")->take_all()->allow_extra_args(false);
  flags.add_to(diag);

  // analytics
  AnalyticsInputs in;
  std::string iteration, data_path, basis = "function_points";
  auto* pareto = app.add_subcommand("pareto", "Pareto chart of defect natures");
  in.add_to(pareto, false);
  pareto->add_option("--iteration", iteration, "Iteration id")->required();
  pareto->add_option("--data", data_path, "Also write the chart description JSON here");

  auto* uchart = app.add_subcommand("uchart", "U-chart of defects per unit");
  in.add_to(uchart, true);
  uchart->add_option("--iteration", iteration, "Iteration id")->required();
  uchart->add_option("--basis", basis, "function_points or hours")->capture_default_str();
  uchart->add_option("--data", data_path, "Chart description JSON (default u-chart-<iteration>.json)");

  auto* density = app.add_subcommand("density", "Defects per function point");
  in.add_to(density, true);
  density->add_option("--iteration", iteration, "Restrict to one iteration");
  auto* efficiency = app.add_subcommand("efficiency", "Defects per inspection hour");
  in.add_to(efficiency, true);
  efficiency->add_option("--iteration", iteration, "Restrict to one iteration");

  // report
  std::string session_path, json_out;
  auto* report = app.add_subcommand("report", "Render a session report");
  report->add_option("--session", session_path, "Session JSON from the store")->required()->check(CLI::ExistingFile);
  report->add_option("--model", model_path, "Model JSON of the session's version")->required()->check(CLI::ExistingFile);
  report->add_option("--json", json_out, "Also write the structured report here");

  // serve
  int port = 8080;
  std::string store_path;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--store-path", store_path, "Store directory (default $DCA_STORE_PATH or ./dca-store)");
  std::string host = "127.0.0.1";
  serve->add_option("--host", host, "Bind address")->capture_default_str();

  // synth-records
  std::string profile_path;
  std::uint64_t seed = 0;
  auto* synth = app.add_subcommand("synth-records", "Generate synthetic citation records");
  synth->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--profile", profile_path, "Synthetic profile JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("-o,--out", out_path, "Citation CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (validate->parsed()) {
    auto m = model::parse_model(read(model_path));
    auto compiled = model::compile(m);
    std::cout << "valid: " << m.problems.size() << " problems, " << m.causes.size() << " causes in "
              << m.cause_categories.size() << " categories, " << m.effects.size() << " effects in "
              << m.effect_categories.size() << " categories\n";
    for (const auto& w : compiled.warnings) std::cout << "warning: " << w << "\n";
  } else if (compile->parsed()) {
    auto compiled = model::compile(model::parse_model(read(model_path)), {initial_prior});
    write(out_path, bn::serialize_network(compiled.network));
  } else if (learn_cmd->parsed()) {
    if (!network_path.empty()) {
      auto net = bn::parse_network(read(network_path));
      auto records = bn::parse_records_csv(read(records_path));
      auto cfg = flags.config();
      auto res = flags.restarts > 1 ? learn::em_learn_best_of(net, records, cfg, flags.restarts)
                                    : learn::em_learn(net, records, cfg);
      std::cout << learn_summary(res.iterations, res.converged, res.final_loglik) << cpd_lines(res.network);
      if (!out_path.empty()) write(out_path, bn::serialize_network(res.network));
    } else if (!model_path.empty()) {
      auto v = train_model(model_path, records_path, flags);
      std::cout << learn_summary(v.learn.iterations, v.learn.converged, v.learn.final_loglik)
                << "records " << v.records.size() << "\n";
      if (!out_path.empty()) write(out_path, session::version_to_json(v).dump(2) + "\n");
    } else {
      throw Error(Errc::invalid_argument, "learn needs --network or --model");
    }
  } else if (diag->parsed()) {
    session::ModelVersion v;
    if (!version_path.empty())
      v = session::version_from_json(read_json(version_path));
    else if (!model_path.empty())
      v = train_model(model_path, records_path, flags);
    else
      throw Error(Errc::invalid_argument, "diagnose needs --version or --model with --records");
    std::cout << service::body(service::diagnose_json(v, problem, parse_evidence(evidence)));
  } else if (pareto->parsed()) {
    auto j = service::pareto_json(in.load_defects(), iteration);
    std::cout << analytics::render_pareto(analytics::pareto(analytics::defects_of(in.load_defects(), iteration)));
    if (!data_path.empty()) write(data_path, service::body(j));
  } else if (uchart->parsed()) {
    auto stats = in.load_stats();
    auto defects = in.load_defects();
    auto b = analytics::parse_basis(basis);
    auto result = analytics::u_chart(service::stats_for(stats, iteration), defects, b);
    std::cout << analytics::render_u_chart(result);
    write(data_path.empty() ? "u-chart-" + iteration + ".json" : data_path,
          service::body(service::u_chart_json(stats, defects, iteration, b)));
  } else if (density->parsed() || efficiency->parsed()) {
    std::optional<std::string> only;
    if (!iteration.empty()) only = iteration;
    auto rows = service::metrics_json(in.load_stats(), in.load_defects(), only);
    std::cout << (density->parsed() ? metrics_table(rows, "density", "defects/FP")
                                    : metrics_table(rows, "efficiency", "defects/hour"));
  } else if (report->parsed()) {
    auto s = session::session_from_json(read_json(session_path));
    auto r = session::build_report(s, model::parse_model(read(model_path)));
    std::cout << r.text;
    if (!json_out.empty()) write(json_out, service::body(r.document));
  } else if (serve->parsed()) {
    if (store_path.empty()) {
      const char* env = std::getenv("DCA_STORE_PATH");
      store_path = env && *env ? env : "dca-store";
    }
    service::Store store(store_path);
    service::Api api(store);
    httplib::Server server;
    service::mount(server, api);
    g_server = &server;
    std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
    std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
    if (!server.bind_to_port(host, port)) throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
    std::cerr << "serving " << store_path << " on http://" << host << ":" << port << "\n";
    server.listen_after_bind();
  } else if (synth->parsed()) {
    auto m = model::parse_model(read(model_path));
    auto profile = model::synthetic_profile_from_json(read_json(profile_path));
    write(out_path, model::format_citations_csv(m, model::synthetic_citations(m, profile, seed)));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
    return is_input_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
