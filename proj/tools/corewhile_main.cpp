#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "corewhile/report.hpp"

using namespace corewhile;

int main(int argc, char** argv) {
  CLI::App app{"corewhile: a concurrent while-language with jumps, rely/guarantee triples,\n"
               "simulation-based correspondence, lowering to jump form, and fairness-based\n"
               "liveness checking over finite state spaces"};
  app.require_subcommand(0, 0);

  std::string command, model_path, query_name, json_path;
  size_t budget_nodes = 0, depth = 0;
  bool timings = false;

  app.add_option("command", command,
                 "check-triple | check-triple-rel | derive | derive-seq | check-corr | "
                 "check-mutual | lower | check-termination | enumerate | classify | graph-stats")
      ->required();
  app.add_option("--model", model_path, "model file")->required();
  app.add_option("--query", query_name, "query name declared in the model")->required();
  app.add_option("--budget", budget_nodes, "node budget override");
  app.add_option("--depth", depth, "depth override for enumerate");
  app.add_option("--json", json_path, "write the machine-readable report here");
  app.add_flag("--timings", timings, "include wall-clock timings in the JSON report");

  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(model_path);
    if (!in) {
      std::cerr << "cannot open model file '" << model_path << "'\n";
      return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    Model m = parse_model(buf.str());

    auto qit = m.queries.find(query_name);
    if (qit == m.queries.end()) {
      std::cerr << "no query named '" << query_name << "' in " << model_path << "\n";
      return 2;
    }
    Query q = qit->second;
    if (q.command != command) {
      std::cerr << "query '" << query_name << "' is a " << q.command << " query, not " << command
                << "\n";
      return 2;
    }
    if (depth) q.depth = depth;

    Budget budget = Budget::from_env();
    if (budget_nodes) budget.max_nodes = budget_nodes;

    Report r = run_query(m, q, budget);
    std::cout << r.human << "\n";
    if (!json_path.empty()) {
      std::ofstream out(json_path);
      out << r.to_json(timings).dump(2) << "\n";
    }
    return r.exit_code;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ArgError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  }
}
