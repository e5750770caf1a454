#ifndef COREWHILE_REPORT_HPP
#define COREWHILE_REPORT_HPP

#include <string>

#include <json.hpp>

#include "corewhile/model.hpp"

namespace corewhile {

struct Report {
  std::string query;
  std::string command;
  bool pass = true;
  int exit_code = 0;  // 0 pass, 1 fail-with-witness, 2 usage/resource
  nlohmann::json details;
  std::string human;
  double timing_ms = 0.0;

  nlohmann::json to_json(bool with_timing) const;
};

Report run_query(const Model& m, const Query& q, const Budget& budget);

nlohmann::json computation_json(const SpacePtr& space, const Computation& c);
nlohmann::json lasso_json(const SpacePtr& space, const CodeMap& rho, const Lasso& l);

}  // namespace corewhile

#endif
