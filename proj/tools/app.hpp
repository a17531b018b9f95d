#ifndef CCWB_TOOLS_APP_HPP
#define CCWB_TOOLS_APP_HPP

#include <ostream>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace ccwb::app {

enum class Status { Ok, Infeasible, NotFound };
const char* to_string(Status s);

struct Report {
  Status status = Status::Ok;
  json result = json::object();
  std::vector<std::string> lines;  // human-readable body
};

const std::vector<std::string>& command_names();

// Runs one subcommand on a loaded scenario. Throws ccwb::Error subclasses.
Report run_command(const std::string& command, const Scenario& scenario);

// Full machine record: inputs, tolerances, status and result.
json make_record(const std::string& command, const Scenario& scenario, const Report& report);
std::string render_text(const std::string& command, const Scenario& scenario, const Report& report);

// Entry point shared by the ccwb executable and the tests. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ccwb::app

#endif  // CCWB_TOOLS_APP_HPP
