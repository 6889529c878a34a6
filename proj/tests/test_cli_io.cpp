#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "segopt/commands.hpp"
#include "segopt/errors.hpp"
#include "segopt/instance.hpp"

using namespace segopt;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

const char* kThreeValue = R"({
  "values": [1, 2, 3],
  "weights": ["17/24", "1/8", "1/6"],
  "cost": {"type": "isoelastic", "gamma": 2}
})";

// Message of the InvalidInstance raised while parsing, or "" if none.
std::string parse_error(const std::string& text) {
  try {
    parse_instance_text(text);
  } catch (const Error& e) {
    return e.kind() == ErrorKind::InvalidInstance ? e.message() : std::string("other");
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("segopt_cli_io_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("parse reads rationals and defaults") {
  const auto inst = parse_instance_text(kThreeValue);
  CHECK(inst.grid.size() == 3);
  CHECK(inst.xstar[0] == Approx(17.0 / 24.0).epsilon(1e-15));
  CHECK(inst.cost.type() == CostType::Isoelastic);
  CHECK(inst.cost.gamma() == 2.0);
  CHECK(inst.options.h_grid == kDefaultHGrid);
  CHECK(inst.options.lambda_steps == 101);
}

TEST_CASE("emit and parse reach a fixed point") {
  const std::string texts[] = {
      kThreeValue,
      R"({"values": [1, 2], "weights": [0.25, 0.75], "cost": {"type": "step", "kappa": [0, 0.75]},
          "options": {"h_grid": 512, "mesh": 0.03125}})",
      R"({"values": [0.5, 1.5, 2.5], "weights": [0.2, 0.3, 0.5],
          "cost": {"type": "sampled", "q": [0, 1, 2], "c": [0, 0.5, 2]}})"};
  for (const auto& t : texts) {
    const auto a = parse_instance_text(t);
    const std::string once = emit_instance(a);
    const auto b = parse_instance_text(once);
    CHECK(emit_instance(b) == once);
    for (std::size_t k = 0; k < a.grid.size(); ++k) {
      CHECK(b.grid[k] == Approx(a.grid[k]).epsilon(1e-12));
      CHECK(b.xstar[k] == Approx(a.xstar[k]).epsilon(1e-12));
    }
    CHECK(b.options.h_grid == a.options.h_grid);
    CHECK(b.options.mesh == Approx(a.options.mesh));
  }
}

TEST_CASE("invalid instances are rejected with a line number") {
  const std::string heavy = "{\n  \"values\": [1, 2],\n  \"weights\": [1.0, 0.5],\n"
                            "  \"cost\": {\"type\": \"isoelastic\", \"gamma\": 2}\n}";
  CHECK(parse_error(heavy).rfind("line 3:", 0) == 0);

  const std::string decreasing = "{\n  \"values\": [1, 2],\n  \"weights\": [0.5, 0.5],\n"
                                 "  \"cost\": {\"type\": \"step\",\n    \"kappa\": [0.5, 0.25]}\n}";
  CHECK(parse_error(decreasing).rfind("line 5:", 0) == 0);

  const std::string unknown = "{\n  \"values\": [1, 2],\n  \"weights\": [0.5, 0.5],\n"
                              "  \"cost\": {\"type\": \"isoelastic\", \"gamma\": 2},\n  \"colour\": 1\n}";
  const auto u = parse_error(unknown);
  CHECK(u.rfind("line 5:", 0) == 0);
  CHECK(u.find("colour") != std::string::npos);

  CHECK(parse_error("{\n  \"values\": [1, 2,\n}").rfind("line ", 0) == 0);
  CHECK(!parse_error(R"({"values": [2, 1], "weights": [0.5, 0.5], "cost": {"type": "isoelastic", "gamma": 2}})").empty());
  CHECK(!parse_error(R"({"values": [1, 2], "weights": [0.5], "cost": {"type": "isoelastic", "gamma": 2}})").empty());
  CHECK(!parse_error(R"({"values": [1, 2], "weights": [0.5, 0.5], "cost": {"type": "isoelastic", "gamma": 1}})").empty());
  CHECK(!parse_error(R"({"values": [1, 2], "weights": [0.5, 0.5], "cost": {"type": "cubic"}})").empty());
  CHECK(!parse_error(R"({"values": [1, 2], "weights": ["1/0", 0.5], "cost": {"type": "isoelastic", "gamma": 2}})")
             .empty());
  CHECK(!parse_error(R"({"values": [1, 2], "weights": [0.5, 0.5], "cost": {"type": "isoelastic", "gamma": 2},
                        "options": {"mesh": 0.001}})")
             .empty());
  CHECK(!parse_error(R"({"values": [1, 2], "weights": [0.5, 0.5], "cost": {"type": "isoelastic", "gamma": 2},
                        "options": {"h_grid": 4}})")
             .empty());
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(Error(ErrorKind::InvalidInstance, "")) == kExitInvalid);
  CHECK(exit_code_for(Error(ErrorKind::BudgetExceeded, "")) == kExitInvalid);
  CHECK(exit_code_for(Error(ErrorKind::NotInPriceRegion, "")) == kExitInvalid);
  CHECK(exit_code_for(Error(ErrorKind::Infeasible, "")) == kExitFailure);
  CHECK(exit_code_for(Error(ErrorKind::NumericalStall, "")) == kExitFailure);
}

TEST_CASE("solve writes a verified report") {
  const auto dir = scratch("solve");
  std::ostringstream log;
  CHECK(run_command("solve", parse_instance_text(kThreeValue), dir, log) == kExitOk);
  const auto j = read_json(dir / "report.json");
  CHECK(j["value"].get<double>() == Approx(193.0 / 640.0).epsilon(1e-6));
  CHECK(j["verification"]["all_pass"].get<bool>());
  CHECK(j["segments"].get<int>() == 2);
  CHECK(line_count(dir / "segments.csv") == 1 + 5);  // the second segment omits the middle value
  CHECK(line_count(dir / "rent_curves.csv") == 1 + 2 * 257);
  fs::remove_all(dir);
}

TEST_CASE("every command runs on a small instance") {
  const auto inst = parse_instance_text(
      R"({"values": [1, 2], "weights": [0.6, 0.4], "cost": {"type": "isoelastic", "gamma": 2},
          "options": {"lambda_steps": 11, "mesh": 0.0625}})");
  for (const auto& cmd : command_names()) {
    if (cmd == "discrete") continue;
    const auto dir = scratch(cmd);
    std::ostringstream log;
    CHECK_MESSAGE(run_command(cmd, inst, dir, log) == kExitOk, cmd);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(read_json(dir / "report.json")["command"] == cmd);
    fs::remove_all(dir);
  }
  const auto frontier = scratch("frontier_rows");
  std::ostringstream log;
  run_command("frontier", inst, frontier, log);
  CHECK(line_count(frontier / "frontier.csv") == 1 + 4 * 11);
  fs::remove_all(frontier);
}

TEST_CASE("discrete command needs a step cost") {
  const auto dir = scratch("discrete");
  std::ostringstream log;
  const auto step = parse_instance_text(
      R"({"values": [1, 2, 3], "weights": [0.5, "1/6", "1/3"], "cost": {"type": "step", "kappa": [0]}})");
  CHECK(run_command("discrete", step, dir, log) == kExitOk);
  CHECK(fs::exists(dir / "pareto_demand.csv"));
  CHECK(fs::exists(dir / "breakpoints.csv"));
  bool threw = false;
  try {
    run_command("discrete", parse_instance_text(kThreeValue), dir, log);
  } catch (const Error& e) {
    threw = e.kind() == ErrorKind::InvalidInstance;
  }
  CHECK(threw);
  fs::remove_all(dir);
}
