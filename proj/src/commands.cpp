#include "segopt/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "json.hpp"

#include "segopt/analysis.hpp"
#include "segopt/discrete_goods.hpp"
#include "segopt/errors.hpp"
#include "segopt/frontier.hpp"
#include "segopt/oracle.hpp"
#include "segopt/screening.hpp"

namespace segopt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Numbers in reports carry 12 significant digits; non-finite values become null.
json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(fmt(v));
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json opt_nums(const std::vector<std::optional<double>>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x ? num(*x) : json(nullptr));
  return a;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : out_(path) {
    if (!out_) throw Error(ErrorKind::InvalidInstance, "cannot write '" + path.string() + "'");
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... cells) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(cells)), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return std::isfinite(v) ? fmt(v) : std::string(); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidInstance, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

SolveOptions solve_options(const ProblemInstance& inst) {
  SolveOptions o;
  o.h_grid = inst.options.h_grid;
  return o;
}

json verification_json(const VerificationReport& v) {
  return {{"aggregation_error", num(v.aggregation.max_error)},
          {"aggregation_pass", v.aggregation.pass},
          {"all_regular", std::all_of(v.regular.begin(), v.regular.end(), [](bool b) { return b; })},
          {"support_pass", v.support_pass},
          {"hazard_average", opt_nums(v.hazard_average)},
          {"hazard_average_pass", v.hazard_average_pass},
          {"achieved", num(v.achieved)},
          {"bound", num(v.bound)},
          {"achieved_pass", v.achieved_pass},
          {"all_pass", v.all_pass},
          {"first_failure", v.first_failure}};
}

int cmd_solve(const ProblemInstance& inst, const fs::path& out, std::ostream& log) {
  const auto report = solve_bound(inst.xstar, inst.grid, inst.cost, Objective::consumer(), solve_options(inst));
  const auto seg = build_segmentation(report, inst.xstar, inst.grid, inst.cost);
  const auto ver = verify_segmentation(seg, inst.xstar, inst.grid, inst.cost, report);
  const double base = no_segmentation_surplus(inst.xstar, inst.grid, inst.cost);
  json j = {{"command", "solve"},
            {"K", inst.grid.size()},
            {"value", num(report.value)},
            {"no_segmentation", num(base)},
            {"gain", num(report.value - base)},
            {"hD", opt_nums(report.hD)},
            {"mu", nums(report.mu)},
            {"kkt_residual", num(report.kkt_residual)},
            {"fast_path_used", report.fast_path_used},
            {"slopes_nondecreasing", report.slopes_nondecreasing},
            {"cutoff", report.cutoff ? json(*report.cutoff) : json(nullptr)},
            {"segments", seg.size()},
            {"verification", verification_json(ver)}};
  write_json(out / "report.json", j);
  write_segments_csv(out / "segments.csv", seg, inst.grid, inst.cost);
  write_rent_curves_csv(out / "rent_curves.csv", report);
  log << "bound " << fmt(report.value) << " with " << seg.size() << " segments; verification "
      << (ver.all_pass ? "passed" : "FAILED: " + ver.first_failure) << '\n';
  return ver.all_pass ? kExitOk : kExitFailure;
}

int cmd_frontier(const ProblemInstance& inst, const fs::path& out, std::ostream& log) {
  FrontierOptions fo;
  fo.lambda_steps = inst.options.lambda_steps;
  fo.solve = solve_options(inst);
  const auto pts = frontier_sweep(inst.xstar, inst.grid, inst.cost, fo);
  Csv csv(out / "frontier.csv", "lambda,e1,e2,profit,cs,bound,tight");
  std::size_t tight = 0, verified = 0, unverified_tight = 0;
  for (const auto& p : pts) {
    csv.row(p.lambda, p.e.e1, p.e.e2, p.profit, p.consumer, p.bound, p.tight);
    tight += p.tight;
    verified += p.verified;
    unverified_tight += (p.tight && !p.verified);
  }
  const auto agg = surplus_accounts(inst.xstar, inst.grid, inst.cost);
  const double concavity = frontier_concavity_violation(pts);
  const double containment = containment_violation(pts, agg.profit, agg.consumer);
  json j = {{"command", "frontier"},
            {"points", pts.size()},
            {"first_best_welfare", num(first_best_welfare(inst.xstar, inst.grid, inst.cost))},
            {"aggregate", {{"profit", num(agg.profit)}, {"cs", num(agg.consumer)}}},
            {"tight_points", tight},
            {"verified_points", verified},
            {"concavity_violation", num(concavity)},
            {"containment_violation", num(containment)}};
  write_json(out / "report.json", j);
  log << pts.size() << " frontier points, " << tight << " tight, " << verified << " verified\n";
  return (unverified_tight == 0 && concavity <= 1e-8 && containment <= 1e-8) ? kExitOk : kExitFailure;
}

int cmd_diagnose(const ProblemInstance& inst, const fs::path& out, std::ostream& log) {
  const auto test = no_seg_test(inst.xstar, inst.grid, inst.cost);
  const auto report = solve_bound(inst.xstar, inst.grid, inst.cost, Objective::consumer(), solve_options(inst));
  const auto seg = build_segmentation(report, inst.xstar, inst.grid, inst.cost);
  const auto q = quality_report(seg, inst.grid, inst.cost);
  Csv csv(out / "quality.csv", "k,segment_id,q,eta");
  for (std::size_t k = 0; k < inst.grid.size(); ++k) {
    for (std::size_t s = 0; s < q.q.size(); ++s) {
      if (!q.q[s][k]) continue;
      const double eta = (k < q.eta[s].size() && q.eta[s][k]) ? *q.eta[s][k] : std::nan("");
      csv.row(k, s, *q.q[s][k], eta);
    }
  }
  json j = {{"command", "diagnose"},
            {"in_O", test.in_O},
            {"condition", test.condition},
            {"index", test.index ? json(*test.index) : json(nullptr)},
            {"envelope_gap", nums(test.gap)},
            {"slope", nums(test.slope)},
            {"segments", seg.size()},
            {"monotone", q.monotone},
            {"dispersion", nums(q.dispersion)},
            {"q_floor", nums(q.q_floor)},
            {"q_max", num(q.q_max)},
            {"dispersed_0.1", q.dispersed_count(0.1)},
            {"dispersed_0.01", q.dispersed_count(0.01)},
            {"dispersion_bound_holds", q.dispersion_bound_holds(0.1) && q.dispersion_bound_holds(0.01)},
            {"iso_pattern", q.iso_pattern ? json(*q.iso_pattern) : json(nullptr)},
            {"cutoff", q.cutoff ? json(*q.cutoff) : json(nullptr)}};
  if (inst.grid.size() == 3) {
    const auto scan = o_set_scan(inst.grid, inst.cost, inst.options.oset_den);
    Csv oset(out / "oset.csv", "x1,x2,in_O,gamma");
    const double gamma = inst.cost.type() == CostType::Isoelastic ? inst.cost.gamma() : std::nan("");
    for (const auto& p : scan.points) oset.row(p.x1, p.x2, p.in_O, gamma);
    j["oset"] = {{"points", scan.points.size()}, {"in_O", scan.in_count}};
  }
  write_json(out / "report.json", j);
  log << (test.in_O ? "no segmentation raises consumer surplus" : "segmentation helps; first failure: " + test.condition)
      << '\n';
  return kExitOk;
}

int cmd_screen(const ProblemInstance& inst, const fs::path& out, std::ostream& log) {
  const auto menu = optimal_menu(inst.xstar, inst.grid, inst.cost);
  const auto acc = surplus_accounts(inst.xstar, inst.grid, inst.cost);
  json offered = json::array();
  for (bool b : menu.offered) offered.push_back(b);
  json j = {{"command", "screen"},
            {"q", nums(menu.q)},
            {"t", nums(menu.t)},
            {"offered", offered},
            {"ironed_virtual_values", nums(ironed_virtual_values(inst.xstar, inst.grid))},
            {"regular", acc.regular},
            {"profit", num(acc.profit)},
            {"cs", num(acc.consumer)},
            {"welfare", num(acc.welfare)}};
  if (!acc.regular) {
    const auto parts = regular_decomposition(inst.xstar, inst.grid, inst.cost);
    j["regular_parts"] = parts.size();
    write_segments_csv(out / "segments.csv", parts, inst.grid, inst.cost);
  }
  write_json(out / "report.json", j);
  log << "profit " << fmt(acc.profit) << ", consumer surplus " << fmt(acc.consumer) << '\n';
  return kExitOk;
}

int cmd_discrete(const ProblemInstance& inst, const fs::path& out, std::ostream& log) {
  if (inst.cost.type() != CostType::StepMC)
    throw Error(ErrorKind::InvalidInstance, "the discrete command needs a step cost");
  const auto& kappa = inst.cost.slopes();
  const auto prices = optimal_increment_prices(inst.xstar, inst.grid, kappa);
  json j = {{"command", "discrete"}, {"rho", nums(prices.rho)}, {"profit", nums(prices.profit)}};
  json unsold = json::array();
  for (bool b : prices.unsold) unsold.push_back(b);
  j["unsold"] = unsold;
  const auto ext = extreme_point_test(inst.xstar, inst.grid, prices.rho, kappa);
  j["extreme"] = ext.is_extreme;
  j["extreme_r"] = nums(ext.r);
  try {
    const auto best = unconstrained_cs_max(inst.grid, kappa);
    PiecewiseParetoSpec spec{kappa, best.r};
    const auto pareto = piecewise_pareto(inst.grid, spec);
    Csv csv(out / "pareto_demand.csv", "v,D,region");
    for (std::size_t k = 0; k < inst.grid.size(); ++k) csv.row(inst.grid[k], pareto.demand[k], pareto.region[k]);
    j["unconstrained"] = {{"r", nums(best.r)}, {"rho", nums(best.rho)}, {"cs", num(best.consumer)},
                          {"candidates", best.candidates}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::SearchSpaceTooLarge && e.kind() != ErrorKind::InvalidInstance) throw;
    j["unconstrained"] = {{"skipped", e.what()}};
  }
  const double top = inst.grid.top();
  Csv csv(out / "breakpoints.csv", "c,rho1,rho2,bundled");
  for (int i = 0; i < 96; ++i) {
    const double c = top * i / 100.0;
    const auto t = two_goods_limit(c, 0.0, top);
    csv.row(c, t.rho1, t.rho2, t.bundles);
  }
  j["c_bar"] = num(two_goods_limit(0.0, 0.0, top).c_bar);
  write_json(out / "report.json", j);
  log << "increment prices computed for " << kappa.size() << " increments\n";
  return kExitOk;
}

int cmd_oracle(const ProblemInstance& inst, const fs::path& out, std::ostream& log) {
  const auto report = solve_bound(inst.xstar, inst.grid, inst.cost, Objective::consumer(), solve_options(inst));
  const auto brute = brute_segment(inst.xstar, inst.grid, inst.cost, inst.options.mesh, 3, Objective::consumer(),
                                   inst.options.q_step);
  const auto exact = surplus_accounts(inst.xstar, inst.grid, inst.cost);
  const auto enumerated = brute_accounts(inst.xstar, inst.grid, inst.cost, inst.options.q_step);
  const double excess = brute.value - report.value;
  json j = {{"command", "oracle"},
            {"bound", num(report.value)},
            {"brute_value", num(brute.value)},
            {"gap", num(report.value - brute.value)},
            {"mesh", num(inst.options.mesh)},
            {"q_step", num(inst.options.q_step)},
            {"candidates", brute.candidates},
            {"brute_segments", brute.segmentation.size()},
            {"menu_profit", num(exact.profit)},
            {"brute_menu_profit", num(enumerated.profit)}};
  write_json(out / "report.json", j);
  write_segments_csv(out / "segments.csv", brute.segmentation, inst.grid, inst.cost);
  log << "bound " << fmt(report.value) << ", brute force " << fmt(brute.value) << '\n';
  return excess <= 1e-9 ? kExitOk : kExitFailure;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"solve", "frontier", "diagnose", "screen", "discrete", "oracle"};
  return names;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidInstance:
    case ErrorKind::InvalidCutoffs:
    case ErrorKind::NotInPriceRegion:
    case ErrorKind::PreconditionViolated:
    case ErrorKind::BudgetExceeded:
    case ErrorKind::SearchSpaceTooLarge: return kExitInvalid;
    default: return kExitFailure;
  }
}

int run_command(const std::string& command, const ProblemInstance& inst, const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  if (command == "solve") return cmd_solve(inst, out_dir, log);
  if (command == "frontier") return cmd_frontier(inst, out_dir, log);
  if (command == "diagnose") return cmd_diagnose(inst, out_dir, log);
  if (command == "screen") return cmd_screen(inst, out_dir, log);
  if (command == "discrete") return cmd_discrete(inst, out_dir, log);
  if (command == "oracle") return cmd_oracle(inst, out_dir, log);
  throw Error(ErrorKind::InvalidInstance, "unknown command '" + command + "'");
}

void write_segments_csv(const fs::path& path, const Segmentation& seg, const ValueGrid& grid, const CostSpec& cost) {
  Csv csv(path, "segment_id,weight,v,x,h,q,payment");
  for (std::size_t s = 0; s < seg.size(); ++s) {
    const auto& x = seg[s].market;
    const auto st = local_stats(x, grid);
    const auto menu = optimal_menu(x, grid, cost);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!x.supported(k)) continue;
      csv.row(s, seg[s].weight, grid[k], x[k], st.hazard[k], menu.q[k], menu.t[k]);
    }
  }
}

void write_rent_curves_csv(const fs::path& path, const SolveReport& report, std::size_t samples) {
  Csv csv(path, "k,h,u,ubar,kind,lambda,e1,e2");
  samples = std::max<std::size_t>(samples, 2);
  for (std::size_t k = 0; k < report.envelopes.size(); ++k) {
    const auto& env = report.envelopes[k];
    const auto& obj = env.obj;
    for (std::size_t i = 0; i < samples; ++i) {
      const double h = obj.v() * static_cast<double>(i) / static_cast<double>(samples - 1);
      csv.row(k, h, obj(h), env(h), std::string(to_string(obj.kind())), obj.lambda(), obj.orientation().e1,
              obj.orientation().e2);
    }
  }
}

}  // namespace segopt
