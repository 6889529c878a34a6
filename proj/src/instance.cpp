#include "segopt/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "segopt/errors.hpp"

namespace segopt {

using nlohmann::json;

std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

// Line of the first occurrence of "key" in the source, for diagnostics.
std::size_t line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 1;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::size_t line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

[[noreturn]] void fail(const std::string& text, const std::string& key, const std::string& why) {
  throw Error(ErrorKind::InvalidInstance, "line " + std::to_string(line_of(text, key)) + ": " + why);
}

void only_keys(const std::string& text, const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (!allowed.count(k)) fail(text, k, "unknown key '" + k + "' in " + where);
  }
}

// A number, or a string "p/q" for exact hand entry of rationals.
double number(const std::string& text, const std::string& key, const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::istringstream in(s);
    double p = 0.0, q = 1.0;
    char slash = 0;
    if (in >> p) {
      if (in >> slash) {
        if (slash == '/' && (in >> q) && in.peek() == EOF && q != 0.0) return p / q;
      } else {
        return p;
      }
    }
    fail(text, key, "cannot read '" + s + "' as a number in '" + key + "'");
  }
  fail(text, key, "'" + key + "' must hold numbers");
}

std::vector<double> numbers(const std::string& text, const json& obj, const std::string& key) {
  if (!obj.contains(key)) fail(text, key, "missing key '" + key + "'");
  const auto& arr = obj.at(key);
  if (!arr.is_array() || arr.empty()) fail(text, key, "'" + key + "' must be a nonempty array");
  std::vector<double> out;
  for (const auto& v : arr) out.push_back(number(text, key, v));
  return out;
}

std::size_t count_option(const std::string& text, const json& opts, const std::string& key, std::size_t lo,
                         std::size_t hi, std::size_t dflt) {
  if (!opts.contains(key)) return dflt;
  const auto& v = opts.at(key);
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(lo) ||
      v.get<long long>() > static_cast<long long>(hi))
    fail(text, key, "'" + key + "' must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<std::size_t>(v.get<long long>());
}

double real_option(const std::string& text, const json& opts, const std::string& key, double lo, double hi,
                   double dflt) {
  if (!opts.contains(key)) return dflt;
  const double v = number(text, key, opts.at(key));
  if (!(v >= lo && v <= hi)) fail(text, key, "'" + key + "' must lie in [" + fmt(lo) + ", " + fmt(hi) + "]");
  return v;
}

template <class F>
auto guarded(const std::string& text, const std::string& key, F f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(text, key, e.message());
  }
}

}  // namespace

ProblemInstance parse_instance_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidInstance,
                "line " + std::to_string(line_at(text, e.byte > 0 ? e.byte - 1 : 0)) + ": malformed JSON");
  }
  if (!doc.is_object()) throw Error(ErrorKind::InvalidInstance, "line 1: instance must be a JSON object");
  only_keys(text, doc, {"values", "weights", "cost", "options"}, "instance");

  const auto values = numbers(text, doc, "values");
  const auto weights = numbers(text, doc, "weights");
  if (weights.size() != values.size()) fail(text, "weights", "'weights' and 'values' differ in length");
  ValueGrid grid = guarded(text, "values", [&] { return ValueGrid(values); });
  Market xstar = guarded(text, "weights", [&] { return make_market(weights); });

  if (!doc.contains("cost") || !doc.at("cost").is_object()) fail(text, "cost", "'cost' must be an object");
  const auto& c = doc.at("cost");
  if (!c.contains("type") || !c.at("type").is_string()) fail(text, "cost", "'cost.type' must be a string");
  const auto type = c.at("type").get<std::string>();
  CostSpec cost = CostSpec::isoelastic(2.0);
  if (type == "isoelastic") {
    only_keys(text, c, {"type", "gamma"}, "cost");
    if (!c.contains("gamma")) fail(text, "cost", "isoelastic cost needs 'gamma'");
    const double g = number(text, "gamma", c.at("gamma"));
    cost = guarded(text, "gamma", [&] { return CostSpec::isoelastic(g); });
  } else if (type == "step") {
    only_keys(text, c, {"type", "kappa"}, "cost");
    const auto kappa = numbers(text, c, "kappa");
    cost = guarded(text, "kappa", [&] { return CostSpec::step(kappa); });
  } else if (type == "sampled") {
    only_keys(text, c, {"type", "q", "c"}, "cost");
    const auto q = numbers(text, c, "q");
    const auto cc = numbers(text, c, "c");
    cost = guarded(text, "q", [&] { return CostSpec::sampled(q, cc); });
  } else {
    fail(text, "type", "unknown cost type '" + type + "'");
  }

  InstanceOptions opt;
  if (doc.contains("options")) {
    const auto& o = doc.at("options");
    if (!o.is_object()) fail(text, "options", "'options' must be an object");
    only_keys(text, o, {"h_grid", "lambda_steps", "mesh", "q_step", "oset_den"}, "options");
    opt.h_grid = count_option(text, o, "h_grid", 16, 1u << 20, opt.h_grid);
    opt.lambda_steps = count_option(text, o, "lambda_steps", 2, 100001, opt.lambda_steps);
    opt.mesh = real_option(text, o, "mesh", 1.0 / 64.0, 0.5, opt.mesh);
    opt.q_step = real_option(text, o, "q_step", kMinQStep, 1.0, opt.q_step);
    opt.oset_den = count_option(text, o, "oset_den", 1, 400, opt.oset_den);
  }
  return {std::move(grid), std::move(xstar), std::move(cost), opt};
}

ProblemInstance parse_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInstance, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance_text(ss.str());
}

std::string emit_instance(const ProblemInstance& inst) {
  auto list = [](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
  };
  std::string cost;
  switch (inst.cost.type()) {
    case CostType::Isoelastic: cost = "{\"type\": \"isoelastic\", \"gamma\": " + fmt(inst.cost.gamma()) + "}"; break;
    case CostType::StepMC: cost = "{\"type\": \"step\", \"kappa\": " + list(inst.cost.slopes()) + "}"; break;
    case CostType::SampledConvex:
      cost = "{\"type\": \"sampled\", \"q\": " + list(inst.cost.sample_q()) + ", \"c\": " + list(inst.cost.sample_c()) +
             "}";
      break;
  }
  const auto& o = inst.options;
  std::string s = "{\n";
  s += "  \"values\": " + list(inst.grid.values()) + ",\n";
  s += "  \"weights\": " + list(inst.xstar.x) + ",\n";
  s += "  \"cost\": " + cost + ",\n";
  s += "  \"options\": {\"h_grid\": " + std::to_string(o.h_grid) + ", \"lambda_steps\": " +
       std::to_string(o.lambda_steps) + ", \"mesh\": " + fmt(o.mesh) + ", \"q_step\": " + fmt(o.q_step) +
       ", \"oset_den\": " + std::to_string(o.oset_den) + "}\n";
  return s + "}\n";
}

}  // namespace segopt
