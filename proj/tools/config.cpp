#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "parvi/windexpr.hpp"

namespace parvi::cli {
namespace {

Vec2 read_vec2(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() != 2) throw ConfigError(what + " must be a two-element list [x, y]");
  return vec2(node[0].as<double>(), node[1].as<double>());
}

WindPtr read_wind(const YAML::Node& wind) {
  if (!wind) throw ConfigError("missing 'wind' section");
  if (wind["builtin"]) {
    const auto name = wind["builtin"].as<std::string>();
    if (name == "zermelo") return zermelo_wind();
    if (name == "fuel") return fuel_wind();
    if (name == "zero") return zero_wind();
    throw ConfigError("unknown built-in wind '" + name + "' (expected zermelo, fuel or zero)");
  }
  if (wind["constant"]) return constant_wind(read_vec2(wind["constant"], "wind.constant"));
  if (wind["w1"] && wind["w2"]) {
    try {
      return expr::expression_wind(wind["w1"].as<std::string>(), wind["w2"].as<std::string>());
    } catch (const ExprError& e) {
      throw ConfigError(std::string("wind expression: ") + e.what());
    }
  }
  throw ConfigError("wind needs 'builtin', 'constant' or both 'w1' and 'w2'");
}

LagrangianKind read_lagrangian(const std::string& s) {
  if (s == "zermelo") return LagrangianKind::Zermelo;
  if (s == "fuel") return LagrangianKind::Fuel;
  if (s == "tv" || s == "second-order-tv") return LagrangianKind::SecondOrderTV;
  throw ConfigError("unknown lagrangian '" + s + "' (expected zermelo, fuel or tv)");
}

}  // namespace

UpdateRule parse_rule(const std::string& s) {
  if (s == "newton") return UpdateRule::JacobiNewton;
  if (s == "exact") return UpdateRule::ExactParallel;
  throw ConfigError("rule must be 'exact' or 'newton', got '" + s + "'");
}

ProblemSpec load_problem_yaml(const std::string& text, SweepConfig& sweep) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML: ") + e.what());
  }
  try {
    ProblemSpec p;
    const auto prob = doc["problem"];
    if (!prob) throw ConfigError("missing 'problem' section");
    p.name = prob["name"] ? prob["name"].as<std::string>() : "custom";
    if (!prob["lagrangian"]) throw ConfigError("problem.lagrangian is required");
    p.lagrangian = read_lagrangian(prob["lagrangian"].as<std::string>());
    if (!prob["horizon"] || !prob["N"]) throw ConfigError("problem.horizon and problem.N are required");
    p.horizon = prob["horizon"].as<double>();
    p.N = prob["N"].as<std::size_t>();
    if (prob["t0"]) p.t0 = prob["t0"].as<double>();
    if (prob["weight"]) p.weight = prob["weight"].as<double>();

    p.wind = read_wind(doc["wind"]);

    const auto bnd = doc["boundary"];
    if (!bnd || !bnd["start"] || !bnd["end"]) throw ConfigError("boundary.start and boundary.end are required");
    p.start = read_vec2(bnd["start"], "boundary.start");
    p.end = read_vec2(bnd["end"], "boundary.end");
    if (bnd["start_velocity"]) p.start_velocity = read_vec2(bnd["start_velocity"], "boundary.start_velocity");
    if (bnd["end_velocity"]) p.end_velocity = read_vec2(bnd["end_velocity"], "boundary.end_velocity");

    if (const auto knots = doc["knots"]) {
      for (const auto& k : knots) {
        if (!k["time"] || !k["position"]) throw ConfigError("each knot needs 'time' and 'position'");
        p.knots.push_back({k["time"].as<double>(), read_vec2(k["position"], "knot position")});
      }
    }

    if (const auto guess = doc["guess"]) {
      const auto type = guess["type"] ? guess["type"].as<std::string>() : "straight";
      if (type == "straight") {
        p.guess = StraightLineGuess{};
      } else if (type == "polyline") {
        PolylineGuess g;
        if (guess["via"])
          for (const auto& v : guess["via"]) g.via.push_back(read_vec2(v, "guess.via point"));
        p.guess = g;
      } else if (type == "spline") {
        p.guess = SplineGuess{};
      } else {
        throw ConfigError("guess.type must be straight, polyline or spline");
      }
    } else if (p.lagrangian == LagrangianKind::SecondOrderTV) {
      p.guess = SplineGuess{};
    }

    if (const auto s = doc["solver"]) {
      if (s["rule"]) sweep.rule = parse_rule(s["rule"].as<std::string>());
      if (s["damping"]) sweep.damping = s["damping"].as<double>();
      if (s["tol_factor"]) sweep.tol_factor = s["tol_factor"].as<double>();
      if (s["max_iterations"]) sweep.max_iterations = s["max_iterations"].as<std::size_t>();
      if (s["threads"]) sweep.parallel_width = s["threads"].as<std::size_t>();
    }
    return p;
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML: ") + e.what());
  }
}

ProblemSpec load_problem_file(const std::string& path, SweepConfig& sweep) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_problem_yaml(ss.str(), sweep);
}

ResolvedRun resolve(const RunConfig& cfg) {
  ResolvedRun run;
  if (!cfg.problem.empty() && !cfg.config_path.empty()) throw ConfigError("use either --problem or --config, not both");
  if (!cfg.config_path.empty()) {
    run.problem = load_problem_file(cfg.config_path, run.sweep);
  } else if (!cfg.problem.empty()) {
    try {
      run.problem = builtin_problem(cfg.problem);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    if (run.problem.lagrangian == LagrangianKind::SecondOrderTV) run.sweep.damping = 0.05;
  } else {
    throw ConfigError("no problem selected; pass --problem <name> or --config <file>");
  }
  if (cfg.N) run.problem.N = *cfg.N;
  if (cfg.T) run.problem.horizon = *cfg.T;
  if (cfg.tol_factor) run.sweep.tol_factor = *cfg.tol_factor;
  if (cfg.rule) run.sweep.rule = *cfg.rule;
  if (cfg.damping) run.sweep.damping = *cfg.damping;
  if (cfg.max_iterations) run.sweep.max_iterations = *cfg.max_iterations;
  if (cfg.threads) run.sweep.parallel_width = *cfg.threads;
  try {
    run.problem.validate();
    run.sweep.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return run;
}

}  // namespace parvi::cli
