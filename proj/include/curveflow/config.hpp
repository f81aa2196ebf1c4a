#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "curveflow/errors.hpp"
#include "curveflow/scheme.hpp"
#include "curveflow/shapes.hpp"

namespace curveflow {

/// Where the initial curve comes from.
struct InitialCurve {
  enum class Kind { Shape, ControlPoints, Samples };
  Kind kind = Kind::Shape;
  std::string shape = "circle";
  double scale = 1.0;
  Vec2 center{};
  std::vector<Vec2> points;  ///< control points or samples, depending on kind
};

struct OutputPaths {
  std::string frames;
  std::string energy_csv;
  std::string svg_dir;
  int svg_every = 10;
  bool svg_markers = true;
};

struct RunConfig {
  std::string name;
  EnergyModel energy = ElasticEnergy{0.1};
  int degree = 3;
  int spans = 12;
  double tau = 0.01;
  double t_end = 1.0;
  int quadrature_points = 5;
  SolverConfig newton;
  int retry_max = 8;
  bool eliminate = true;
  EliminationRule elimination;
  bool steady_stop = true;
  double steady_tol = 1e-6;
  int steady_count = 10;
  long max_steps = 1'000'000;
  InitialCurve initial;
  OutputPaths outputs;
};

namespace detail {

using json = nlohmann::json;

inline std::string join_path(std::string_view path, std::string_view key) {
  return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

[[noreturn]] inline void config_fail(std::string_view path, std::string_view what) {
  throw ConfigError(std::string(path) + ": " + std::string(what));
}

inline void require_object(const json& j, std::string_view path) {
  if (!j.is_object()) config_fail(path.empty() ? "config" : path, "expected an object");
}

inline void reject_unknown(const json& j, std::string_view path, std::initializer_list<std::string_view> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) config_fail(join_path(path, item.key()), "unknown key");
  }
}

inline double read_number(const json& j, std::string_view path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_fail(path, "must be finite");
  return v;
}

inline long read_integer(const json& j, std::string_view path) {
  if (j.is_number_integer()) return j.get<long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) return static_cast<long>(v);
  }
  config_fail(path, "expected an integer");
}

inline bool read_bool(const json& j, std::string_view path) {
  if (!j.is_boolean()) config_fail(path, "expected true or false");
  return j.get<bool>();
}

inline std::string read_string(const json& j, std::string_view path) {
  if (!j.is_string()) config_fail(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<Vec2> read_points(const json& j, std::string_view path) {
  if (!j.is_array()) config_fail(path, "expected an array of [x, y] pairs");
  std::vector<Vec2> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = std::string(path) + "[" + std::to_string(i) + "]";
    const json& pt = j[i];
    if (!pt.is_array() || pt.size() != 2) config_fail(at, "expected [x, y]");
    out.push_back({read_number(pt[0], at), read_number(pt[1], at)});
  }
  return out;
}

inline json points_to_json(const std::vector<Vec2>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

}  // namespace detail

/// Checks every invariant of a run configuration.
inline void validate(const RunConfig& cfg) {
  using detail::config_fail;
  const int m = energy_order(cfg.energy);
  if (const auto* e = std::get_if<ElasticEnergy>(&cfg.energy)) {
    if (!(e->epsilon > 0.0)) config_fail("energy.epsilon", "must be positive");
  }
  if (cfg.degree < m + 1) {
    config_fail("p", "must be at least " + std::to_string(m + 1) + " for the " + energy_name(cfg.energy) +
                         " energy, got " + std::to_string(cfg.degree));
  }
  if (cfg.spans <= cfg.degree) {
    config_fail("N", "must exceed p = " + std::to_string(cfg.degree) + ", got " + std::to_string(cfg.spans));
  }
  if (!(cfg.tau > 0.0)) config_fail("tau", "must be positive");
  if (!(cfg.t_end > 0.0)) config_fail("t_end", "must be positive");
  if (cfg.quadrature_points < 1 || cfg.quadrature_points > kMaxQuadraturePoints) {
    config_fail("quadrature_points", "must lie in [1, 32]");
  }
  if (!(cfg.newton.tol > 0.0)) config_fail("newton.tol", "must be positive");
  if (cfg.newton.max_iter < 1) config_fail("newton.max_iter", "must be at least 1");
  if (cfg.newton.max_halvings < 0) config_fail("newton.max_halvings", "must be non-negative");
  if (cfg.retry_max < 0) config_fail("newton.retry_max", "must be non-negative");
  if (!(cfg.elimination.factor > 0.0)) config_fail("elimination.factor", "must be positive");
  if (!(cfg.elimination.floor >= 0.0)) config_fail("elimination.floor", "must be non-negative");
  if (!(cfg.steady_tol >= 0.0)) config_fail("steady.tol", "must be non-negative");
  if (cfg.steady_count < 1) config_fail("steady.count", "must be at least 1");
  if (cfg.max_steps < 1) config_fail("max_steps", "must be at least 1");
  if (cfg.outputs.svg_every < 1) config_fail("outputs.svg_every", "must be at least 1");

  const auto& init = cfg.initial;
  switch (init.kind) {
    case InitialCurve::Kind::Shape:
      if (!find_shape(init.shape)) config_fail("initial.preset", "unknown shape \"" + init.shape + "\"");
      if (!(init.scale > 0.0)) config_fail("initial.scale", "must be positive");
      break;
    case InitialCurve::Kind::ControlPoints:
      if (static_cast<int>(init.points.size()) != cfg.spans) {
        config_fail("initial.control_points", "count must equal N = " + std::to_string(cfg.spans));
      }
      break;
    case InitialCurve::Kind::Samples:
      if (static_cast<int>(init.points.size()) < cfg.spans) {
        config_fail("initial.samples", "need at least N = " + std::to_string(cfg.spans) + " samples");
      }
      break;
  }
}

/// Builds a validated RunConfig from a parsed document; missing keys take defaults.
inline RunConfig parse_config(const nlohmann::json& doc) {
  using namespace detail;
  require_object(doc, "");
  reject_unknown(doc, "", {"name", "energy", "p", "N", "tau", "t_end", "quadrature_points", "newton", "elimination",
                           "line_element", "steady", "max_steps", "initial", "outputs"});
  RunConfig cfg;
  if (doc.contains("name")) cfg.name = read_string(doc["name"], "name");

  if (!doc.contains("energy")) config_fail("energy", "missing required key");
  {
    const json& e = doc["energy"];
    require_object(e, "energy");
    reject_unknown(e, "energy", {"kind", "epsilon"});
    if (!e.contains("kind")) config_fail("energy.kind", "missing required key");
    const std::string kind = read_string(e["kind"], "energy.kind");
    if (kind == "length") {
      if (e.contains("epsilon")) config_fail("energy.epsilon", "only applies to the elastic energy");
      cfg.energy = LengthEnergy{};
    } else if (kind == "elastic") {
      if (!e.contains("epsilon")) config_fail("energy.epsilon", "missing required key");
      cfg.energy = ElasticEnergy{read_number(e["epsilon"], "energy.epsilon")};
    } else {
      config_fail("energy.kind", "must be \"length\" or \"elastic\", got \"" + kind + "\"");
    }
  }

  if (doc.contains("p")) cfg.degree = static_cast<int>(read_integer(doc["p"], "p"));
  if (doc.contains("N")) cfg.spans = static_cast<int>(read_integer(doc["N"], "N"));
  if (!doc.contains("tau")) config_fail("tau", "missing required key");
  cfg.tau = read_number(doc["tau"], "tau");
  if (!doc.contains("t_end")) config_fail("t_end", "missing required key");
  cfg.t_end = read_number(doc["t_end"], "t_end");
  if (doc.contains("quadrature_points")) {
    cfg.quadrature_points = static_cast<int>(read_integer(doc["quadrature_points"], "quadrature_points"));
  }
  if (doc.contains("max_steps")) cfg.max_steps = read_integer(doc["max_steps"], "max_steps");

  if (doc.contains("newton")) {
    const json& n = doc["newton"];
    require_object(n, "newton");
    reject_unknown(n, "newton", {"tol", "max_iter", "max_halvings", "retry_max"});
    if (n.contains("tol")) cfg.newton.tol = read_number(n["tol"], "newton.tol");
    if (n.contains("max_iter")) cfg.newton.max_iter = static_cast<int>(read_integer(n["max_iter"], "newton.max_iter"));
    if (n.contains("max_halvings")) {
      cfg.newton.max_halvings = static_cast<int>(read_integer(n["max_halvings"], "newton.max_halvings"));
    }
    if (n.contains("retry_max")) cfg.retry_max = static_cast<int>(read_integer(n["retry_max"], "newton.retry_max"));
  }

  if (doc.contains("elimination")) {
    const json& e = doc["elimination"];
    require_object(e, "elimination");
    reject_unknown(e, "elimination", {"enabled", "factor", "floor"});
    if (e.contains("enabled")) cfg.eliminate = read_bool(e["enabled"], "elimination.enabled");
    if (e.contains("factor")) cfg.elimination.factor = read_number(e["factor"], "elimination.factor");
    if (e.contains("floor")) cfg.elimination.floor = read_number(e["floor"], "elimination.floor");
  }

  if (doc.contains("line_element")) {
    const std::string s = read_string(doc["line_element"], "line_element");
    try {
      cfg.newton.line_element = parse_line_element(s);
    } catch (const std::invalid_argument& ex) {
      config_fail("line_element", ex.what());
    }
  }

  if (doc.contains("steady")) {
    const json& s = doc["steady"];
    require_object(s, "steady");
    reject_unknown(s, "steady", {"enabled", "tol", "count"});
    if (s.contains("enabled")) cfg.steady_stop = read_bool(s["enabled"], "steady.enabled");
    if (s.contains("tol")) cfg.steady_tol = read_number(s["tol"], "steady.tol");
    if (s.contains("count")) cfg.steady_count = static_cast<int>(read_integer(s["count"], "steady.count"));
  }

  if (!doc.contains("initial")) config_fail("initial", "missing required key");
  {
    const json& i = doc["initial"];
    auto& init = cfg.initial;
    if (i.is_string()) {
      init.shape = i.get<std::string>();
    } else {
      require_object(i, "initial");
      reject_unknown(i, "initial", {"preset", "scale", "center", "control_points", "samples"});
      const int sources = static_cast<int>(i.contains("preset")) + static_cast<int>(i.contains("control_points")) +
                          static_cast<int>(i.contains("samples"));
      if (sources != 1) config_fail("initial", "give exactly one of preset, control_points, samples");
      if (i.contains("preset")) {
        init.shape = read_string(i["preset"], "initial.preset");
        if (i.contains("scale")) init.scale = read_number(i["scale"], "initial.scale");
        if (i.contains("center")) {
          const json& c = i["center"];
          if (!c.is_array() || c.size() != 2) config_fail("initial.center", "expected [x, y]");
          init.center = {read_number(c[0], "initial.center"), read_number(c[1], "initial.center")};
        }
      } else {
        if (i.contains("scale") || i.contains("center")) {
          config_fail("initial", "scale and center only apply to a preset shape");
        }
        if (i.contains("control_points")) {
          init.kind = InitialCurve::Kind::ControlPoints;
          init.points = read_points(i["control_points"], "initial.control_points");
          if (!doc.contains("N")) cfg.spans = static_cast<int>(init.points.size());
        } else {
          init.kind = InitialCurve::Kind::Samples;
          init.points = read_points(i["samples"], "initial.samples");
        }
      }
    }
  }

  if (doc.contains("outputs")) {
    const json& o = doc["outputs"];
    require_object(o, "outputs");
    reject_unknown(o, "outputs", {"frames", "energy_csv", "svg_dir", "svg_every", "svg_markers"});
    if (o.contains("frames")) cfg.outputs.frames = read_string(o["frames"], "outputs.frames");
    if (o.contains("energy_csv")) cfg.outputs.energy_csv = read_string(o["energy_csv"], "outputs.energy_csv");
    if (o.contains("svg_dir")) cfg.outputs.svg_dir = read_string(o["svg_dir"], "outputs.svg_dir");
    if (o.contains("svg_every")) cfg.outputs.svg_every = static_cast<int>(read_integer(o["svg_every"], "outputs.svg_every"));
    if (o.contains("svg_markers")) cfg.outputs.svg_markers = read_bool(o["svg_markers"], "outputs.svg_markers");
  }

  validate(cfg);
  return cfg;
}

inline RunConfig parse_config_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Canonical document for a configuration; parse_config(to_json(c)) reproduces c.
inline nlohmann::json to_json(const RunConfig& cfg) {
  using json = nlohmann::json;
  json doc;
  if (!cfg.name.empty()) doc["name"] = cfg.name;
  if (const auto* e = std::get_if<ElasticEnergy>(&cfg.energy)) {
    doc["energy"] = {{"kind", "elastic"}, {"epsilon", e->epsilon}};
  } else {
    doc["energy"] = {{"kind", "length"}};
  }
  doc["p"] = cfg.degree;
  doc["N"] = cfg.spans;
  doc["tau"] = cfg.tau;
  doc["t_end"] = cfg.t_end;
  doc["quadrature_points"] = cfg.quadrature_points;
  doc["max_steps"] = cfg.max_steps;
  doc["newton"] = {{"tol", cfg.newton.tol},
                   {"max_iter", cfg.newton.max_iter},
                   {"max_halvings", cfg.newton.max_halvings},
                   {"retry_max", cfg.retry_max}};
  doc["elimination"] = {
      {"enabled", cfg.eliminate}, {"factor", cfg.elimination.factor}, {"floor", cfg.elimination.floor}};
  doc["line_element"] = to_string(cfg.newton.line_element);
  doc["steady"] = {{"enabled", cfg.steady_stop}, {"tol", cfg.steady_tol}, {"count", cfg.steady_count}};
  switch (cfg.initial.kind) {
    case InitialCurve::Kind::Shape:
      doc["initial"] = {{"preset", cfg.initial.shape},
                        {"scale", cfg.initial.scale},
                        {"center", {cfg.initial.center.x, cfg.initial.center.y}}};
      break;
    case InitialCurve::Kind::ControlPoints:
      doc["initial"] = {{"control_points", detail::points_to_json(cfg.initial.points)}};
      break;
    case InitialCurve::Kind::Samples:
      doc["initial"] = {{"samples", detail::points_to_json(cfg.initial.points)}};
      break;
  }
  json out = json::object();
  if (!cfg.outputs.frames.empty()) out["frames"] = cfg.outputs.frames;
  if (!cfg.outputs.energy_csv.empty()) out["energy_csv"] = cfg.outputs.energy_csv;
  if (!cfg.outputs.svg_dir.empty()) out["svg_dir"] = cfg.outputs.svg_dir;
  out["svg_every"] = cfg.outputs.svg_every;
  out["svg_markers"] = cfg.outputs.svg_markers;
  doc["outputs"] = out;
  return doc;
}

inline FlowSettings flow_settings(const RunConfig& cfg) {
  FlowSettings s;
  s.energy = cfg.energy;
  s.tau = cfg.tau;
  s.t_end = cfg.t_end;
  s.quadrature_points = cfg.quadrature_points;
  s.newton = cfg.newton;
  s.retry_max = cfg.retry_max;
  s.eliminate = cfg.eliminate;
  s.elimination = cfg.elimination;
  // A zero threshold never fires: speeds are non-negative.
  s.steady_tol = cfg.steady_stop ? cfg.steady_tol : 0.0;
  s.steady_count = cfg.steady_count;
  s.max_steps = cfg.max_steps;
  return s;
}

/// Degree-p closed curve on [0, 1] described by cfg.initial.
inline ClosedBSplineCurve build_initial_curve(const RunConfig& cfg) {
  const auto& init = cfg.initial;
  switch (init.kind) {
    case InitialCurve::Kind::ControlPoints:
      return ClosedBSplineCurve::on_unit_interval(cfg.degree, init.points);
    case InitialCurve::Kind::Samples:
      return fit_closed_curve(init.points, cfg.degree, cfg.spans).curve;
    case InitialCurve::Kind::Shape:
      break;
  }
  const auto shape = find_shape(init.shape);
  if (!shape) throw ConfigError("initial.preset: unknown shape \"" + init.shape + "\"");
  return fit_parametric(shape->curve, cfg.degree, cfg.spans, init.scale, init.center);
}

/// A named configuration reproducing one of the reference experiments.
struct Preset {
  std::string name;
  std::string description;
  RunConfig config;
};

inline std::vector<Preset> presets() {
  auto make = [](std::string name, std::string description, double eps, int spans, double tau, double t_end,
                 std::string shape, double scale) {
    RunConfig c;
    c.name = name;
    c.energy = ElasticEnergy{eps};
    c.degree = 3;
    c.spans = spans;
    c.tau = tau;
    c.t_end = t_end;
    c.initial.shape = std::move(shape);
    c.initial.scale = scale;
    return Preset{std::move(name), std::move(description), c};
  };
  return {
      make("circle", "unit circle relaxing to the circle of radius eps", 0.1, 6, 0.01, 2.0, "circle", 1.0),
      make("figure_eight", "lopsided figure eight relaxing to the elastic figure eight", 0.2, 12, 0.01, 10.0,
           "figure_eight", 1.0),
      make("double_loop", "limacon with an inner loop relaxing to a doubly covered circle", 0.1, 12, 0.005, 3.0,
           "double_loop", 1.0),
      make("limacon", "self-crossing loop whose crossings pinch off, ending on a single circle", 0.2, 20, 0.005, 3.0,
           "crossed_loop", 1.0),
      make("eight_loops", "figure eight decorated with extra loops; turning number 0", 0.2, 49, 0.005, 8.0,
           "looped_eight", 1.0),
      make("circle_loops", "circle decorated with extra loops; turning number 1", 0.2, 54, 0.005, 5.0,
           "looped_circle", 1.0),
  };
}

inline std::optional<Preset> find_preset(std::string_view name) {
  for (auto& p : presets()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace curveflow
