#include "cloudagv/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

namespace cloudagv {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

void check_keys(const YAML::Node& node, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
T get(const YAML::Node& node, const std::string& where, const char* key, T fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <class T>
T require(const YAML::Node& node, const std::string& where, const char* key) {
  if (!node[key]) throw ConfigError(where + ": missing required key '" + key + "'");
  return get<T>(node, where, key, T{});
}

bool is_null_like(const YAML::Node& v) {
  if (v.IsNull()) return true;
  if (!v.IsScalar()) return false;
  const auto s = v.as<std::string>();
  return s == "none" || s == "unlimited";
}

Pose parse_pose(const YAML::Node& node, const std::string& where, Pose fallback) {
  if (!node) return fallback;
  check_keys(node, where, {"x", "y", "theta"});
  return {get(node, where, "x", fallback.x), get(node, where, "y", fallback.y),
          get(node, where, "theta", fallback.theta)};
}

TrackFamily parse_family(const YAML::Node& t) {
  const std::string family = get<std::string>(t, "track", "family", "s-curve");
  const std::initializer_list<std::string_view> common{"family", "total_time", "ts", "start",
                                                       "speed"};
  auto allow = [&](std::initializer_list<std::string_view> extra) {
    std::vector<std::string_view> keys(common);
    keys.insert(keys.end(), extra.begin(), extra.end());
    for (const auto& kv : t) {
      const auto key = kv.first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("track: unknown key '" + key + "' for family " + family);
      }
    }
  };
  if (family == "line") {
    allow({"length"});
    return track::Line{get(t, "track", "length", track::Line{}.length)};
  }
  if (family == "circle") {
    allow({"radius", "direction"});
    const auto dir = get<std::string>(t, "track", "direction", "ccw");
    if (dir != "ccw" && dir != "cw") throw ConfigError("track.direction: expected ccw or cw");
    return track::Circle{get(t, "track", "radius", track::Circle{}.radius), dir == "ccw"};
  }
  if (family == "s-curve") {
    allow({"straights", "radii", "turn_angle_deg"});
    track::SCurve s;
    s.straights = get(t, "track", "straights", s.straights);
    s.radii = get(t, "track", "radii", s.radii);
    s.turn_angle = get(t, "track", "turn_angle_deg", s.turn_angle * kDegPerRad) / kDegPerRad;
    return s;
  }
  if (family == "rounded-rectangle") {
    allow({"width", "height", "corner_radius"});
    track::RoundedRectangle r;
    r.width = get(t, "track", "width", r.width);
    r.height = get(t, "track", "height", r.height);
    r.corner_radius = get(t, "track", "corner_radius", r.corner_radius);
    return r;
  }
  throw ConfigError("track.family: unknown family '" + family + "'");
}

SpeedProfile parse_speed(const YAML::Node& node) {
  if (!node) return speed::Constant{1.0};
  const std::string where = "track.speed";
  const auto profile = get<std::string>(node, where, "profile", "constant");
  auto optional_number = [&](const char* key) -> std::optional<double> {
    const YAML::Node v = node[key];
    if (!v || is_null_like(v)) return std::nullopt;
    return get<double>(node, where, key, 0.0);
  };
  if (profile == "constant") {
    check_keys(node, where, {"profile", "nu"});
    return speed::Constant{optional_number("nu")};
  }
  if (profile == "trapezoidal") {
    check_keys(node, where, {"profile", "accel", "nu_max"});
    return speed::Trapezoidal{require<double>(node, where, "accel"), optional_number("nu_max")};
  }
  throw ConfigError(where + ".profile: unknown profile '" + profile + "'");
}

OutageModel parse_outage(const YAML::Node& node) {
  OutageModel m;
  if (!node) return m;
  const std::string where = "outage";
  const auto model = get<std::string>(node, where, "model", "perfect");
  m.seed = get<std::uint64_t>(node, where, "seed", m.seed);
  if (model == "perfect") {
    check_keys(node, where, {"model", "seed"});
  } else if (model == "bursts") {
    check_keys(node, where, {"model", "seed", "bursts"});
    outage::DeterministicBursts b;
    const YAML::Node list = node["bursts"];
    if (!list || !list.IsSequence()) throw ConfigError("outage.bursts: expected a list");
    for (const auto& item : list) {
      if (!item.IsSequence() || item.size() != 2) {
        throw ConfigError("outage.bursts: each burst is [start_k, length]");
      }
      try {
        b.bursts.push_back({item[0].as<std::size_t>(), item[1].as<std::size_t>()});
      } catch (const YAML::Exception&) {
        throw ConfigError("outage.bursts: burst entries must be non-negative integers");
      }
    }
    m.variant = b;
  } else if (model == "bernoulli") {
    check_keys(node, where, {"model", "seed", "p_loss"});
    m.variant = outage::Bernoulli{require<double>(node, where, "p_loss")};
  } else if (model == "gilbert-elliott") {
    check_keys(node, where,
               {"model", "seed", "p_good_to_bad", "p_bad_to_good", "loss_good", "loss_bad"});
    outage::GilbertElliott ge;
    ge.p_good_to_bad = require<double>(node, where, "p_good_to_bad");
    ge.p_bad_to_good = require<double>(node, where, "p_bad_to_good");
    ge.loss_good = get(node, where, "loss_good", ge.loss_good);
    ge.loss_bad = get(node, where, "loss_bad", ge.loss_bad);
    m.variant = ge;
  } else {
    throw ConfigError("outage.model: unknown model '" + model + "'");
  }
  return m;
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  check_keys(root, "config",
             {"name", "track", "gains", "initial_offset", "nu_max", "outage", "stability",
              "reference_velocity_index", "output"});

  ExperimentConfig cfg;
  cfg.name = get<std::string>(root, "config", "name", cfg.name);

  SimConfig& sim = cfg.sim;
  if (const YAML::Node t = root["track"]) {
    if (!t.IsMap()) throw ConfigError("track: expected a mapping");
    sim.track.family = parse_family(t);
    sim.track.total_time = get(t, "track", "total_time", sim.track.total_time);
    sim.track.ts = get(t, "track", "ts", sim.track.ts);
    sim.track.start = parse_pose(t["start"], "track.start", sim.track.start);
    sim.track.speed = parse_speed(t["speed"]);
  }
  if (const YAML::Node g = root["gains"]) {
    check_keys(g, "gains", {"kx", "ky", "ktheta"});
    sim.gains.kx = get(g, "gains", "kx", sim.gains.kx);
    sim.gains.ky = get(g, "gains", "ky", sim.gains.ky);
    sim.gains.ktheta = get(g, "gains", "ktheta", sim.gains.ktheta);
  }
  sim.initial_offset = parse_pose(root["initial_offset"], "initial_offset", sim.initial_offset);
  if (const YAML::Node v = root["nu_max"]; v && !is_null_like(v)) {
    sim.nu_max = get<double>(root, "config", "nu_max", 0.0);
  }
  sim.outage = parse_outage(root["outage"]);
  if (const YAML::Node s = root["stability"]) {
    check_keys(s, "stability", {"enabled", "tol"});
    sim.stability_analysis = get(s, "stability", "enabled", sim.stability_analysis);
    sim.stability_tol = get(s, "stability", "tol", sim.stability_tol);
  }
  const auto index = get<std::string>(root, "config", "reference_velocity_index", "stale");
  if (index == "stale") {
    sim.reference_velocity_index = ReferenceVelocityIndex::stale;
  } else if (index == "current") {
    sim.reference_velocity_index = ReferenceVelocityIndex::current;
  } else {
    throw ConfigError("reference_velocity_index: expected stale or current");
  }
  if (const YAML::Node o = root["output"]) {
    check_keys(o, "output", {"dir", "plots"});
    cfg.output.dir = get(o, "output", "dir", cfg.output.dir);
    cfg.output.plots = get(o, "output", "plots", cfg.output.plots);
  }

  try {
    sim.validate();
    (void)generate_track(sim.track);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const ExperimentConfig& config) {
  const SimConfig& sim = config.sim;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << config.name;

  out << YAML::Key << "track" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << family_name(sim.track.family);
  std::visit(Overloaded{
                 [&](const track::Line& l) { out << YAML::Key << "length" << YAML::Value << l.length; },
                 [&](const track::Circle& c) {
                   out << YAML::Key << "radius" << YAML::Value << c.radius;
                   out << YAML::Key << "direction" << YAML::Value << (c.ccw ? "ccw" : "cw");
                 },
                 [&](const track::SCurve& s) {
                   out << YAML::Key << "straights" << YAML::Value << YAML::Flow << s.straights;
                   out << YAML::Key << "radii" << YAML::Value << YAML::Flow << s.radii;
                   out << YAML::Key << "turn_angle_deg" << YAML::Value
                       << s.turn_angle * kDegPerRad;
                 },
                 [&](const track::RoundedRectangle& r) {
                   out << YAML::Key << "width" << YAML::Value << r.width;
                   out << YAML::Key << "height" << YAML::Value << r.height;
                   out << YAML::Key << "corner_radius" << YAML::Value << r.corner_radius;
                 },
             },
             sim.track.family);
  out << YAML::Key << "total_time" << YAML::Value << sim.track.total_time;
  out << YAML::Key << "ts" << YAML::Value << sim.track.ts;
  out << YAML::Key << "start" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "x"
      << YAML::Value << sim.track.start.x << YAML::Key << "y" << YAML::Value << sim.track.start.y
      << YAML::Key << "theta" << YAML::Value << sim.track.start.theta << YAML::EndMap;
  out << YAML::Key << "speed" << YAML::Value << YAML::Flow << YAML::BeginMap;
  std::visit(Overloaded{
                 [&](const speed::Constant& c) {
                   out << YAML::Key << "profile" << YAML::Value << "constant";
                   if (c.nu) out << YAML::Key << "nu" << YAML::Value << *c.nu;
                 },
                 [&](const speed::Trapezoidal& tz) {
                   out << YAML::Key << "profile" << YAML::Value << "trapezoidal";
                   out << YAML::Key << "accel" << YAML::Value << tz.accel;
                   if (tz.nu_max) out << YAML::Key << "nu_max" << YAML::Value << *tz.nu_max;
                 },
             },
             sim.track.speed);
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::Key << "gains" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "kx"
      << YAML::Value << sim.gains.kx << YAML::Key << "ky" << YAML::Value << sim.gains.ky
      << YAML::Key << "ktheta" << YAML::Value << sim.gains.ktheta << YAML::EndMap;
  out << YAML::Key << "initial_offset" << YAML::Value << YAML::Flow << YAML::BeginMap
      << YAML::Key << "x" << YAML::Value << sim.initial_offset.x << YAML::Key << "y"
      << YAML::Value << sim.initial_offset.y << YAML::Key << "theta" << YAML::Value
      << sim.initial_offset.theta << YAML::EndMap;
  out << YAML::Key << "nu_max" << YAML::Value;
  if (sim.nu_max) {
    out << *sim.nu_max;
  } else {
    out << "none";
  }

  out << YAML::Key << "outage" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << sim.outage.name();
  out << YAML::Key << "seed" << YAML::Value << sim.outage.seed;
  std::visit(Overloaded{
                 [&](const outage::Perfect&) {},
                 [&](const outage::DeterministicBursts& b) {
                   out << YAML::Key << "bursts" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                   for (const auto& burst : b.bursts) {
                     out << YAML::Flow << YAML::BeginSeq << burst.start_k << burst.length
                         << YAML::EndSeq;
                   }
                   out << YAML::EndSeq;
                 },
                 [&](const outage::Bernoulli& b) {
                   out << YAML::Key << "p_loss" << YAML::Value << b.p_loss;
                 },
                 [&](const outage::GilbertElliott& ge) {
                   out << YAML::Key << "p_good_to_bad" << YAML::Value << ge.p_good_to_bad;
                   out << YAML::Key << "p_bad_to_good" << YAML::Value << ge.p_bad_to_good;
                   out << YAML::Key << "loss_good" << YAML::Value << ge.loss_good;
                   out << YAML::Key << "loss_bad" << YAML::Value << ge.loss_bad;
                 },
             },
             sim.outage.variant);
  out << YAML::EndMap;

  out << YAML::Key << "stability" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key
      << "enabled" << YAML::Value << sim.stability_analysis << YAML::Key << "tol" << YAML::Value
      << sim.stability_tol << YAML::EndMap;
  out << YAML::Key << "reference_velocity_index" << YAML::Value
      << (sim.reference_velocity_index == ReferenceVelocityIndex::stale ? "stale" : "current");
  out << YAML::Key << "output" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key
      << "dir" << YAML::Value << config.output.dir << YAML::Key << "plots" << YAML::Value
      << config.output.plots << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace cloudagv
