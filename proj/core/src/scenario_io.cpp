#include "tcsim/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tcsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument(path + ": " + what);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "must be an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items()) {
    if (allowed.count(key) == 0) fail(join(path, key), "unknown field");
  }
}

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "must be a number");
  return v.get<double>();
}

long long read_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "must be an integer");
  return v.get<long long>();
}

Vec2 read_vec2(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) fail(path, "must be an array of two numbers");
  return {read_number(v[0], path + "[0]"), read_number(v[1], path + "[1]")};
}

// Optional-field helpers: assign only when the key is present.
void opt_number(const json& obj, const std::string& path, const char* key, double& out) {
  if (obj.contains(key)) out = read_number(obj.at(key), join(path, key));
}

void opt_int(const json& obj, const std::string& path, const char* key, int& out) {
  if (obj.contains(key)) out = static_cast<int>(read_integer(obj.at(key), join(path, key)));
}

template <typename Enum>
Enum read_enum(const json& v, const std::string& path, std::initializer_list<std::pair<const char*, Enum>> options) {
  if (!v.is_string()) fail(path, "must be a string");
  const std::string s = v.get<std::string>();
  std::string allowed;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  fail(path, "must be one of: " + allowed);
}

OspaParams read_ospa(const json& obj, const std::string& path) {
  reject_unknown(obj, path, {"c", "p", "base", "space"});
  OspaParams p;
  opt_number(obj, path, "c", p.c);
  opt_number(obj, path, "p", p.p);
  if (obj.contains("base")) {
    p.base = read_enum<BaseDistance>(obj.at("base"), join(path, "base"),
                                     {{"manhattan", BaseDistance::manhattan}, {"euclidean", BaseDistance::euclidean}});
  }
  if (obj.contains("space")) {
    p.space = read_enum<StateSpace>(obj.at("space"), join(path, "space"),
                                    {{"position", StateSpace::position}, {"state", StateSpace::full_state}});
  }
  return p;
}

MpcParams read_mpc(const json& obj, const std::string& path, MpcParams p) {
  reject_unknown(obj, path,
                 {"horizon", "alpha_p", "alpha_v", "alpha_c", "gamma_p", "gamma_v", "separation", "v_max", "a_max",
                  "dt", "gradient_tolerance", "max_iterations"});
  opt_int(obj, path, "horizon", p.horizon);
  opt_number(obj, path, "alpha_p", p.alpha_p);
  opt_number(obj, path, "alpha_v", p.alpha_v);
  opt_number(obj, path, "alpha_c", p.alpha_c);
  opt_number(obj, path, "gamma_p", p.gamma_p);
  opt_number(obj, path, "gamma_v", p.gamma_v);
  opt_number(obj, path, "separation", p.separation);
  opt_number(obj, path, "v_max", p.v_max);
  opt_number(obj, path, "a_max", p.a_max);
  opt_number(obj, path, "dt", p.dt);
  opt_number(obj, path, "gradient_tolerance", p.gradient_tolerance);
  opt_int(obj, path, "max_iterations", p.max_iterations);
  return p;
}

Scenario from_json(const json& root) {
  reject_unknown(root, "",
                 {"name", "nodes", "targets", "area", "horizon", "dt", "seed", "sensing", "tracker", "consensus",
                  "attack"});
  Scenario s;
  if (root.contains("name")) {
    if (!root.at("name").is_string()) fail("name", "must be a string");
    s.name = root.at("name").get<std::string>();
  }
  opt_int(root, "", "horizon", s.horizon);
  opt_number(root, "", "dt", s.dt);
  if (root.contains("seed")) {
    const json& v = root.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail("seed", "must be a non-negative integer");
    }
    s.seed = v.get<std::uint64_t>();
  }

  if (!root.contains("nodes") || !root.at("nodes").is_array()) fail("nodes", "must be an array");
  const json& nodes = root.at("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "nodes[" + std::to_string(i) + "]";
    const json& n = nodes[i];
    reject_unknown(n, path, {"id", "position", "boresight", "half_angle_deg", "range", "neighbors"});
    SensorNode node;
    if (!n.contains("id")) fail(path + ".id", "is required");
    node.id = static_cast<NodeId>(read_integer(n.at("id"), path + ".id"));
    if (!n.contains("position")) fail(path + ".position", "is required");
    node.position = read_vec2(n.at("position"), path + ".position");
    if (n.contains("boresight")) node.boresight = read_vec2(n.at("boresight"), path + ".boresight");
    opt_number(n, path, "half_angle_deg", node.half_angle_deg);
    opt_number(n, path, "range", node.range);
    s.nodes.push_back(node);
    if (n.contains("neighbors")) {
      const json& nb = n.at("neighbors");
      if (!nb.is_array()) fail(path + ".neighbors", "must be an array");
      for (std::size_t j = 0; j < nb.size(); ++j) {
        s.nodes.back().neighbors.push_back(
            static_cast<NodeId>(read_integer(nb[j], path + ".neighbors[" + std::to_string(j) + "]")));
      }
    }
  }
  // A missing neighbor list everywhere means a complete graph.
  const bool any_links = std::any_of(nodes.begin(), nodes.end(), [](const json& n) { return n.contains("neighbors"); });
  for (auto& node : s.nodes) {
    if (!any_links) {
      for (const auto& other : s.nodes) {
        if (other.id != node.id) node.neighbors.push_back(other.id);
      }
    }
    std::sort(node.neighbors.begin(), node.neighbors.end());
    node.neighbors.erase(std::unique(node.neighbors.begin(), node.neighbors.end()), node.neighbors.end());
  }

  if (root.contains("targets")) {
    const json& targets = root.at("targets");
    if (!targets.is_array()) fail("targets", "must be an array");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::string path = "targets[" + std::to_string(i) + "]";
      const json& t = targets[i];
      reject_unknown(t, path, {"id", "role", "waypoints"});
      TargetSpec spec;
      if (!t.contains("id")) fail(path + ".id", "is required");
      spec.id = static_cast<int>(read_integer(t.at("id"), path + ".id"));
      if (t.contains("role")) {
        spec.role = read_enum<TargetRole>(
            t.at("role"), path + ".role",
            {{"victim", TargetRole::victim}, {"impostor", TargetRole::impostor}, {"other", TargetRole::other}});
      }
      if (!t.contains("waypoints") || !t.at("waypoints").is_array()) fail(path + ".waypoints", "must be an array");
      const json& wps = t.at("waypoints");
      for (std::size_t w = 0; w < wps.size(); ++w) {
        const std::string wp = path + ".waypoints[" + std::to_string(w) + "]";
        reject_unknown(wps[w], wp, {"time", "position"});
        if (!wps[w].contains("time") || !wps[w].contains("position")) fail(wp, "requires time and position");
        spec.waypoints.push_back({static_cast<TimeIndex>(read_integer(wps[w].at("time"), wp + ".time")),
                                  read_vec2(wps[w].at("position"), wp + ".position")});
      }
      s.targets.push_back(std::move(spec));
    }
  }

  if (root.contains("area")) {
    const json& a = root.at("area");
    reject_unknown(a, "area", {"min", "max"});
    if (!a.contains("min") || !a.contains("max")) fail("area", "requires min and max");
    s.area.min = read_vec2(a.at("min"), "area.min");
    s.area.max = read_vec2(a.at("max"), "area.max");
  } else {
    fail("area", "is required");
  }

  if (root.contains("sensing")) {
    const json& o = root.at("sensing");
    reject_unknown(o, "sensing", {"detection_probability", "sigma_r", "clutter_rate"});
    opt_number(o, "sensing", "detection_probability", s.sensing.detection_probability);
    opt_number(o, "sensing", "sigma_r", s.sensing.sigma_r);
    opt_number(o, "sensing", "clutter_rate", s.sensing.clutter_rate);
  }

  if (root.contains("tracker")) {
    const json& o = root.at("tracker");
    reject_unknown(o, "tracker",
                   {"sigma_v", "gate", "confirm_hits", "confirm_window", "max_misses", "init_velocity_sigma",
                    "covariance_floor"});
    opt_number(o, "tracker", "sigma_v", s.tracker.sigma_v);
    opt_number(o, "tracker", "gate", s.tracker.gate);
    opt_int(o, "tracker", "confirm_hits", s.tracker.confirm_hits);
    opt_int(o, "tracker", "confirm_window", s.tracker.confirm_window);
    opt_int(o, "tracker", "max_misses", s.tracker.max_misses);
    opt_number(o, "tracker", "init_velocity_sigma", s.tracker.init_velocity_sigma);
    opt_number(o, "tracker", "covariance_floor", s.tracker.covariance_floor);
  }

  if (root.contains("consensus")) {
    const json& o = root.at("consensus");
    reject_unknown(o, "consensus", {"ospa", "retention_length", "matching_window", "evaluation_node"});
    if (o.contains("ospa")) s.consensus.ospa = read_ospa(o.at("ospa"), "consensus.ospa");
    if (o.contains("retention_length")) {
      const long long v = read_integer(o.at("retention_length"), "consensus.retention_length");
      if (v < 0) fail("consensus.retention_length", "must be >= 0");
      s.consensus.retention_length = static_cast<std::size_t>(v);
    }
    opt_int(o, "consensus", "matching_window", s.consensus.matching_window);
    opt_int(o, "consensus", "evaluation_node", s.consensus.evaluation_node);
  }

  // Separation radius and step default to the matching cut-off and the scenario step.
  MpcParams mpc_defaults;
  mpc_defaults.separation = s.consensus.ospa.c;
  mpc_defaults.dt = s.dt;
  s.attack.mpc = mpc_defaults;
  if (root.contains("attack")) {
    const json& o = root.at("attack");
    reject_unknown(o, "attack",
                   {"compromised_nodes", "start_step", "victim_selector", "victim_point", "impostor_min_reports",
                    "rendezvous", "visibility_timeout", "association_gate", "mpc"});
    if (o.contains("compromised_nodes")) {
      const json& c = o.at("compromised_nodes");
      if (!c.is_array()) fail("attack.compromised_nodes", "must be an array");
      for (std::size_t j = 0; j < c.size(); ++j) {
        s.attack.compromised_nodes.insert(
            static_cast<NodeId>(read_integer(c[j], "attack.compromised_nodes[" + std::to_string(j) + "]")));
      }
    }
    opt_int(o, "attack", "start_step", s.attack.start_step);
    if (o.contains("victim_selector")) {
      s.attack.victim_selector =
          read_enum<VictimSelector>(o.at("victim_selector"), "attack.victim_selector",
                                    {{"earliest", VictimSelector::earliest}, {"nearest", VictimSelector::nearest}});
    }
    if (o.contains("victim_point")) s.attack.victim_point = read_vec2(o.at("victim_point"), "attack.victim_point");
    opt_int(o, "attack", "impostor_min_reports", s.attack.impostor_min_reports);
    if (o.contains("rendezvous") && !o.at("rendezvous").is_null()) {
      s.attack.rendezvous = read_vec2(o.at("rendezvous"), "attack.rendezvous");
    }
    opt_int(o, "attack", "visibility_timeout", s.attack.visibility_timeout);
    opt_number(o, "attack", "association_gate", s.attack.association_gate);
    if (o.contains("mpc")) s.attack.mpc = read_mpc(o.at("mpc"), "attack.mpc", mpc_defaults);
  }

  s.validate();
  return s;
}

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("<root>: malformed JSON: ") + e.what());
  }
  return from_json(root);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string scenario_to_json(const Scenario& s, int indent) {
  json root;
  root["name"] = s.name;
  root["horizon"] = s.horizon;
  root["dt"] = s.dt;
  root["seed"] = s.seed;
  root["area"] = {{"min", vec(s.area.min)}, {"max", vec(s.area.max)}};
  root["nodes"] = json::array();
  for (const auto& n : s.nodes) {
    root["nodes"].push_back({{"id", n.id},
                             {"position", vec(n.position)},
                             {"boresight", vec(n.boresight)},
                             {"half_angle_deg", n.half_angle_deg},
                             {"range", n.range},
                             {"neighbors", n.neighbors}});
  }
  root["targets"] = json::array();
  for (const auto& t : s.targets) {
    json wps = json::array();
    for (const auto& w : t.waypoints) wps.push_back({{"time", w.time}, {"position", vec(w.position)}});
    root["targets"].push_back({{"id", t.id}, {"role", to_string(t.role)}, {"waypoints", wps}});
  }
  root["sensing"] = {{"detection_probability", s.sensing.detection_probability},
                     {"sigma_r", s.sensing.sigma_r},
                     {"clutter_rate", s.sensing.clutter_rate}};
  root["tracker"] = {{"sigma_v", s.tracker.sigma_v},
                     {"gate", s.tracker.gate},
                     {"confirm_hits", s.tracker.confirm_hits},
                     {"confirm_window", s.tracker.confirm_window},
                     {"max_misses", s.tracker.max_misses},
                     {"init_velocity_sigma", s.tracker.init_velocity_sigma},
                     {"covariance_floor", s.tracker.covariance_floor}};
  const auto& o = s.consensus.ospa;
  root["consensus"] = {
      {"ospa",
       {{"c", o.c},
        {"p", o.p},
        {"base", o.base == BaseDistance::manhattan ? "manhattan" : "euclidean"},
        {"space", o.space == StateSpace::position ? "position" : "state"}}},
      {"retention_length", s.consensus.retention_length},
      {"matching_window", s.consensus.matching_window},
      {"evaluation_node", s.consensus.evaluation_node}};
  const auto& m = s.attack.mpc;
  root["attack"] = {{"compromised_nodes", s.attack.compromised_nodes},
                    {"start_step", s.attack.start_step},
                    {"victim_selector", to_string(s.attack.victim_selector)},
                    {"victim_point", vec(s.attack.victim_point)},
                    {"impostor_min_reports", s.attack.impostor_min_reports},
                    {"rendezvous", s.attack.rendezvous ? vec(*s.attack.rendezvous) : json(nullptr)},
                    {"visibility_timeout", s.attack.visibility_timeout},
                    {"association_gate", s.attack.association_gate},
                    {"mpc",
                     {{"horizon", m.horizon},
                      {"alpha_p", m.alpha_p},
                      {"alpha_v", m.alpha_v},
                      {"alpha_c", m.alpha_c},
                      {"gamma_p", m.gamma_p},
                      {"gamma_v", m.gamma_v},
                      {"separation", m.separation},
                      {"v_max", m.v_max},
                      {"a_max", m.a_max},
                      {"dt", m.dt},
                      {"gradient_tolerance", m.gradient_tolerance},
                      {"max_iterations", m.max_iterations}}}};
  return root.dump(indent);
}

}  // namespace tcsim
