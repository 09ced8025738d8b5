#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rtetr/error.hpp"

namespace rtetr::experiment {
namespace {

std::string where(const YAML::Node& node) {
  const auto m = node.Mark();
  if (m.line < 0) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

void require_map(const YAML::Node& node, const std::string& name,
                 const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("'" + name + "' must be a mapping" + where(node));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in '" + name + "'" + where(kv.first));
  }
}

template <class T>
T get(const YAML::Node& node, const std::string& key, const T& fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for '" + key + "'" + where(v));
  }
}

// Number, or the string "auto".
std::optional<double> get_auto(const YAML::Node& node, const std::string& key) {
  const YAML::Node v = node[key];
  if (!v) return std::nullopt;
  if (v.IsScalar() && v.as<std::string>() == "auto") return std::nullopt;
  try {
    return v.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + key + "' must be a number or auto" + where(v));
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::array<double, 2> get_point(const YAML::Node& node, const std::string& key,
                                std::array<double, 2> fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  if (v.IsScalar()) return {v.as<double>(), fallback[1]};
  if (!v.IsSequence() || v.size() < 1 || v.size() > 2)
    throw ConfigError("'" + key + "' must be [x] or [x, y]" + where(v));
  return {v[0].as<double>(), v.size() == 2 ? v[1].as<double>() : fallback[1]};
}

ProfileSpec parse_profile(const YAML::Node& node, const std::string& name,
                          const std::filesystem::path& base) {
  ProfileSpec p;
  if (!node) return p;
  require_map(node, name,
              {"kind", "center", "width", "radius", "amplitude", "anisotropy", "path"});
  p.kind = get<std::string>(node, "kind", p.kind);
  static const std::set<std::string> kinds{"gaussian", "box", "ring", "zero", "random", "file"};
  if (!kinds.count(p.kind)) throw ConfigError("unknown " + name + " kind '" + p.kind + "'");
  p.center = get_point(node, "center", p.center);
  p.width = get<double>(node, "width", p.width);
  p.radius = get<double>(node, "radius", p.radius);
  p.amplitude = get<double>(node, "amplitude", p.amplitude);
  p.anisotropy = get<double>(node, "anisotropy", p.anisotropy);
  p.path = resolve(base, get<std::string>(node, "path", ""));
  if (p.kind == "file" && p.path.empty()) throw ConfigError(name + ": kind file needs a path");
  if (!(p.width > 0.0)) throw ConfigError(name + ": width must be positive");
  return p;
}

GeometryConfig parse_geometry(const YAML::Node& node) {
  GeometryConfig g;
  if (!node) throw ConfigError("missing 'geometry' section");
  require_map(node, "geometry",
              {"kind", "length", "width", "height", "radius", "n_cells", "n_theta"});
  try {
    g.kind = geometry_kind_from_string(get<std::string>(node, "kind", "box2d"));
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  g.length = get<double>(node, "length", g.length);
  g.width = get<double>(node, "width", g.width);
  g.height = get<double>(node, "height", g.height);
  g.radius = get<double>(node, "radius", g.radius);
  g.n_cells = get<int>(node, "n_cells", g.n_cells);
  g.n_theta = get<int>(node, "n_theta", g.n_theta);
  return g;
}

MediumSpec parse_medium(const YAML::Node& node, const std::filesystem::path& base) {
  MediumSpec m;
  if (!node) return m;
  require_map(node, "medium",
              {"mu_a", "mu_s", "profile", "mu_a_file", "mu_s_file", "kernel", "g", "kernel_table"});
  m.mu_a = get<double>(node, "mu_a", 0.0);
  m.mu_s = get<double>(node, "mu_s", 0.0);
  m.mu_a_file = resolve(base, get<std::string>(node, "mu_a_file", ""));
  m.mu_s_file = resolve(base, get<std::string>(node, "mu_s_file", ""));
  m.kernel = get<std::string>(node, "kernel", m.kernel);
  m.g = get<double>(node, "g", 0.0);
  m.kernel_table = resolve(base, get<std::string>(node, "kernel_table", ""));
  if (m.kernel != "isotropic" && m.kernel != "hg" && m.kernel != "table")
    throw ConfigError("unknown kernel '" + m.kernel + "' (expected isotropic, hg or table)");
  if (m.kernel == "table" && m.kernel_table.empty())
    throw ConfigError("kernel table requires 'kernel_table'");
  if (const YAML::Node p = node["profile"]) {
    require_map(p, "medium.profile", {"name", "amplitude", "centers", "width"});
    m.profile.name = get<std::string>(p, "name", "");
    if (m.profile.name != "gaussian-bump" && m.profile.name != "two-disk")
      throw ConfigError("unknown medium profile '" + m.profile.name + "'");
    m.profile.amplitude = get<double>(p, "amplitude", m.profile.amplitude);
    m.profile.width = get<double>(p, "width", m.profile.width);
    if (const YAML::Node c = p["centers"]) {
      if (!c.IsSequence()) throw ConfigError("'centers' must be a list of points" + where(c));
      for (const auto& pt : c) {
        if (!pt.IsSequence() || pt.size() != 2)
          throw ConfigError("each centre must be [x, y]" + where(pt));
        m.profile.centers.push_back({pt[0].as<double>(), pt[1].as<double>()});
      }
    }
  }
  return m;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    require_map(root, "config",
                {"name", "geometry", "speed", "medium", "time", "initial", "simulate", "invert",
                 "control", "spectrum", "validate", "output", "seed"});
    cfg.name = get<std::string>(root, "name", "");
    cfg.geometry = parse_geometry(root["geometry"]);
    cfg.geometry.speed = get<double>(root, "speed", 1.0);
    cfg.medium = parse_medium(root["medium"], base_dir);

    if (const YAML::Node t = root["time"]) {
      require_map(t, "time", {"tau", "dt", "cfl_safety"});
      cfg.time.tau = get_auto(t, "tau");
      cfg.time.dt = get_auto(t, "dt");
      cfg.time.cfl_safety = get<double>(t, "cfl_safety", cfg.time.cfl_safety);
    }
    cfg.initial = parse_profile(root["initial"], "initial", base_dir);

    if (const YAML::Node s = root["simulate"]) {
      require_map(s, "simulate", {"record_every"});
      cfg.simulate.record_every = get<std::size_t>(s, "record_every", 0);
    }
    if (const YAML::Node s = root["invert"]) {
      require_map(s, "invert",
                  {"n_iter", "lift", "method", "tol", "max_iter", "inverse_crime_guard"});
      cfg.invert.n_iter = get<int>(s, "n_iter", cfg.invert.n_iter);
      cfg.invert.lift = lift_from_string(get<std::string>(s, "lift", "zero"));
      cfg.invert.method = get<std::string>(s, "method", cfg.invert.method);
      if (cfg.invert.method != "neumann" && cfg.invert.method != "fredholm")
        throw ConfigError("invert.method must be neumann or fredholm");
      cfg.invert.tol = get<double>(s, "tol", cfg.invert.tol);
      cfg.invert.max_iter = get<int>(s, "max_iter", cfg.invert.max_iter);
      cfg.invert.inverse_crime_guard =
          get<bool>(s, "inverse_crime_guard", cfg.invert.inverse_crime_guard);
    }
    if (const YAML::Node s = root["control"]) {
      require_map(s, "control", {"target", "tol", "max_iter", "adjoint", "tikhonov"});
      cfg.control.target = parse_profile(s["target"], "control.target", base_dir);
      cfg.control.tol = get<double>(s, "tol", cfg.control.tol);
      cfg.control.max_iter = get<int>(s, "max_iter", cfg.control.max_iter);
      cfg.control.adjoint = adjoint_mode_from_string(get<std::string>(s, "adjoint", "exact"));
      cfg.control.tikhonov = get<double>(s, "tikhonov", 0.0);
    }
    if (const YAML::Node s = root["spectrum"]) {
      require_map(s, "spectrum", {"iters", "multiples"});
      cfg.spectrum.iters = get<int>(s, "iters", cfg.spectrum.iters);
      cfg.spectrum.multiples = get<std::vector<double>>(s, "multiples", cfg.spectrum.multiples);
    }
    if (const YAML::Node s = root["validate"]) {
      require_map(s, "validate", {"n_random"});
      cfg.validate.n_random = get<int>(s, "n_random", cfg.validate.n_random);
    }
    cfg.output = resolve(base_dir, get<std::string>(root, "output", "out"));
    cfg.seed = get<std::uint64_t>(root, "seed", 1);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }

  if (!(cfg.geometry.speed > 0.0)) throw ConfigError("speed must be positive");
  if (cfg.time.tau && !(*cfg.time.tau > 0.0)) throw ConfigError("tau must be positive");
  if (cfg.time.dt && !(*cfg.time.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.time.cfl_safety > 0.0 && cfg.time.cfl_safety <= 1.0))
    throw ConfigError("cfl_safety must lie in (0, 1]");
  if (cfg.invert.n_iter < 1) throw ConfigError("invert.n_iter must be >= 1");
  if (cfg.spectrum.iters < 3) throw ConfigError("spectrum.iters must be >= 3");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str(), path.parent_path());
  cfg.source = path;
  if (cfg.name.empty()) cfg.name = path.stem().string();
  for (const auto& f : referenced_files(cfg)) {
    if (!std::filesystem::exists(f)) throw ConfigError("referenced file not found: " + f.string());
  }
  return cfg;
}

std::vector<std::filesystem::path> referenced_files(const ExperimentConfig& config) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : {config.source, config.medium.mu_a_file, config.medium.mu_s_file,
                        config.medium.kernel_table, config.initial.path,
                        config.control.target.path}) {
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

namespace {

nlohmann::json profile_json(const ProfileSpec& p) {
  nlohmann::json j{{"kind", p.kind},
                   {"center", p.center},
                   {"width", p.width},
                   {"radius", p.radius},
                   {"amplitude", p.amplitude},
                   {"anisotropy", p.anisotropy}};
  if (!p.path.empty()) j["path"] = p.path.string();
  return j;
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  const auto& g = c.geometry;
  nlohmann::json j;
  j["name"] = c.name;
  j["geometry"] = {{"kind", to_string(g.kind)}, {"length", g.length}, {"width", g.width},
                   {"height", g.height},        {"radius", g.radius}, {"n_cells", g.n_cells},
                   {"n_theta", g.n_theta}};
  j["speed"] = g.speed;
  j["medium"] = {{"mu_a", c.medium.mu_a}, {"mu_s", c.medium.mu_s}, {"kernel", c.medium.kernel},
                 {"g", c.medium.g}};
  if (!c.medium.profile.name.empty()) {
    j["medium"]["profile"] = {{"name", c.medium.profile.name},
                              {"amplitude", c.medium.profile.amplitude},
                              {"centers", c.medium.profile.centers},
                              {"width", c.medium.profile.width}};
  }
  if (!c.medium.mu_a_file.empty()) j["medium"]["mu_a_file"] = c.medium.mu_a_file.string();
  if (!c.medium.mu_s_file.empty()) j["medium"]["mu_s_file"] = c.medium.mu_s_file.string();
  if (!c.medium.kernel_table.empty()) j["medium"]["kernel_table"] = c.medium.kernel_table.string();
  j["time"] = {{"tau", c.time.tau ? nlohmann::json(*c.time.tau) : nlohmann::json("auto")},
               {"dt", c.time.dt ? nlohmann::json(*c.time.dt) : nlohmann::json("auto")},
               {"cfl_safety", c.time.cfl_safety}};
  j["initial"] = profile_json(c.initial);
  j["simulate"] = {{"record_every", c.simulate.record_every}};
  j["invert"] = {{"n_iter", c.invert.n_iter},
                 {"lift", to_string(c.invert.lift)},
                 {"method", c.invert.method},
                 {"tol", c.invert.tol},
                 {"max_iter", c.invert.max_iter},
                 {"inverse_crime_guard", c.invert.inverse_crime_guard}};
  j["control"] = {{"target", profile_json(c.control.target)},
                  {"tol", c.control.tol},
                  {"max_iter", c.control.max_iter},
                  {"adjoint", to_string(c.control.adjoint)},
                  {"tikhonov", c.control.tikhonov}};
  j["spectrum"] = {{"iters", c.spectrum.iters}, {"multiples", c.spectrum.multiples}};
  j["validate"] = {{"n_random", c.validate.n_random}};
  j["output"] = c.output.string();
  j["seed"] = c.seed;
  return j;
}

}  // namespace rtetr::experiment
