#include "rmprod/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rmprod {

std::string pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::product: return "product";
    case Pipeline::coefficients: return "coefficients";
    case Pipeline::sde: return "sde";
    case Pipeline::strip_spectrum: return "strip-spectrum";
    case Pipeline::sde_spectrum: return "sde-spectrum";
    case Pipeline::goe_compare: return "goe-compare";
    case Pipeline::flag: return "flag";
    case Pipeline::band_edge: return "band-edge";
  }
  return "?";
}

Pipeline pipeline_from_name(const std::string& name) {
  static const std::map<std::string, Pipeline> table = {
      {"product", Pipeline::product},
      {"coefficients", Pipeline::coefficients},
      {"sde", Pipeline::sde},
      {"strip-spectrum", Pipeline::strip_spectrum},
      {"sde-spectrum", Pipeline::sde_spectrum},
      {"goe-compare", Pipeline::goe_compare},
      {"flag", Pipeline::flag},
      {"band-edge", Pipeline::band_edge},
  };
  auto it = table.find(name);
  if (it == table.end()) {
    std::string names;
    for (const auto& [k, v] : table) {
      if (!names.empty()) names += ", ";
      names += k;
    }
    throw ValidationError("config: unknown pipeline '" + name +
                          "' (expected one of: " + names + ")");
  }
  return it->second;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ValidationError("config: key '" + key + "' needs a number, got '" +
                          value + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long x = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ValidationError("config: key '" + key + "' needs an integer, got '" +
                          value + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ValidationError("config: key '" + key +
                          "' needs a nonnegative integer, got '" + value + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError("config: key '" + key + "' needs true/false, got '" +
                        value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ValidationError("config: key '" + key + "' has an empty list item");
    out.push_back(parse_double(key, item));
  }
  if (out.empty())
    throw ValidationError("config: key '" + key + "' needs a nonempty list");
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  bool saw_pipeline = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: line " + std::to_string(lineno) +
                            " is not 'key = value': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ValidationError("config: line " + std::to_string(lineno) +
                            " has an empty key or value");
    if (cfg.echo.count(key))
      throw ValidationError("config: duplicate key '" + key + "'");
    cfg.echo[key] = value;

    if (key == "pipeline") {
      cfg.pipeline = pipeline_from_name(value);
      saw_pipeline = true;
    } else if (key == "d") {
      cfg.d = static_cast<int>(parse_int(key, value));
    } else if (key == "E") {
      cfg.E = parse_double(key, value);
    } else if (key == "r") {
      cfg.r = parse_double(key, value);
    } else if (key == "potential") {
      cfg.potential = value;
    } else if (key == "d0") {
      cfg.d0 = static_cast<int>(parse_int(key, value));
    } else if (key == "d1") {
      cfg.d1 = static_cast<int>(parse_int(key, value));
    } else if (key == "d2") {
      cfg.d2 = static_cast<int>(parse_int(key, value));
    } else if (key == "gamma0") {
      cfg.gamma0 = parse_double(key, value);
    } else if (key == "phases") {
      cfg.phases = parse_list(key, value);
    } else if (key == "noise") {
      cfg.noise = value;
    } else if (key == "magnitudes") {
      cfg.magnitudes = parse_list(key, value);
    } else if (key == "lambda") {
      cfg.lambda = parse_double(key, value);
      if (cfg.lambda < 0.0)
        throw ValidationError("config: lambda must be >= 0");
    } else if (key == "n") {
      cfg.n = static_cast<int>(parse_int(key, value));
    } else if (key == "t_final") {
      cfg.t_final = parse_double(key, value);
    } else if (key == "dt") {
      cfg.dt = parse_double(key, value);
    } else if (key == "sigma") {
      cfg.sigma = parse_double(key, value);
    } else if (key == "eps") {
      cfg.eps = parse_double(key, value);
    } else if (key == "eps_min") {
      cfg.eps_min = parse_double(key, value);
    } else if (key == "eps_max") {
      cfg.eps_max = parse_double(key, value);
    } else if (key == "eps_points") {
      cfg.eps_points = static_cast<int>(parse_int(key, value));
    } else if (key == "window") {
      cfg.window = parse_double(key, value);
    } else if (key == "mesh") {
      cfg.mesh = static_cast<int>(parse_int(key, value));
    } else if (key == "n_samples") {
      cfg.n_samples = static_cast<int>(parse_int(key, value));
    } else if (key == "replicas") {
      cfg.replicas = static_cast<int>(parse_int(key, value));
    } else if (key == "method") {
      cfg.method = value;
    } else if (key == "z_star_phases") {
      cfg.z_star_phases = parse_list(key, value);
    } else if (key == "recenter") {
      cfg.recenter = parse_bool(key, value);
    } else if (key == "theta") {
      cfg.theta = parse_double(key, value);
    } else if (key == "v_var") {
      cfg.v_var = parse_double(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_u64(key, value);
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(parse_int(key, value));
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  if (!saw_pipeline) throw ValidationError("config: missing required key 'pipeline'");
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

double ExperimentConfig::effective_lambda() const {
  if (lambda >= 0.0) return lambda;
  if (n < 1)
    throw ValidationError("config: lambda defaults to sigma/sqrt(n), needs n >= 1");
  return sigma / std::sqrt(static_cast<double>(n));
}

CVector ExperimentConfig::z_star(int d_e) const {
  CVector zs = CVector::Ones(d_e);
  if (!z_star_phases.empty()) {
    if (static_cast<int>(z_star_phases.size()) != d_e)
      throw ValidationError("config: z_star_phases needs " + std::to_string(d_e) +
                            " entries, got " + std::to_string(z_star_phases.size()));
    for (int j = 0; j < d_e; ++j) zs(j) = std::polar(1.0, z_star_phases[j]);
  }
  return zs;
}

void ExperimentConfig::validate() const {
  if (workers < 1) throw ValidationError("config: workers must be >= 1");
  if (replicas < 1) throw ValidationError("config: replicas must be >= 1");
  if (output_dir.empty()) throw ValidationError("config: output_dir must be set");
  if (potential != "gaussian" && potential != "rademacher" && potential != "uniform")
    throw ValidationError("config: potential must be gaussian, rademacher or uniform");
  if (noise != "gaussian" && noise != "complex" && noise != "rademacher" &&
      noise != "uniform")
    throw ValidationError("config: noise must be gaussian, complex, rademacher or uniform");
  if (!(sigma >= 0.0)) throw ValidationError("config: sigma must be >= 0");
  if (eps_points < 0) throw ValidationError("config: eps_points must be >= 0");
  if (eps_points > 0 && !(eps_min < eps_max))
    throw ValidationError("config: eps grid needs eps_min < eps_max");

  const bool strip_like = pipeline == Pipeline::strip_spectrum ||
                          pipeline == Pipeline::sde_spectrum ||
                          pipeline == Pipeline::goe_compare;
  const bool block_like = pipeline == Pipeline::product ||
                          pipeline == Pipeline::coefficients ||
                          pipeline == Pipeline::sde;
  if (strip_like && d < 1)
    throw ValidationError("config: strip pipelines need d >= 1");
  if (block_like) {
    if (d0 < 0 || d1 < 0 || d2 < 0)
      throw ValidationError("config: block dimensions must be >= 0");
    if (d0 + d1 + d2 < 1)
      throw ValidationError("config: block model needs d0 + d1 + d2 >= 1");
    if (!(gamma0 > 0.0 && gamma0 < 1.0))
      throw ValidationError("config: gamma0 must lie in (0, 1)");
    if (!phases.empty() && static_cast<int>(phases.size()) != d1)
      throw ValidationError("config: phases needs d1 entries");
  }

  switch (pipeline) {
    case Pipeline::product:
      if (n < 1) throw ValidationError("config: product needs n >= 1");
      break;
    case Pipeline::coefficients:
      break;
    case Pipeline::sde:
      if (!(t_final > 0.0 && dt > 0.0))
        throw ValidationError("config: sde needs t_final > 0 and dt > 0");
      break;
    case Pipeline::strip_spectrum:
      if (n < 1) throw ValidationError("config: strip-spectrum needs n >= 1");
      if (!(window > 0.0)) throw ValidationError("config: window must be > 0");
      if (method != "eigensolve" && method != "detscan" && method != "banded")
        throw ValidationError(
            "config: method must be eigensolve, banded, or detscan");
      break;
    case Pipeline::sde_spectrum:
      if (!(dt > 0.0)) throw ValidationError("config: sde-spectrum needs dt > 0");
      if (!(window > 0.0)) throw ValidationError("config: window must be > 0");
      break;
    case Pipeline::goe_compare:
      if (n < 1) throw ValidationError("config: goe-compare needs n >= 1");
      if (!(window > 0.0)) throw ValidationError("config: window must be > 0");
      if (n_samples < 1)
        throw ValidationError("config: goe-compare needs n_samples >= 1");
      break;
    case Pipeline::flag:
      if (magnitudes.size() < 2)
        throw ValidationError("config: flag needs at least two magnitudes");
      if (n < 1) throw ValidationError("config: flag needs n >= 1");
      break;
    case Pipeline::band_edge:
      if (d < 1) throw ValidationError("config: band-edge needs d >= 1");
      if (!(t_final > 0.0 && dt > 0.0))
        throw ValidationError("config: band-edge needs t_final > 0 and dt > 0");
      if (!(v_var >= 0.0)) throw ValidationError("config: v_var must be >= 0");
      break;
  }
}

}  // namespace rmprod
