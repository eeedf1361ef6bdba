#include "hypercp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hypercp {

namespace {

std::string join(const std::vector<std::string>& parts,
                 const std::string& sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += sep;
    out += parts[k];
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& msg) {
  throw ConfigError({msg});
}

double parse_double(const std::string& where, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    fail(where + ": not a number: '" + value + "'");
  }
  return x;
}

long long parse_int(const std::string& where, const std::string& value) {
  const std::string v = trim(value);
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    fail(where + ": not an integer: '" + value + "'");
  }
  return x;
}

bool parse_bool(const std::string& where, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(where + ": not a boolean: '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& where,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(where, item));
  }
  if (out.empty()) fail(where + ": empty list");
  return out;
}

Vec3 parse_vec3(const std::string& where, const std::string& value) {
  const std::vector<double> v = parse_double_list(where, value);
  if (v.size() != 3) fail(where + ": expected three comma-separated numbers");
  return Vec3{v[0], v[1], v[2]};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_vec3(Vec3 v) {
  return format_double(v.x) + "," + format_double(v.y) + "," +
         format_double(v.z);
}

void apply_key(ExperimentSpec& spec, const std::string& section,
               const std::string& key, const std::string& value) {
  const std::string where = section + "." + key;
  RunConfig& base = spec.base;
  if (section == "scene") {
    SceneConfig& s = base.scene;
    if (key == "y_max_cm") s.y_max_cm = parse_double(where, value);
    else if (key == "z_max_cm") s.z_max_cm = parse_double(where, value);
    else if (key == "source_start_cm") s.source_start_cm = parse_vec3(where, value);
    else if (key == "source_end_cm") s.source_end_cm = parse_vec3(where, value);
    else if (key == "speed_cm_per_s") s.speed_cm_per_s = parse_double(where, value);
    else if (key == "cone_opening_deg") s.cone_opening_deg = parse_double(where, value);
    else if (key == "tx_power_mw") s.tx_power_mw = parse_double(where, value);
    else fail("unknown key '" + where + "'");
  } else if (section == "energy") {
    EnergyConfig& e = base.energy;
    if (key == "harvest_rate_pj_per_s") e.harvest_rate_pj_per_s = parse_double(where, value);
    else if (key == "drain_per_tx_pj") e.drain_per_tx_pj = parse_double(where, value);
    else if (key == "capacity_pj") {
      e.capacity_pj = parse_double(where, value);
      e.initial_battery_pj = std::min(e.initial_battery_pj, e.capacity_pj);
    } else if (key == "rest_duration_s") e.rest_duration_s = parse_double(where, value);
    else if (key == "initial_battery_pj") e.initial_battery_pj = parse_double(where, value);
    else fail("unknown key '" + where + "'");
  } else if (section == "routing") {
    RoutingConfig& r = base.routing;
    if (key == "battery_threshold_fraction") {
      r.battery_threshold_fraction = parse_double(where, value);
    } else if (key == "variant") {
      const std::string v = trim(value);
      if (v == "ideal") r.variant = Variant::ideal;
      else if (v == "estimated") r.variant = Variant::estimated;
      else fail(where + ": expected ideal|estimated, got '" + value + "'");
    } else fail("unknown key '" + where + "'");
  } else if (section == "sim") {
    if (key == "sensing_period_s") base.sensing_period_s = parse_double(where, value);
    else if (key == "link_delay_s") base.link_delay_s = parse_double(where, value);
    else if (key == "seed") base.seed = static_cast<std::uint64_t>(parse_int(where, value));
    else if (key == "duration_s") {
      const std::string v = trim(value);
      base.duration_s = (v == "auto") ? -1.0 : parse_double(where, value);
    } else if (key == "queue_capacity") base.queue_capacity = static_cast<int>(parse_int(where, value));
    else if (key == "grid_rows" || key == "grid_cols") {
      const int n = static_cast<int>(parse_int(where, value));
      int rows = base.topo.n_rows, cols = base.topo.n_cols;
      if (key == "grid_rows") rows = n; else cols = n;
      base.topo = GridTopology::make_default(rows, cols);
    } else if (key == "metric_sample_period_s") {
      base.metric_sample_period_s = parse_double(where, value);
    } else fail("unknown key '" + where + "'");
  } else if (section == "experiment") {
    if (key == "periods") spec.periods = parse_double_list(where, value);
    else if (key == "replications") spec.replications = static_cast<int>(parse_int(where, value));
    else if (key == "variants") {
      const std::string v = trim(value);
      if (v == "ideal") { spec.run_ideal = true; spec.run_estimated = false; }
      else if (v == "estimated") { spec.run_ideal = false; spec.run_estimated = true; }
      else if (v == "both") { spec.run_ideal = true; spec.run_estimated = true; }
      else fail(where + ": expected ideal|estimated|both, got '" + value + "'");
    } else if (key == "out_dir") spec.out_dir = trim(value);
    else if (key == "trace") spec.trace = parse_bool(where, value);
    else if (key == "threads") spec.threads = static_cast<int>(parse_int(where, value));
    else fail("unknown key '" + where + "'");
  } else {
    fail("unknown section '[" + section + "]'");
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error(join(v, "; ")), violations(std::move(v)) {}

void apply_config_text(ExperimentSpec& spec, const std::string& text,
                       const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        fail(origin + ":" + std::to_string(line_no) + ": malformed section");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      fail(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty()) {
      fail(origin + ":" + std::to_string(line_no) + ": key '" + key +
           "' outside any section");
    }
    apply_key(spec, section, key, value);
  }
}

void apply_config_file(ExperimentSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(spec, ss.str(), path);
}

void apply_preset(ExperimentSpec& spec, const std::string& name) {
  if (name == "paper-fig4-7") {
    spec.periods = {0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
    spec.run_ideal = true;
    spec.run_estimated = true;
    spec.preset = name;
    return;
  }
  fail("unknown preset '" + name + "'");
}

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> v = spec.base.validate();
  if (spec.periods.empty()) v.push_back("experiment.periods must be non-empty");
  for (double p : spec.periods) {
    if (!(p > 0.0)) {
      v.push_back("experiment.periods entries must be > 0 (got " +
                  format_double(p) + ")");
    }
  }
  if (spec.replications < 1) {
    v.push_back("experiment.replications must be >= 1");
  }
  if (!spec.run_ideal && !spec.run_estimated) {
    v.push_back("experiment.variants selects no variant");
  }
  if (spec.threads < 0) v.push_back("experiment.threads must be >= 0");
  if (spec.out_dir.empty()) v.push_back("experiment.out_dir must be set");
  return v;
}

std::string render_effective_config(const ExperimentSpec& spec) {
  const RunConfig& b = spec.base;
  std::ostringstream os;
  os << "[scene]\n";
  os << "y_max_cm = " << format_double(b.scene.y_max_cm) << "\n";
  os << "z_max_cm = " << format_double(b.scene.z_max_cm) << "\n";
  os << "source_start_cm = " << format_vec3(b.scene.source_start_cm) << "\n";
  os << "source_end_cm = " << format_vec3(b.scene.source_end_cm) << "\n";
  os << "speed_cm_per_s = " << format_double(b.scene.speed_cm_per_s) << "\n";
  os << "cone_opening_deg = " << format_double(b.scene.cone_opening_deg) << "\n";
  os << "tx_power_mw = " << format_double(b.scene.tx_power_mw) << "\n";
  os << "\n[energy]\n";
  os << "harvest_rate_pj_per_s = "
     << format_double(b.energy.harvest_rate_pj_per_s) << "\n";
  os << "drain_per_tx_pj = " << format_double(b.energy.drain_per_tx_pj) << "\n";
  os << "capacity_pj = " << format_double(b.energy.capacity_pj) << "\n";
  os << "rest_duration_s = " << format_double(b.energy.rest_duration_s) << "\n";
  os << "initial_battery_pj = " << format_double(b.energy.initial_battery_pj)
     << "\n";
  os << "\n[routing]\n";
  os << "battery_threshold_fraction = "
     << format_double(b.routing.battery_threshold_fraction) << "\n";
  os << "variant = " << to_string(b.routing.variant) << "\n";
  os << "\n[sim]\n";
  os << "sensing_period_s = " << format_double(b.sensing_period_s) << "\n";
  os << "link_delay_s = " << format_double(b.link_delay_s) << "\n";
  os << "seed = " << b.seed << "\n";
  if (b.duration_s < 0.0) {
    os << "duration_s = auto\n";
  } else {
    os << "duration_s = " << format_double(b.duration_s) << "\n";
  }
  os << "queue_capacity = " << b.queue_capacity << "\n";
  os << "grid_rows = " << b.topo.n_rows << "\n";
  os << "grid_cols = " << b.topo.n_cols << "\n";
  os << "metric_sample_period_s = " << format_double(b.metric_sample_period_s)
     << "\n";
  os << "\n[experiment]\n";
  os << "periods = ";
  for (std::size_t k = 0; k < spec.periods.size(); ++k) {
    if (k) os << ",";
    os << format_double(spec.periods[k]);
  }
  os << "\n";
  os << "replications = " << spec.replications << "\n";
  os << "variants = "
     << (spec.run_ideal && spec.run_estimated
             ? "both"
             : (spec.run_ideal ? "ideal" : "estimated"))
     << "\n";
  os << "out_dir = " << spec.out_dir << "\n";
  os << "trace = " << (spec.trace ? "true" : "false") << "\n";
  os << "threads = " << spec.threads << "\n";
  return os.str();
}

std::uint64_t config_hash(const ExperimentSpec& spec) {
  const std::string text = render_effective_config(spec);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<Variant> spec_variants(const ExperimentSpec& spec) {
  std::vector<Variant> v;
  if (spec.run_ideal) v.push_back(Variant::ideal);
  if (spec.run_estimated) v.push_back(Variant::estimated);
  return v;
}

}  // namespace hypercp
