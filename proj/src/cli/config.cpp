#include "gjj/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gjj/error.hpp"

namespace gjj::cli {

namespace {

using FT = FieldType;
using C = Constraint;

std::vector<Field> build_schema() {
  return {
      {"experiment", FT::text, "", C::any, {}, "experiment name (must match the subcommand when given)"},

      {"model.omega", FT::number, "1", C::positive, {}, "bare mechanical frequency (dynamics unit)"},
      {"model.lambda_ratio", FT::number, "0.8", C::nonnegative, {}, "Lambda / Lambda_c in [0, 1)"},
      {"model.xi", FT::number, "0", C::nonnegative, {}, "quartic nonlinearity xi"},
      {"model.quality", FT::number, "1e6", C::positive, {}, "mechanical quality factor, gamma = omega / Q"},
      {"model.gamma", FT::number, "0", C::nonnegative, {}, "mechanical damping; 0 takes omega / quality"},
      {"model.temperature", FT::number, "0", C::nonnegative, {}, "bath temperature (units of omega)"},
      {"model.scaling", FT::number, "1", C::any, {}, "exponent p of Lambda ~ omega^-p"},
      {"model.generator", FT::text, "eigenbasis", C::any, {"eigenbasis", "squeezed", "local"}, "dissipator family"},
      {"model.gamma_tracks_omega", FT::boolean, "true", C::any, {}, "gamma(w) = gamma w / omega"},

      {"coupling.source", FT::text, "direct", C::any, {"direct", "physical"}, "G2 from coupling.* or from junction.*"},
      {"coupling.g2", FT::number, "-0.0159", C::any, {}, "G2 in units of omega (direct path)"},
      {"coupling.eta_tilde", FT::number, "0.0417", C::nonnegative, {}, "circuit anharmonicity in units of omega (direct path)"},

      {"junction.delta0_mev", FT::number, "0.2", C::positive, {}, "superconducting gap (meV)"},
      {"junction.length_nm", FT::number, "35", C::positive, {}, "junction length L0 (nm)"},
      {"junction.width_nm", FT::number, "350", C::positive, {}, "junction width W (nm)"},
      {"junction.mu_mev", FT::number, "0", C::any, {}, "chemical potential (meV)"},
      {"junction.fermi_velocity", FT::number, "2.5e6", C::positive, {}, "Fermi velocity (m/s)"},
      {"junction.charging_energy", FT::number, "1e6", C::positive, {}, "charging energy Ec (rad/s)"},
      {"junction.tail_tolerance", FT::number, "1e-12", C::positive, {}, "mode-sum cut"},
      {"membrane.omega", FT::number, "1e6", C::positive, {}, "membrane frequency (rad/s)"},
      {"membrane.mass", FT::number, "0", C::nonnegative, {}, "effective mass (kg); 0 uses the graphene areal density"},
      {"membrane.zzpf", FT::number, "0", C::nonnegative, {}, "zero-point amplitude (m); overrides the mass when > 0"},

      {"drive.amplitude", FT::number, "1", C::any, {}, "drive amplitude A (units of omega)"},
      {"drive.detuning", FT::number, "0", C::any, {}, "detuning delta when drive.resonance is false"},
      {"drive.resonance", FT::boolean, "true", C::any, {}, "solve delta for omega_a = 2 omega_b"},
      {"dissipation.kappa", FT::number, "0.1", C::nonnegative, {}, "circuit decay rate"},
      {"dissipation.nbar_b", FT::number, "10", C::nonnegative, {}, "mechanical bath occupation"},

      {"numerics.na", FT::integer, "8", C::positive, {}, "circuit truncation"},
      {"numerics.nb", FT::integer, "0", C::nonnegative, {}, "mechanical truncation; 0 uses the experiment default"},
      {"numerics.leakage_tol", FT::number, "1e-4", C::positive, {}, "top-level population tolerance"},
      {"numerics.time_points", FT::integer, "801", C::positive, {}, "time grid size"},
      {"numerics.t_max", FT::number, "0", C::nonnegative, {}, "final time; 0 uses t_max_factor / (gamma cosh^2 r)"},
      {"numerics.t_max_factor", FT::number, "8", C::positive, {}, "final time in units of the dressed decay time"},
      {"numerics.fd_step", FT::number, "0", C::nonnegative, {}, "finite-difference step in omega; 0 picks one"},
      {"numerics.steady_fd_step", FT::number, "1e-5", C::positive, {}, "finite-difference step for steady-state QFI"},
      {"numerics.dense_limit", FT::integer, "32", C::positive, {}, "largest dimension solved densely"},
      {"numerics.richardson", FT::boolean, "true", C::any, {}, "check the dynamical QFI at h/2"},

      {"junction_sweep.mu_min_mev", FT::number, "0", C::any, {}, "first chemical potential (meV)"},
      {"junction_sweep.mu_max_mev", FT::number, "100", C::any, {}, "last chemical potential (meV)"},
      {"junction_sweep.mu_points", FT::integer, "21", C::positive, {}, "number of chemical potentials"},

      {"cooling_map.detuning_min", FT::number, "1.6", C::any, {}, "first detuning"},
      {"cooling_map.detuning_max", FT::number, "2.6", C::any, {}, "last detuning"},
      {"cooling_map.detuning_points", FT::integer, "6", C::positive, {}, "detunings per amplitude"},
      {"cooling_map.amplitudes", FT::list, "0.5,1", C::any, {}, "drive amplitudes"},

      {"cat.beta", FT::number, "2", C::positive, {}, "coherent amplitude of the initial state"},
      {"cat.m", FT::integer, "2", C::positive, {}, "number of cat components"},
      {"cat.model", FT::text, "squeezed", C::any, {"squeezed", "kerr"}, "full squeezed-frame H or the Kerr reduction"},
      {"cat.gamma", FT::number, "0", C::nonnegative, {}, "mechanical damping during generation"},
      {"cat.extent", FT::number, "5", C::positive, {}, "Wigner grid half-width"},
      {"cat.grid_points", FT::integer, "101", C::positive, {}, "Wigner grid points per axis"},

      {"scan.ratios", FT::list, "0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95", C::any, {}, "Lambda / Lambda_c values"},
      {"scan.temperatures", FT::list, "0,0.25,0.5,1,2", C::any, {}, "temperatures"},
      {"scan.xis", FT::list, "0,5e-5", C::any, {}, "xi values for the temperature scan"},
  };
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::config, key + ": " + what);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  config_error(key, "expected a boolean, got '" + v + "'");
}

void check_constraint(const Field& f, double v) {
  if (!std::isfinite(v)) config_error(f.key, "must be finite");
  if (f.constraint == Constraint::positive && !(v > 0.0)) config_error(f.key, "must be positive");
  if (f.constraint == Constraint::nonnegative && !(v >= 0.0)) config_error(f.key, "must be non-negative");
}

void validate(const Field& f, const std::string& value) {
  switch (f.type) {
    case FieldType::number:
      check_constraint(f, parse_number(f.key, value));
      break;
    case FieldType::integer: {
      int v = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        config_error(f.key, "expected an integer, got '" + value + "'");
      }
      check_constraint(f, v);
      break;
    }
    case FieldType::boolean:
      parse_bool(f.key, value);
      break;
    case FieldType::text:
      if (!f.choices.empty() && std::find(f.choices.begin(), f.choices.end(), value) == f.choices.end()) {
        std::string allowed;
        for (const auto& c : f.choices) allowed += (allowed.empty() ? "" : ", ") + c;
        config_error(f.key, "unknown value '" + value + "' (allowed: " + allowed + ")");
      }
      break;
    case FieldType::list:
      for (double v : parse_list(f.key, value)) check_constraint(f, v);
      break;
  }
}

}  // namespace

const std::vector<Field>& schema() {
  static const std::vector<Field> s = build_schema();
  return s;
}

const Field* find_field(const std::string& key) {
  for (const Field& f : schema())
    if (f.key == key) return &f;
  return nullptr;
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    config_error(key, "expected a number, got '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
  return out;
}

Config Config::from_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::config, "config file " + path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  Config c;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      c.set(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) c.set(name + "." + key, leaf.data());
  }
  return c;
}

Config Config::from_map(const std::map<std::string, std::string>& values) {
  Config c;
  for (const auto& [k, v] : values) c.set(k, v);
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  const Field* f = find_field(key);
  if (!f) config_error(key, "unknown configuration field");
  const std::string v = trim(value);
  validate(*f, v);
  values_[key] = v;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error(ErrorKind::config, "override '" + assignment + "' is not of the form key=value");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

const std::string& Config::raw(const std::string& key, FieldType expected) const {
  const Field* f = find_field(key);
  if (!f) config_error(key, "unknown configuration field");
  if (f->type != expected) config_error(key, "read with the wrong type");
  const auto it = values_.find(key);
  return it == values_.end() ? f->default_value : it->second;
}

double Config::number(const std::string& key) const { return parse_number(key, raw(key, FieldType::number)); }

int Config::integer(const std::string& key) const { return std::stoi(raw(key, FieldType::integer)); }

bool Config::flag(const std::string& key) const { return parse_bool(key, raw(key, FieldType::boolean)); }

std::string Config::text(const std::string& key) const { return raw(key, FieldType::text); }

std::vector<double> Config::list(const std::string& key) const { return parse_list(key, raw(key, FieldType::list)); }

std::map<std::string, std::string> Config::resolved() const {
  std::map<std::string, std::string> out;
  for (const Field& f : schema()) {
    const auto it = values_.find(f.key);
    out[f.key] = it == values_.end() ? f.default_value : it->second;
  }
  return out;
}

}  // namespace gjj::cli
