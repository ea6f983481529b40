// SPDX-License-Identifier: Apache-2.0

#include "starcf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "starcf/linalg.hpp"
#include "starcf/rng.hpp"

namespace starcf {

std::string to_string(RisMode mode) {
  switch (mode) {
    case RisMode::kStar: return "star";
    case RisMode::kCrisSplit: return "cris-split";
    case RisMode::kNone: return "none";
  }
  return "star";
}

RisMode parse_ris_mode(const std::string& s) {
  if (s == "star") return RisMode::kStar;
  if (s == "cris-split") return RisMode::kCrisSplit;
  if (s == "none") return RisMode::kNone;
  throw std::invalid_argument("unknown ris_mode '" + s + "' (expected star, cris-split or none)");
}

double PathLossModel::path_loss_db(double d_m) const {
  const double d = d_m / 1000.0;
  const double dk0 = d0 / 1000.0;
  const double dk1 = d1 / 1000.0;
  const double mid_offset = (exponent_far - exponent_mid) * 10.0 * std::log10(dk1);
  if (d > dk1) return -const_db - 10.0 * exponent_far * std::log10(d);
  if (d > dk0) return -const_db - mid_offset - 10.0 * exponent_mid * std::log10(d);
  return -const_db - mid_offset - 10.0 * exponent_mid * std::log10(dk0);
}

int SystemConfig::effective_tau_p() const {
  if (tau_p > 0) return tau_p;
  return N_u * ((K + 1) / 2);
}

double SystemConfig::kappa_r(int m) const {
  return kappa_ap.size() == 1 ? kappa_ap.front() : kappa_ap.at(static_cast<std::size_t>(m));
}

double SystemConfig::kappa_t(int k) const {
  return kappa_u.size() == 1 ? kappa_u.front() : kappa_u.at(static_cast<std::size_t>(k));
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("invalid config: " + msg);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_int(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("config key '" + key + "': not an integer: '" + s + "'");
  return static_cast<int>(v);
}

double to_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("config key '" + key + "': not a number: '" + s + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config key '" + key + "': not a boolean: '" + s + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(key, item));
  if (out.empty()) throw std::invalid_argument("config key '" + key + "': empty list");
  return out;
}

double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

struct Field {
  const char* section;
  const char* name;
  std::function<void(SystemConfig&, const std::string&)> set;
  std::function<std::string(const SystemConfig&)> get;
};

#define STARCF_INT_FIELD(sec, member) \
  Field{sec, #member, [](SystemConfig& c, const std::string& v) { c.member = to_int(#member, v); }, \
        [](const SystemConfig& c) { return std::to_string(c.member); }}
#define STARCF_DOUBLE_FIELD(sec, key, member) \
  Field{sec, key, [](SystemConfig& c, const std::string& v) { c.member = to_double(key, v); }, \
        [](const SystemConfig& c) { return fmt(c.member); }}
#define STARCF_DBM_FIELD(sec, key, member) \
  Field{sec, key, [](SystemConfig& c, const std::string& v) { c.member = dbm_to_watt(to_double(key, v)); }, \
        [](const SystemConfig& c) { return fmt(watt_to_dbm(c.member)); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      STARCF_INT_FIELD("system", M),
      STARCF_INT_FIELD("system", K),
      STARCF_INT_FIELD("system", N_ap),
      STARCF_INT_FIELD("system", N_u),
      STARCF_INT_FIELD("system", L_h),
      STARCF_INT_FIELD("system", L_v),
      STARCF_INT_FIELD("system", tau_c),
      STARCF_INT_FIELD("system", tau_p),
      STARCF_DBM_FIELD("system", "p_p_dbm", p_p),
      STARCF_DBM_FIELD("system", "p_u_dbm", p_u),
      STARCF_DBM_FIELD("system", "sigma2_dbm", sigma2),

      STARCF_DOUBLE_FIELD("geometry", "d_user", d_user),
      STARCF_DOUBLE_FIELD("geometry", "d_h", d_h),
      STARCF_DOUBLE_FIELD("geometry", "d_v", d_v),
      STARCF_DOUBLE_FIELD("geometry", "lambda", lambda),
      STARCF_DOUBLE_FIELD("geometry", "r_ap", r_ap),
      STARCF_DOUBLE_FIELD("geometry", "h_ap", h_ap),
      STARCF_DOUBLE_FIELD("geometry", "h_user", h_user),
      STARCF_DOUBLE_FIELD("geometry", "h_ris", h_ris),
      STARCF_DOUBLE_FIELD("geometry", "ris_x", ris_x),
      STARCF_DOUBLE_FIELD("geometry", "ris_y", ris_y),
      Field{"geometry", "direct_blocked",
            [](SystemConfig& c, const std::string& v) { c.direct_blocked = to_bool("direct_blocked", v); },
            [](const SystemConfig& c) { return std::string(c.direct_blocked ? "true" : "false"); }},
      Field{"geometry", "ris_mode", [](SystemConfig& c, const std::string& v) { c.ris_mode = parse_ris_mode(v); },
            [](const SystemConfig& c) { return to_string(c.ris_mode); }},
      STARCF_DOUBLE_FIELD("geometry", "pl_d0", pathloss.d0),
      STARCF_DOUBLE_FIELD("geometry", "pl_d1", pathloss.d1),
      STARCF_DOUBLE_FIELD("geometry", "pl_const_db", pathloss.const_db),
      STARCF_DOUBLE_FIELD("geometry", "pl_exponent_far", pathloss.exponent_far),
      STARCF_DOUBLE_FIELD("geometry", "pl_exponent_mid", pathloss.exponent_mid),
      STARCF_DOUBLE_FIELD("geometry", "shadow_sigma_db", pathloss.shadow_sigma_db),
      STARCF_DOUBLE_FIELD("geometry", "ris_pl_const_db", ris_pl_const_db),
      STARCF_DOUBLE_FIELD("geometry", "star_amp_t", star_amp_t),
      Field{"geometry", "star_phase",
            [](SystemConfig& c, const std::string& v) {
              if (v == "random") c.star_phase = PhaseProfile::kRandom;
              else if (v == "zero") c.star_phase = PhaseProfile::kZero;
              else throw std::invalid_argument("config key 'star_phase': expected random or zero");
            },
            [](const SystemConfig& c) {
              return std::string(c.star_phase == PhaseProfile::kRandom ? "random" : "zero");
            }},

      Field{"hardware", "kappa_ap",
            [](SystemConfig& c, const std::string& v) { c.kappa_ap = to_doubles("kappa_ap", v); },
            [](const SystemConfig& c) { return join(c.kappa_ap); }},
      Field{"hardware", "kappa_u",
            [](SystemConfig& c, const std::string& v) { c.kappa_u = to_doubles("kappa_u", v); },
            [](const SystemConfig& c) { return join(c.kappa_u); }},

      Field{"mc", "seed",
            [](SystemConfig& c, const std::string& v) {
              try {
                std::size_t pos = 0;
                c.seed = std::stoull(v, &pos);
                if (pos != v.size()) throw std::invalid_argument("");
              } catch (const std::exception&) {
                throw std::invalid_argument("config key 'seed': not an unsigned integer: '" + v + "'");
              }
            },
            [](const SystemConfig& c) { return std::to_string(c.seed); }},
      STARCF_INT_FIELD("mc", n_trials),
      STARCF_INT_FIELD("mc", n_setups),
      STARCF_INT_FIELD("mc", warmup_trials),
      STARCF_INT_FIELD("mc", jackknife_blocks),
      Field{"mc", "schemes", [](SystemConfig& c, const std::string& v) { c.schemes = split_list(v); },
            [](const SystemConfig& c) { return join(c.schemes); }},
      Field{"mc", "analytic", [](SystemConfig& c, const std::string& v) { c.analytic = to_bool("analytic", v); },
            [](const SystemConfig& c) { return std::string(c.analytic ? "true" : "false"); }},
  };
  return table;
}

#undef STARCF_INT_FIELD
#undef STARCF_DOUBLE_FIELD
#undef STARCF_DBM_FIELD

const Field& find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (key == f.name && (section.empty() || section == f.section)) return f;
  if (section.empty()) throw std::invalid_argument("unknown config key '" + key + "'");
  throw std::invalid_argument("unknown config key '" + section + "." + key + "'");
}

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"system", "geometry", "hardware", "mc"};
  return s;
}

}  // namespace

void SystemConfig::validate() const {
  require(M >= 1, "M must be >= 1");
  require(K >= 1, "K must be >= 1");
  require(N_ap >= 1 && N_u >= 1, "antenna counts must be >= 1");
  require(L_h >= 1 && L_v >= 1, "STAR-RIS dimensions must be >= 1");
  require(tau_c >= 1, "tau_c must be >= 1");
  const int tp = effective_tau_p();
  require(tp >= N_u, "tau_p must be at least N_u");
  require(tp % N_u == 0, "tau_p must be an integer multiple of N_u");
  require(tp <= tau_c, "tau_p must not exceed tau_c");
  require(std::isfinite(p_p) && p_p > 0, "pilot power must be positive");
  require(std::isfinite(p_u) && p_u > 0, "data power must be positive");
  require(std::isfinite(sigma2) && sigma2 > 0, "noise power must be positive");
  require(d_user > 0 && d_h > 0 && d_v > 0 && lambda > 0, "spacings and wavelength must be positive");
  require(r_ap >= 0 && r_ap < 1, "r_ap must lie in [0,1)");
  require(star_amp_t >= 0 && star_amp_t <= 1, "star_amp_t must lie in [0,1]");
  require(kappa_ap.size() == 1 || kappa_ap.size() == static_cast<std::size_t>(M),
          "kappa_ap needs 1 or M entries");
  require(kappa_u.size() == 1 || kappa_u.size() == static_cast<std::size_t>(K), "kappa_u needs 1 or K entries");
  for (double k : kappa_ap) require(k >= 0 && k <= 1, "kappa_ap entries must lie in [0,1]");
  for (double k : kappa_u) require(k >= 0 && k <= 1, "kappa_u entries must lie in [0,1]");
  require(pathloss.d0 > 0 && pathloss.d1 > pathloss.d0, "path-loss breakpoints need 0 < d0 < d1");
  require(pathloss.shadow_sigma_db >= 0, "shadowing sigma must be non-negative");
  require(ris_mode != RisMode::kCrisSplit || L() % 2 == 0, "cris-split needs an even number of elements");
  require(n_trials >= 1 && n_setups >= 1, "trial and setup counts must be >= 1");
  require(warmup_trials >= 1, "warmup_trials must be >= 1");
  require(jackknife_blocks >= 2, "jackknife_blocks must be >= 2");
  require(!schemes.empty(), "at least one scheme is required");
}

std::map<std::string, std::string> SystemConfig::to_map() const {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[std::string(f.section) + "." + f.name] = f.get(*this);
  return out;
}

std::string SystemConfig::digest() const {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (const auto& [k, v] : to_map()) {
    for (char c : k + "=" + v + ";") h = splitmix64(h ^ static_cast<unsigned char>(c));
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

SystemConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.message() + " (line " +
                                std::to_string(e.line()) + ")");
  }
  SystemConfig cfg;
  for (const auto& [section, body] : tree) {
    if (!known_sections().count(section)) {
      if (body.empty() && !body.data().empty())
        throw std::invalid_argument("config key '" + section + "' appears outside any section");
      throw std::invalid_argument("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : body) find_field(section, key).set(cfg, trim(value.data()));
  }
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(SystemConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("override '" + assignment + "' is not key=value");
  std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  std::string section;
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
  }
  find_field(section, key).set(cfg, value);
}

std::string to_ini(const SystemConfig& cfg) {
  std::ostringstream os;
  for (const char* section : {"system", "geometry", "hardware", "mc"}) {
    os << "[" << section << "]\n";
    for (const auto& f : fields())
      if (std::string(f.section) == section) os << f.name << " = " << f.get(cfg) << "\n";
    os << "\n";
  }
  return os.str();
}

std::map<std::string, SystemConfig> builtin_profiles() {
  std::map<std::string, SystemConfig> out;
  const double carrier_wavelength = 299792458.0 / 1.9e9;

  SystemConfig acceptance;
  acceptance.M = 4;
  acceptance.K = 2;
  acceptance.N_ap = 2;
  acceptance.N_u = 2;
  acceptance.L_h = 4;
  acceptance.L_v = 2;
  acceptance.lambda = carrier_wavelength;
  acceptance.n_trials = 100000;
  acceptance.schemes = {"L1-MR-LSFD", "L1-MR-MF"};
  out["acceptance"] = acceptance;

  SystemConfig desk;
  desk.M = 10;
  desk.K = 6;
  desk.N_ap = 2;
  desk.N_u = 2;
  desk.L_h = 4;
  desk.L_v = 4;
  desk.lambda = carrier_wavelength;
  desk.n_setups = 10;
  desk.n_trials = 400;
  desk.warmup_trials = 400;
  out["desk"] = desk;

  // The physical element area (~1e-3 m^2) puts the cascaded link roughly
  // 150 dB below the direct link with the standard hop attenuation, so the
  // blocked-direct profiles use a milder RIS-hop constant.
  SystemConfig desk_blocked = desk;
  desk_blocked.direct_blocked = true;
  desk_blocked.ris_pl_const_db = 60.0;
  out["desk-blocked"] = desk_blocked;

  SystemConfig full;
  full.M = 20;
  full.K = 10;
  full.N_ap = 4;
  full.N_u = 4;
  full.L_h = 4;
  full.L_v = 4;
  full.lambda = carrier_wavelength;
  full.n_setups = 20;
  full.n_trials = 1000;
  // closed form is O(M^2 K^2 N_u^4); too slow at this size
  full.analytic = false;
  out["full"] = full;

  SystemConfig full_blocked = full;
  full_blocked.direct_blocked = true;
  full_blocked.ris_pl_const_db = 60.0;
  out["full-blocked"] = full_blocked;

  for (auto& [name, cfg] : out) cfg.validate();
  return out;
}

}  // namespace starcf
