#include "fdirw/physics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "fdirw/common.hpp"
#include "fdirw/geometry.hpp"
#include "fdirw/text_io.hpp"

namespace fdirw {

namespace {

struct Field {
  const char* key;
  double PhysParams::*member;
};

constexpr Field kFields[] = {
    {"dh", &PhysParams::dh},
    {"dt_macro", &PhysParams::dt_macro},
    {"dt_fd", &PhysParams::dt_fd},
    {"D_S", &PhysParams::D_S},
    {"D_L", &PhysParams::D_L},
    {"A_S_over_RT", &PhysParams::A_S_over_RT},
    {"A_L_over_RT", &PhysParams::A_L_over_RT},
    {"c_S_eq", &PhysParams::c_S_eq},
    {"c_L_eq", &PhysParams::c_L_eq},
    {"c_S_0", &PhysParams::c_S_0},
    {"c_L_0", &PhysParams::c_L_0},
    {"k", &PhysParams::k},
    {"V_far", &PhysParams::V_far},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double harmonic_mean(double a, double b) {
  return (a + b) > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
}

}  // namespace

void PhysParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(name) + " must be finite and strictly positive");
    }
  };
  positive(dh, "dh");
  positive(dt_macro, "dt_macro");
  positive(dt_fd, "dt_fd");
  positive(D_S, "D_S");
  positive(D_L, "D_L");
  positive(A_S_over_RT, "A_S_over_RT");
  positive(A_L_over_RT, "A_L_over_RT");
  positive(c_S_eq, "c_S_eq");
  positive(c_L_eq, "c_L_eq");
  positive(k, "k");
  positive(V_far, "V_far");
  if (!(c_S_0 < c_S_eq)) throw ConfigError("c_S_0 must be below c_S_eq");
  if (!(c_L_0 > c_L_eq)) throw ConfigError("c_L_0 must exceed c_L_eq");
  if (c_S_0 < 0.0) throw ConfigError("c_S_0 must be non-negative");
  n_pre();
  if (total_mass_0 && !(*total_mass_0 > 0.0)) {
    throw ConfigError("total_mass_0 must be positive");
  }
}

int PhysParams::n_pre() const {
  const double ratio = dt_macro / dt_fd;
  const double nearest = std::round(ratio);
  if (nearest < 1.0 || std::fabs(ratio - nearest) > 1e-9 * nearest) {
    std::ostringstream msg;
    msg << "dt_macro (" << dt_macro << " s) is not an integer multiple of dt_fd (" << dt_fd
        << " s); ratio = " << ratio;
    throw ConfigError(msg.str());
  }
  return static_cast<int>(nearest);
}

PhysParams parse_params(std::string_view text) {
  PhysParams params;
  std::map<std::string, int> seen;
  bool total_seen = false;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (seen[key]++ > 0) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    auto number = [&]() {
      try {
        return text::parse_double(value, key);
      } catch (const FormatError& e) {
        throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
      }
    };
    if (key == "total_mass_0") {
      total_seen = true;
      if (value != "auto") params.total_mass_0 = number();
      continue;
    }
    bool known = false;
    for (const auto& f : kFields) {
      if (key == f.key) {
        params.*(f.member) = number();
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  for (const auto& f : kFields) {
    if (!seen.contains(f.key)) throw ConfigError(std::string("missing key '") + f.key + "'");
  }
  if (!total_seen) throw ConfigError("missing key 'total_mass_0'");
  params.validate();
  return params;
}

PhysParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_params(buf.str());
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_params(const PhysParams& params) {
  std::ostringstream out;
  for (const auto& f : kFields) out << f.key << " = " << text::fmt(params.*(f.member)) << '\n';
  out << "total_mass_0 = "
      << (params.total_mass_0 ? text::fmt(*params.total_mass_0) : std::string("auto")) << '\n';
  return out.str();
}

PhysParams reference_params() {
  PhysParams p;
  p.dh = 10e-9;
  p.dt_macro = 500e-6;
  p.dt_fd = 0.5e-6;
  p.D_S = 1.0e-17;
  p.D_L = 1.0e-14;
  p.A_S_over_RT = 2e3;
  p.A_L_over_RT = 2e3;
  p.c_S_eq = 1.0;
  p.c_L_eq = 1.0e-5;
  p.c_S_0 = 1.0e-6;
  p.c_L_0 = 2.12e-3;
  p.k = 0.05;
  p.V_far = 1.80e-16;  // 1.80e-10 mL
  p.total_mass_0 = 388716.10;
  return p;
}

double chem_potential(double c, Material phase, const PhysParams& params) {
  return phase == Material::Solid ? params.A_S_over_RT * (c - params.c_S_eq)
                                  : params.A_L_over_RT * (c - params.c_L_eq);
}

double liquid_driving_factor(double c_L, const PhysParams& params) {
  return c_L <= params.c_L_eq ? 0.0 : (c_L - params.c_L_eq) / params.c_L_eq;
}

double solid_driving_factor(double c_S, const PhysParams& params) {
  // no desorption above saturation
  return c_S >= params.c_S_eq ? 0.0 : (params.c_S_eq - c_S) / params.c_S_eq;
}

ReactionRate reaction_rate(double c_L, double c_S, const PhysParams& params) {
  const double rate =
      params.k * liquid_driving_factor(c_L, params) * solid_driving_factor(c_S, params);
  return {rate, -rate};
}

FarField far_field_update(double total_mass_0, double sum_near, double sum_solid,
                          double n_far_equiv) {
  if (!(n_far_equiv > 0.0)) {
    throw std::invalid_argument("far_field_update: reservoir volume must be positive");
  }
  const double c = (total_mass_0 - sum_near - sum_solid) / n_far_equiv;
  return {c, c < 0.0};
}

double effective_diffusivity(const PhysParams& params, Material phase) {
  return phase == Material::Solid ? params.D_S * params.A_S_over_RT
                                  : params.D_L * params.A_L_over_RT;
}

double stability_limit(const PhysParams& params, Material phase) {
  const double d_eff = effective_diffusivity(params, phase);
  if (!(d_eff > 0.0)) return std::numeric_limits<double>::infinity();
  return params.dh * params.dh / (2.0 * GridSpec::kDim * d_eff);
}

double interface_diffusivity(const PhysParams& params) {
  return harmonic_mean(params.D_S, params.D_L);
}

double solid_interface_limit(const PhysParams& params) {
  // The exchange flux moves c at rate D_if * (A/RT) / dh^2 on each side.
  const double d_exchange =
      interface_diffusivity(params) * std::max(params.A_S_over_RT, params.A_L_over_RT);
  const double exchange_limit = d_exchange > 0.0
                                    ? params.dh * params.dh / (2.0 * GridSpec::kDim * d_exchange)
                                    : std::numeric_limits<double>::infinity();
  return std::min(stability_limit(params, Material::Solid), exchange_limit);
}

double initial_total_mass(const PhysParams& params, std::size_t n_solid, std::size_t n_near) {
  return params.c_L_0 * (static_cast<double>(n_near) + params.far_field_voxels()) +
         params.c_S_0 * static_cast<double>(n_solid);
}

double total_mass_gap(const PhysParams& params, std::size_t n_solid, std::size_t n_near) {
  const double recomputed = initial_total_mass(params, n_solid, n_near);
  if (!params.total_mass_0) return 0.0;
  return std::fabs(*params.total_mass_0 - recomputed) / recomputed;
}

PhysParams resolve_total_mass(PhysParams params, std::size_t n_solid, std::size_t n_near) {
  if (!params.total_mass_0) params.total_mass_0 = initial_total_mass(params, n_solid, n_near);
  return params;
}

}  // namespace fdirw
