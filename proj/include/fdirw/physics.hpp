#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fdirw {

enum class Material { Solid, Liquid };

/// Model parameters. Free-energy coefficients enter only as the ratios A/RT;
/// concentrations are per voxel and volumes are converted to voxel units.
struct PhysParams {
  double dh = 0.0;         // voxel edge [m]
  double dt_macro = 0.0;   // FDiRW step [s]
  double dt_fd = 0.0;      // explicit liquid step [s]
  double D_S = 0.0;        // [m^2/s]
  double D_L = 0.0;        // [m^2/s]
  double A_S_over_RT = 0.0;
  double A_L_over_RT = 0.0;
  double c_S_eq = 0.0;
  double c_L_eq = 0.0;
  double c_S_0 = 0.0;
  double c_L_0 = 0.0;
  double k = 0.0;          // [1/s]
  double V_far = 0.0;      // far-field liquid volume [m^3]
  /// Total initial amount, voxel-concentration units. Empty means "auto":
  /// recomputed from the initial concentrations and voxel counts.
  std::optional<double> total_mass_0;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  /// dt_macro / dt_fd as an integer.
  int n_pre() const;
  double far_field_voxels() const { return V_far / (dh * dh * dh); }
};

/// Parses flat `key = value` text. '#' starts a comment. Every field must be
/// present exactly once; unknown keys are errors. `total_mass_0 = auto` is
/// accepted.
PhysParams parse_params(std::string_view text);
PhysParams load_params(const std::filesystem::path& path);
std::string format_params(const PhysParams& params);

/// The parameter set of the reference particle (r_p = 50 voxels).
PhysParams reference_params();

/// Dimensionless chemical potential mu/RT = (A/RT)(c - c_eq).
double chem_potential(double c, Material phase, const PhysParams& params);

double liquid_driving_factor(double c_L, const PhysParams& params);
double solid_driving_factor(double c_S, const PhysParams& params);

struct ReactionRate {
  double solid = 0.0;   // uptake into solid, >= 0
  double liquid = 0.0;  // always -solid
};

/// Pseudo-second-order interface uptake k * f_L * f_S.
ReactionRate reaction_rate(double c_L, double c_S, const PhysParams& params);

struct FarField {
  double c_far = 0.0;
  bool over_absorbed = false;  // negative result: more mass left the reservoir than it held
};

/// Reservoir concentration that restores global conservation.
FarField far_field_update(double total_mass_0, double sum_near, double sum_solid,
                          double n_far_equiv);

double effective_diffusivity(const PhysParams& params, Material phase);

/// Largest stable explicit step dh^2 / (2 d D_eff); +inf when D_eff = 0.
double stability_limit(const PhysParams& params, Material phase);

/// Harmonic mean of D_S and D_L, used for cross-phase chemical-potential flux.
double interface_diffusivity(const PhysParams& params);

/// Stability bound of the solid/interface step: the tighter of the
/// solid-diffusion bound and the interface-exchange bound.
double solid_interface_limit(const PhysParams& params);

/// Recomputes the initial total from concentrations and voxel counts.
double initial_total_mass(const PhysParams& params, std::size_t n_solid, std::size_t n_near);

/// |configured - recomputed| / recomputed; callers warn above kMassGapWarning.
double total_mass_gap(const PhysParams& params, std::size_t n_solid, std::size_t n_near);
inline constexpr double kMassGapWarning = 0.05;

/// Fills in total_mass_0 when it is "auto".
PhysParams resolve_total_mass(PhysParams params, std::size_t n_solid, std::size_t n_near);

}  // namespace fdirw
