#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "fdirw/common.hpp"
#include "fdirw/geometry.hpp"
#include "fdirw/physics.hpp"

namespace fdirw {

/// Compact indexing of the non-FAR voxels plus face-neighbour tables.
///
/// Liquid neighbour slots index an extended array of n_liquid + 1 entries
/// whose last element carries the far-field value. A slot that points back at
/// the voxel itself is a no-flux face (solid, grid edge), so the stencil is
/// branch-free. Slot order is -x, +x, -y, +y, -z, +z.
struct Topology {
  struct InterfaceFace {
    std::uint32_t solid;
    std::uint32_t liquid;
  };

  GridSpec spec;
  std::vector<std::size_t> liquid_voxels;  // grid index of each LIQUID_NEAR voxel, ascending
  std::vector<std::size_t> solid_voxels;
  std::vector<std::array<std::uint32_t, 6>> liquid_nb;
  std::vector<std::array<std::uint32_t, 6>> solid_nb;  // self for non-solid faces

  // Solid-liquid faces ordered by solid voxel, then slot.
  std::vector<InterfaceFace> faces;
  std::vector<std::uint32_t> solid_face_begin;  // n_solid + 1 offsets into faces
  // Per liquid voxel, the ids of its interface faces in ascending order.
  std::vector<std::uint32_t> liquid_face_begin;  // n_liquid + 1
  std::vector<std::uint32_t> liquid_face_ids;

  std::size_t n_liquid() const { return liquid_voxels.size(); }
  std::size_t n_solid() const { return solid_voxels.size(); }
  std::uint32_t far_slot() const { return static_cast<std::uint32_t>(liquid_voxels.size()); }
};

Topology build_topology(const PhaseGrid& grid);

struct FineState {
  std::vector<double> liquid;  // per LIQUID_NEAR voxel
  std::vector<double> solid;   // per SOLID voxel
  double c_far = 0.0;
  double t = 0.0;

  double sum_liquid() const;
  double sum_solid() const;
};

/// c_L_0 in the near field, c_S_0 in the solid, c_far from conservation.
/// `params.total_mass_0` must be resolved.
FineState initial_state(const Topology& topo, const PhysParams& params, double n_far_equiv);

/// One Jacobi sweep of out = in + lambda * sum_faces(in[nb] - in) over an
/// extended liquid array (last entry = far-field value, held fixed). `Width`
/// independent fields are interleaved voxel-major: in[(v * Width) + lane].
template <int Width>
void liquid_diffusion_sweep(const Topology& topo, double lambda, std::span<const double> in,
                            std::span<double> out, const Exec& exec) {
  parallel_for(exec, topo.n_liquid(), [&](std::size_t v) {
    const auto& nb = topo.liquid_nb[v];
    const double* self = &in[v * Width];
    double acc[Width];
    for (int l = 0; l < Width; ++l) acc[l] = 0.0;
    for (int f = 0; f < 6; ++f) {
      const double* other = &in[static_cast<std::size_t>(nb[f]) * Width];
      for (int l = 0; l < Width; ++l) acc[l] += other[l] - self[l];
    }
    double* dst = &out[v * Width];
    for (int l = 0; l < Width; ++l) dst[l] = self[l] + lambda * acc[l];
  });
}

/// Near-field liquid diffusion over dt: solid faces no-flux, FAR faces
/// Dirichlet at c_far. c_far is not changed. Throws StabilityError when dt
/// exceeds the liquid stability limit.
void fd_step_liquid(FineState& state, const Topology& topo, const PhysParams& params, double dt,
                    const Exec& exec = {});

struct ExchangeEvents {
  std::uint64_t clamps = 0;  // liquid voxels whose outgoing transfer was capped
  std::uint64_t substeps = 0;
};

/// Solid diffusion, cross-phase chemical-potential flux and interface uptake,
/// all evaluated from the pre-step field and applied together. Throws
/// StabilityError when dt exceeds solid_interface_limit.
ExchangeEvents fd_step_solid_interface(FineState& state, const Topology& topo,
                                       const PhysParams& params, double dt,
                                       const Exec& exec = {});

/// Substeps of the solid/interface update needed for an interval dt.
int solid_substeps(const PhysParams& params, double dt);

/// fd_step_solid_interface over dt split into solid_substeps(dt) equal steps.
ExchangeEvents advance_solid_interface(FineState& state, const Topology& topo,
                                       const PhysParams& params, double dt,
                                       const Exec& exec = {});

struct KineticsSample {
  double t = 0.0;
  double Q_S = 0.0;
  double Q_L_near = 0.0;
  double c_far = 0.0;
  double Q_total = 0.0;
};

struct KineticsRecord {
  std::vector<KineticsSample> samples;
  double Q_S_e = 0.0;  // c_S_eq * N_S
  double Q_L_0 = 0.0;  // c_L_0 * N_L
};

KineticsSample sample_kinetics(const FineState& state, double n_far_equiv);
KineticsRecord make_kinetics_record(const Topology& topo, const PhysParams& params);

/// Where the solid/interface update runs inside the FD baseline.
enum class InterfaceCadence {
  Macro,    // once per dt_macro after n_pre liquid substeps
  Substep,  // after every liquid substep, with dt_fd
};

struct BaselineOptions {
  int stride = 1;  // kinetics sample every `stride` macro steps
  InterfaceCadence cadence = InterfaceCadence::Macro;
  Exec exec;
  /// Called after every macro step with the post-step state.
  std::function<void(const FineState&, std::size_t step)> observer;
};

struct BaselineResult {
  FineState state;
  KineticsRecord kinetics;
  ExchangeEvents events;
  std::uint64_t over_absorbed = 0;
  double liquid_seconds = 0.0;  // wall time in the liquid substeps
  double solid_seconds = 0.0;
};

/// Number of whole macro steps between t and t_end.
std::size_t macro_steps_between(double t, double t_end, double dt_macro);

/// Reference explicit solver over [state.t, t_end]. `params.total_mass_0`
/// must be resolved; `n_far_equiv` is the reservoir size in voxels.
BaselineResult fd_run_baseline(FineState state, const Topology& topo, const PhysParams& params,
                               double n_far_equiv, double t_end,
                               const BaselineOptions& options = {});

void write_field(const std::filesystem::path& path, const PhaseGrid& grid, const Topology& topo,
                 const FineState& state);

inline constexpr const char* kFieldMagic = "FDIRW-FIELD v1";

}  // namespace fdirw
