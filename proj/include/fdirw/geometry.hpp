#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace fdirw {

struct PhysParams;

enum class Phase : std::uint8_t { Solid = 0, LiquidNear = 1, Far = 2 };

struct GridSpec {
  static constexpr int kDim = 3;

  int nx = 0;
  int ny = 0;
  int nz = 0;
  double dh = 0.0;  // voxel edge [m]

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  double voxel_volume() const { return dh * dh * dh; }
  // x-fastest linear index
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * k);
  }
  std::array<int, 3> coords(std::size_t idx) const {
    const auto x = static_cast<int>(idx % nx);
    const auto rest = idx / nx;
    return {x, static_cast<int>(rest % ny), static_cast<int>(rest / ny)};
  }
  bool operator==(const GridSpec&) const = default;
};

struct ParticleSpec {
  double r_p = 0.0;  // voxel units
  int n_pores = 0;
  double pore_radius_min = 0.0;
  double pore_radius_max = 0.0;
  std::uint64_t seed = 0;
};

/// Voxelized domain: one phase label per voxel plus the reservoir volume
/// (in voxel units) that backs the FAR label.
struct PhaseGrid {
  GridSpec spec;
  double r_p = 0.0;
  std::uint64_t seed = 0;
  std::vector<Phase> labels;
  std::size_t n_solid = 0;
  std::size_t n_near = 0;
  double n_far_equiv = 0.0;

  /// Particle center in voxel-index coordinates (grid center, floored).
  std::array<int, 3> center() const { return {spec.nx / 2, spec.ny / 2, spec.nz / 2}; }
  Phase at(int i, int j, int k) const { return labels[spec.index(i, j, k)]; }
  void recount();

  /// Wraps an explicit label array (synthetic domains, file loading).
  static PhaseGrid from_labels(const GridSpec& spec, std::vector<Phase> labels,
                               double r_p = 0.0, std::uint64_t seed = 0);
};

/// Solid sphere of radius r_p minus randomly placed pore spheres. All liquid
/// is labelled FAR; liquid not face-connected to the grid boundary becomes
/// SOLID. Pure function of its arguments.
PhaseGrid generate_particle(const GridSpec& spec, const ParticleSpec& part);

/// Liquid within r_p + 5 voxels of the center becomes LIQUID_NEAR, other
/// liquid FAR. Solid is untouched.
PhaseGrid label_near_field(PhaseGrid grid);

/// label_near_field plus the reservoir volume from `params`.
PhaseGrid partition_near_far(PhaseGrid grid, const PhysParams& params);

/// Count of voxels in the digitized sphere |x - center|^2 <= r^2.
std::size_t digitized_sphere_count(double r);

/// FNV-1a over dimensions, dh and labels.
std::uint64_t geometry_hash(const PhaseGrid& grid);

void write_geometry(const std::filesystem::path& path, const PhaseGrid& grid);
PhaseGrid read_geometry(const std::filesystem::path& path);

inline constexpr const char* kGeometryMagic = "FDIRW-GEOM v1";

}  // namespace fdirw
