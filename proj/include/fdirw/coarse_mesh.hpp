#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fdirw/fd_solver.hpp"
#include "fdirw/precision.hpp"

namespace fdirw {

// A near-field shell is only five voxels thick, so 5^3 cells average about 56
// liquid voxels; 7^3 cells bring the mean group back to roughly 125.
inline constexpr int kDefaultCoarsening = 7;

/// Partition of the near-field liquid into representative-node groups.
/// Members are compact liquid indices (Topology order), stored CSR-style.
struct CoarseMap {
  std::vector<std::uint32_t> group_of;      // per liquid voxel
  std::vector<std::uint32_t> member_begin;  // n_groups + 1
  std::vector<std::uint32_t> members;
  int block = kDefaultCoarsening;

  std::size_t n_groups() const { return member_begin.empty() ? 0 : member_begin.size() - 1; }
  std::size_t group_size(std::size_t g) const { return member_begin[g + 1] - member_begin[g]; }
  std::span<const std::uint32_t> group(std::size_t g) const {
    return {members.data() + member_begin[g], group_size(g)};
  }
};

/// Groups liquid voxels by axis-aligned block x block x block cells anchored
/// at the grid origin; empty cells make no group. Groups are numbered in
/// x-fastest order of their cell.
CoarseMap coarsen(const Topology& topo, int block = kDefaultCoarsening);

/// Group means, summed pairwise as offsets from the first member. Full mode
/// works in binary64; every reduced mode sums and divides in binary32.
std::vector<double> map_fine_to_coarse(std::span<const double> fine, const CoarseMap& cmap,
                                       PrecisionMode mode = PrecisionMode::Full,
                                       const Exec& exec = {});

/// Broadcasts each group value to its members.
void remap_coarse_to_fine(std::span<const double> coarse, const CoarseMap& cmap,
                          std::span<double> fine, const Exec& exec = {});

void write_coarse_map(const std::filesystem::path& path, const Topology& topo,
                      const CoarseMap& cmap);

inline constexpr const char* kCoarseMapMagic = "FDIRW-CMAP v1";

}  // namespace fdirw
