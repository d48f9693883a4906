#include "fdirw/coarse_mesh.hpp"

#include <fstream>
#include <limits>
#include <map>

namespace fdirw {

namespace {

// Pairwise summation with every addition passed through `round`.
template <class Round>
double pairwise_sum(const double* v, std::size_t n, Round round) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s = round(s + v[i]);
    return s;
  }
  const std::size_t half = n / 2;
  return round(pairwise_sum(v, half, round) + pairwise_sum(v + half, n - half, round));
}

}  // namespace

CoarseMap coarsen(const Topology& topo, int block) {
  if (block < 1) throw std::invalid_argument("coarsening factor must be >= 1");
  if (topo.n_liquid() == 0) throw GeometryError("coarsen: no near-field liquid voxels");
  const auto& spec = topo.spec;
  const std::size_t bx = (spec.nx + block - 1) / block;
  const std::size_t by = (spec.ny + block - 1) / block;

  // Cell id in x-fastest order -> members; std::map keeps cells sorted.
  std::map<std::size_t, std::vector<std::uint32_t>> cells;
  for (std::uint32_t v = 0; v < topo.n_liquid(); ++v) {
    const auto [i, j, k] = spec.coords(topo.liquid_voxels[v]);
    const std::size_t cell = (i / block) + bx * ((j / block) + by * (k / block));
    cells[cell].push_back(v);
  }

  CoarseMap cmap;
  cmap.block = block;
  cmap.group_of.assign(topo.n_liquid(), 0);
  cmap.member_begin.reserve(cells.size() + 1);
  cmap.members.reserve(topo.n_liquid());
  std::uint32_t g = 0;
  for (const auto& [cell, list] : cells) {
    cmap.member_begin.push_back(static_cast<std::uint32_t>(cmap.members.size()));
    for (auto v : list) {
      cmap.members.push_back(v);
      cmap.group_of[v] = g;
    }
    ++g;
  }
  cmap.member_begin.push_back(static_cast<std::uint32_t>(cmap.members.size()));
  return cmap;
}

std::vector<double> map_fine_to_coarse(std::span<const double> fine, const CoarseMap& cmap,
                                       PrecisionMode mode, const Exec& exec) {
  if (fine.size() != cmap.group_of.size()) {
    throw std::invalid_argument("map_fine_to_coarse: field size does not match coarse map");
  }
  std::vector<double> coarse(cmap.n_groups());
  const bool full = mode == PrecisionMode::Full;
  parallel_for(exec, cmap.n_groups(), [&](std::size_t g) {
    const auto members = cmap.group(g);
    // Offsets from the first member, gathered in member order so the
    // reduction tree is fixed; constant groups map back exactly.
    thread_local std::vector<double> values;
    values.resize(members.size());
    const double base = full ? fine[members[0]] : round_b32(fine[members[0]]);
    for (std::size_t i = 0; i < members.size(); ++i) {
      values[i] = full ? fine[members[i]] - base : round_b32(round_b32(fine[members[i]]) - base);
    }
    const auto n = static_cast<double>(members.size());
    if (full) {
      coarse[g] = base + pairwise_sum(values.data(), values.size(), [](double x) { return x; }) / n;
    } else {
      coarse[g] = round_b32(base + round_b32(pairwise_sum(values.data(), values.size(), round_b32) / n));
    }
  });
  return coarse;
}

void remap_coarse_to_fine(std::span<const double> coarse, const CoarseMap& cmap,
                          std::span<double> fine, const Exec& exec) {
  if (coarse.size() != cmap.n_groups() || fine.size() != cmap.group_of.size()) {
    throw std::invalid_argument("remap_coarse_to_fine: size mismatch");
  }
  parallel_for(exec, fine.size(), [&](std::size_t v) { fine[v] = coarse[cmap.group_of[v]]; });
}

void write_coarse_map(const std::filesystem::path& path, const Topology& topo,
                      const CoarseMap& cmap) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  const auto& spec = topo.spec;
  out << kCoarseMapMagic << '\n'
      << "dims " << spec.nx << ' ' << spec.ny << ' ' << spec.nz << '\n'
      << "block " << cmap.block << '\n'
      << "groups " << cmap.n_groups() << '\n'
      << "liquid " << topo.n_liquid() << '\n'
      << "data\n";
  // One line per near-field voxel in grid order: grid index, group.
  for (std::size_t v = 0; v < topo.n_liquid(); ++v) {
    out << topo.liquid_voxels[v] << ' ' << cmap.group_of[v] << '\n';
  }
}

}  // namespace fdirw
