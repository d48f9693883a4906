#include "fdirw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fdirw/common.hpp"
#include "fdirw/physics.hpp"
#include "fdirw/text_io.hpp"

namespace fdirw {

namespace {

constexpr double kNearShell = 5.0;

// [0, 1) from the top 53 bits; std::uniform_real_distribution is not
// reproducible across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double squared_distance(const std::array<int, 3>& c, int i, int j, int k) {
  const double dx = i - c[0];
  const double dy = j - c[1];
  const double dz = k - c[2];
  return dx * dx + dy * dy + dz * dz;
}

void check_margin(const GridSpec& spec, const std::array<int, 3>& c, double reach) {
  const int dims[3] = {spec.nx, spec.ny, spec.nz};
  const char axes[3] = {'x', 'y', 'z'};
  for (int a = 0; a < 3; ++a) {
    const double low = c[a];
    const double high = dims[a] - 1 - c[a];
    if (low < reach || high < reach) {
      std::ostringstream msg;
      msg << "particle exceeds grid margin on " << axes[a] << ": need r_p + 5 = " << reach
          << " voxels from center to each face, have " << std::min(low, high)
          << " (n" << axes[a] << " = " << dims[a] << ")";
      throw GeometryError(msg.str());
    }
  }
}

}  // namespace

void PhaseGrid::recount() {
  n_solid = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Phase::Solid));
  n_near = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Phase::LiquidNear));
}

PhaseGrid PhaseGrid::from_labels(const GridSpec& spec, std::vector<Phase> labels, double r_p,
                                 std::uint64_t seed) {
  if (spec.nx < 1 || spec.ny < 1 || spec.nz < 1 || !(spec.dh > 0.0)) {
    throw GeometryError("grid dimensions and dh must be positive");
  }
  if (labels.size() != spec.voxel_count()) {
    throw GeometryError("label array size does not match grid dimensions");
  }
  PhaseGrid grid;
  grid.spec = spec;
  grid.r_p = r_p;
  grid.seed = seed;
  grid.labels = std::move(labels);
  grid.recount();
  return grid;
}

std::size_t digitized_sphere_count(double r) {
  const int reach = static_cast<int>(std::floor(r));
  std::size_t count = 0;
  for (int k = -reach; k <= reach; ++k)
    for (int j = -reach; j <= reach; ++j)
      for (int i = -reach; i <= reach; ++i)
        if (double(i) * i + double(j) * j + double(k) * k <= r * r) ++count;
  return count;
}

PhaseGrid generate_particle(const GridSpec& spec, const ParticleSpec& part) {
  if (spec.nx < 8 || spec.ny < 8 || spec.nz < 8) {
    throw GeometryError("grid must be at least 8 voxels along every axis");
  }
  if (!(spec.dh > 0.0)) throw GeometryError("dh must be positive");
  if (!(part.r_p >= 4.0)) throw GeometryError("particle radius must be at least 4 voxels");
  if (part.n_pores < 0) throw GeometryError("pore count must be non-negative");
  if (part.n_pores > 0) {
    if (!(part.pore_radius_min > 0.0) || part.pore_radius_max < part.pore_radius_min) {
      throw GeometryError("pore radius range must satisfy 0 < min <= max");
    }
    if (!(part.pore_radius_max < part.r_p)) {
      throw GeometryError("pore radii must be smaller than the particle radius");
    }
  }

  PhaseGrid grid;
  grid.spec = spec;
  grid.r_p = part.r_p;
  grid.seed = part.seed;
  const auto c = grid.center();
  check_margin(spec, c, part.r_p + kNearShell);

  struct Pore {
    double x, y, z, r;
  };
  std::vector<Pore> pores;
  pores.reserve(static_cast<std::size_t>(part.n_pores));
  std::mt19937_64 rng(part.seed);
  while (static_cast<int>(pores.size()) < part.n_pores) {
    const double x = (2.0 * unit_uniform(rng) - 1.0) * part.r_p;
    const double y = (2.0 * unit_uniform(rng) - 1.0) * part.r_p;
    const double z = (2.0 * unit_uniform(rng) - 1.0) * part.r_p;
    if (x * x + y * y + z * z > part.r_p * part.r_p) continue;
    const double r =
        part.pore_radius_min + (part.pore_radius_max - part.pore_radius_min) * unit_uniform(rng);
    pores.push_back({c[0] + x, c[1] + y, c[2] + z, r});
  }

  grid.labels.assign(spec.voxel_count(), Phase::Far);
  const double r2 = part.r_p * part.r_p;
  for (int k = 0; k < spec.nz; ++k) {
    for (int j = 0; j < spec.ny; ++j) {
      for (int i = 0; i < spec.nx; ++i) {
        if (squared_distance(c, i, j, k) > r2) continue;
        bool carved = false;
        for (const auto& p : pores) {
          const double dx = i - p.x, dy = j - p.y, dz = k - p.z;
          if (dx * dx + dy * dy + dz * dz <= p.r * p.r) {
            carved = true;
            break;
          }
        }
        if (!carved) grid.labels[spec.index(i, j, k)] = Phase::Solid;
      }
    }
  }

  // Flood fill liquid from the grid boundary; sealed cavities become solid.
  std::vector<std::uint8_t> reached(spec.voxel_count(), 0);
  std::vector<std::size_t> frontier;
  for (std::size_t idx = 0; idx < spec.voxel_count(); ++idx) {
    const auto [i, j, k] = spec.coords(idx);
    const bool on_face = i == 0 || j == 0 || k == 0 || i == spec.nx - 1 || j == spec.ny - 1 ||
                         k == spec.nz - 1;
    if (on_face && grid.labels[idx] != Phase::Solid) {
      reached[idx] = 1;
      frontier.push_back(idx);
    }
  }
  while (!frontier.empty()) {
    const std::size_t idx = frontier.back();
    frontier.pop_back();
    const auto [i, j, k] = spec.coords(idx);
    const int nb[6][3] = {{i - 1, j, k}, {i + 1, j, k}, {i, j - 1, k},
                          {i, j + 1, k}, {i, j, k - 1}, {i, j, k + 1}};
    for (const auto& n : nb) {
      if (n[0] < 0 || n[1] < 0 || n[2] < 0 || n[0] >= spec.nx || n[1] >= spec.ny ||
          n[2] >= spec.nz)
        continue;
      const std::size_t nidx = spec.index(n[0], n[1], n[2]);
      if (reached[nidx] || grid.labels[nidx] == Phase::Solid) continue;
      reached[nidx] = 1;
      frontier.push_back(nidx);
    }
  }
  for (std::size_t idx = 0; idx < spec.voxel_count(); ++idx) {
    if (grid.labels[idx] != Phase::Solid && !reached[idx]) grid.labels[idx] = Phase::Solid;
  }
  grid.recount();
  return grid;
}

PhaseGrid label_near_field(PhaseGrid grid) {
  const auto c = grid.center();
  const double reach = grid.r_p + kNearShell;
  const double reach2 = reach * reach;
  const auto& spec = grid.spec;
  for (int k = 0; k < spec.nz; ++k) {
    for (int j = 0; j < spec.ny; ++j) {
      for (int i = 0; i < spec.nx; ++i) {
        auto& label = grid.labels[spec.index(i, j, k)];
        if (label == Phase::Solid) continue;
        label = squared_distance(c, i, j, k) <= reach2 ? Phase::LiquidNear : Phase::Far;
      }
    }
  }
  grid.recount();
  return grid;
}

PhaseGrid partition_near_far(PhaseGrid grid, const PhysParams& params) {
  const bool has_solid = grid.n_solid > 0;
  const bool has_liquid = grid.labels.size() > grid.n_solid;
  if (!has_solid || !has_liquid) {
    throw GeometryError("partition needs both solid and liquid voxels");
  }
  grid = label_near_field(std::move(grid));
  if (grid.n_near == 0) {
    throw GeometryError("invalid geometry: no near-field liquid voxels");
  }
  grid.n_far_equiv = params.far_field_voxels();
  return grid;
}

std::uint64_t geometry_hash(const PhaseGrid& grid) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  };
  const std::int32_t dims[3] = {grid.spec.nx, grid.spec.ny, grid.spec.nz};
  mix(dims, sizeof dims);
  mix(&grid.spec.dh, sizeof grid.spec.dh);
  mix(grid.labels.data(), grid.labels.size());
  return h;
}

void write_geometry(const std::filesystem::path& path, const PhaseGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << kGeometryMagic << '\n'
      << "dims " << grid.spec.nx << ' ' << grid.spec.ny << ' ' << grid.spec.nz << '\n'
      << "dh " << text::fmt(grid.spec.dh) << '\n'
      << "rp " << text::fmt(grid.r_p) << '\n'
      << "seed " << grid.seed << '\n'
      << "counts " << grid.n_solid << ' ' << grid.n_near << '\n'
      << "data\n";
  out.write(reinterpret_cast<const char*>(grid.labels.data()),
            static_cast<std::streamsize>(grid.labels.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

PhaseGrid read_geometry(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open geometry file " + path.string());
  if (text::read_line(in, "magic") != kGeometryMagic) {
    throw FormatError(path.string() + " is not an " + std::string(kGeometryMagic) + " file");
  }
  GridSpec spec;
  {
    std::istringstream dims(std::string(text::expect_key(text::read_line(in, "dims"), "dims")));
    if (!(dims >> spec.nx >> spec.ny >> spec.nz)) throw FormatError("malformed dims line");
  }
  spec.dh = text::parse_double(text::expect_key(text::read_line(in, "dh"), "dh"), "dh");
  const double r_p = text::parse_double(text::expect_key(text::read_line(in, "rp"), "rp"), "rp");
  const auto seed = text::parse_int<std::uint64_t>(
      text::expect_key(text::read_line(in, "seed"), "seed"), "seed");
  std::size_t n_solid = 0, n_near = 0;
  {
    std::istringstream counts(
        std::string(text::expect_key(text::read_line(in, "counts"), "counts")));
    if (!(counts >> n_solid >> n_near)) throw FormatError("malformed counts line");
  }
  if (text::read_line(in, "data marker") != "data") throw FormatError("missing data marker");
  if (spec.nx < 1 || spec.ny < 1 || spec.nz < 1) throw FormatError("invalid dims");

  std::vector<Phase> labels(spec.voxel_count());
  in.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
  if (in.gcount() != static_cast<std::streamsize>(labels.size())) {
    throw FormatError("geometry payload truncated");
  }
  for (auto label : labels) {
    if (static_cast<std::uint8_t>(label) > 2) throw FormatError("invalid phase label byte");
  }
  auto grid = PhaseGrid::from_labels(spec, std::move(labels), r_p, seed);
  if (grid.n_solid != n_solid || grid.n_near != n_near) {
    throw FormatError("geometry header counts do not match payload");
  }
  return grid;
}

}  // namespace fdirw
