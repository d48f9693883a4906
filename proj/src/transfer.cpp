#include "fdirw/transfer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "fdirw/text_io.hpp"

namespace fdirw {

namespace {

constexpr int kBatch = 8;

// Member of the group closest to the group's centroid (lowest index on ties).
std::uint32_t central_member(const Topology& topo, std::span<const std::uint32_t> members) {
  double cx = 0, cy = 0, cz = 0;
  for (auto v : members) {
    const auto [i, j, k] = topo.spec.coords(topo.liquid_voxels[v]);
    cx += i;
    cy += j;
    cz += k;
  }
  const double n = static_cast<double>(members.size());
  cx /= n;
  cy /= n;
  cz /= n;
  std::uint32_t best = members.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (auto v : members) {
    const auto [i, j, k] = topo.spec.coords(topo.liquid_voxels[v]);
    const double d = (i - cx) * (i - cx) + (j - cy) * (j - cy) + (k - cz) * (k - cz);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

template <class T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
}

template <class T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof bytes);
  if (!in) throw FormatError("matrix payload truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(T{bytes[i]} << (8 * i));
  return value;
}

void put_value(std::ostream& out, double v, PrecisionMode mode) {
  switch (mode) {
    case PrecisionMode::Full:
      put_le(out, std::bit_cast<std::uint64_t>(v));
      break;
    case PrecisionMode::B32:
      put_le(out, to_b32_bits(v));
      break;
    case PrecisionMode::Mixed:
    case PrecisionMode::B16:
      put_le(out, to_b16_bits(v));
      break;
  }
}

double get_value(std::istream& in, PrecisionMode mode) {
  switch (mode) {
    case PrecisionMode::Full:
      return std::bit_cast<double>(get_le<std::uint64_t>(in));
    case PrecisionMode::B32:
      return from_b32_bits(get_le<std::uint32_t>(in));
    case PrecisionMode::Mixed:
    case PrecisionMode::B16:
      return from_b16_bits(get_le<std::uint16_t>(in));
  }
  return 0.0;
}

}  // namespace

double TransferMatrix::row_sum_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : row(i)) s += v;
    worst = std::max(worst, std::fabs(s + P_BC[i] - 1.0));
  }
  return worst;
}

TransferMatrix TransferMatrix::stored_as(PrecisionMode mode) const {
  TransferMatrix out = *this;
  for (auto& v : out.P) v = round_operand(v, mode);
  for (auto& v : out.P_BC) v = round_operand(v, mode);
  out.precision = mode;
  out.pack();
  return out;
}

void TransferMatrix::pack() {
  const std::size_t blocks = n / kPackRows;
  packed.assign(blocks * kPackRows * n, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    double* dst = packed.data() + b * kPackRows * n;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t r = 0; r < kPackRows; ++r) dst[j * kPackRows + r] = P[(b * kPackRows + r) * n + j];
    }
  }
}

TransferMatrix precondition(const PhaseGrid& grid, const Topology& topo, const CoarseMap& cmap,
                            const PhysParams& params, const PreconditionOptions& options) {
  if (cmap.group_of.size() != topo.n_liquid()) {
    throw std::invalid_argument("precondition: coarse map does not match topology");
  }
  const int n_pre = params.n_pre();
  const double limit = stability_limit(params, Material::Liquid);
  if (params.dt_fd > limit) {
    std::ostringstream msg;
    msg << "precondition: dt_fd = " << params.dt_fd << " s exceeds the liquid stability limit "
        << limit << " s";
    throw StabilityError(msg.str());
  }
  const double lambda =
      effective_diffusivity(params, Material::Liquid) * params.dt_fd / (params.dh * params.dh);

  const std::size_t n = cmap.n_groups();
  const std::size_t n_columns = n + 1;  // last column realizes P_BC
  const std::size_t n_batches = (n_columns + kBatch - 1) / kBatch;
  const std::size_t rows = topo.n_liquid() + 1;

  std::vector<std::uint32_t> source_voxel;
  if (options.source == SourceKind::SingleVoxel) {
    source_voxel.resize(n);
    for (std::size_t g = 0; g < n; ++g) source_voxel[g] = central_member(topo, cmap.group(g));
  }

  TransferMatrix m;
  m.n = n;
  m.P.assign(n * n, 0.0);
  m.P_BC.assign(n, 0.0);
  m.dt_encoded = params.dt_macro;
  m.n_pre = n_pre;
  m.precision = PrecisionMode::Full;
  m.geometry_hash = geometry_hash(grid);

  const Exec serial{1};
  parallel_for(options.exec, n_batches, [&](std::size_t b) {
    std::vector<double> cur(rows * kBatch, 0.0), next(rows * kBatch, 0.0);
    for (int lane = 0; lane < kBatch; ++lane) {
      const std::size_t col = b * kBatch + lane;
      if (col >= n_columns) continue;
      if (col == n) {
        cur[(rows - 1) * kBatch + lane] = 1.0;
      } else if (options.source == SourceKind::GroupUniform) {
        for (auto v : cmap.group(col)) cur[v * kBatch + lane] = 1.0;
      } else {
        cur[source_voxel[col] * kBatch + lane] = static_cast<double>(cmap.group_size(col));
      }
    }
    // far-field row is held: the sweep never writes it
    std::copy_n(&cur[(rows - 1) * kBatch], kBatch, &next[(rows - 1) * kBatch]);
    for (int s = 0; s < n_pre; ++s) {
      liquid_diffusion_sweep<kBatch>(topo, lambda, cur, next, serial);
      std::swap(cur, next);
    }
    std::vector<double> lane_field(topo.n_liquid());
    for (int lane = 0; lane < kBatch; ++lane) {
      const std::size_t col = b * kBatch + lane;
      if (col >= n_columns) continue;
      for (std::size_t v = 0; v < topo.n_liquid(); ++v) lane_field[v] = cur[v * kBatch + lane];
      const auto coarse = map_fine_to_coarse(lane_field, cmap, PrecisionMode::Full, serial);
      for (std::size_t i = 0; i < n; ++i) {
        if (col == n) {
          m.P_BC[i] = coarse[i];
        } else {
          m.P[i * n + col] = coarse[i];
        }
      }
    }
  });

  if (options.storage != PrecisionMode::Full) return m.stored_as(options.storage);
  m.pack();
  return m;
}

std::vector<double> superpose(const TransferMatrix& m, std::span<const double> coarse,
                              double c_far, PrecisionMode mode, const Exec& exec, DotOptions dot,
                              SuperposeEvents* events) {
  if (coarse.size() != m.n || m.P.size() != m.n * m.n || m.P_BC.size() != m.n) {
    throw std::invalid_argument("superpose: dimension mismatch (matrix " + std::to_string(m.n) +
                                ", vector " + std::to_string(coarse.size()) + ")");
  }
  std::vector<double> out(m.n);
  if (mode == PrecisionMode::Full) {
    // Rows interleaved in blocks: each row still accumulates alone in
    // ascending J, so the bits equal dot_with_boundary, but the chains overlap.
    constexpr std::size_t kRows = TransferMatrix::kPackRows;
    const bool packed = m.is_packed();
    parallel_for(exec, (m.n + kRows - 1) / kRows, [&](std::size_t b) {
      const std::size_t i0 = b * kRows;
      if (!packed || i0 + kRows > m.n) {
        for (std::size_t i = i0; i < std::min(i0 + kRows, m.n); ++i) {
          out[i] = dot_with_boundary(m.row(i), coarse, m.P_BC[i], c_far, mode, dot);
        }
        return;
      }
      // Lane r of the vectors is row i0 + r; lanes never mix.
      using v2 = double __attribute__((vector_size(16)));
      v2 acc[kRows / 2] = {};
      const double* block = m.packed.data() + i0 * m.n;
      for (std::size_t j = 0; j < m.n; ++j) {
        const double cj = coarse[j];
        const v2 c = {cj, cj};
        for (std::size_t h = 0; h < kRows / 2; ++h) {
          v2 p;
          std::memcpy(&p, block + j * kRows + 2 * h, sizeof p);
          acc[h] += p * c;
        }
      }
      for (std::size_t r = 0; r < kRows; ++r) {
        out[i0 + r] = acc[r / 2][r % 2] + m.P_BC[i0 + r] * c_far;
      }
    });
  } else {
    parallel_for(exec, m.n, [&](std::size_t i) {
      out[i] = dot_with_boundary(m.row(i), coarse, m.P_BC[i], c_far, mode, dot);
    });
  }
  if (events) {
    for (double v : out) events->nonfinite += !std::isfinite(v);
  }
  return out;
}

int ElementHistogram::occupied_decades() const {
  return static_cast<int>(std::count_if(decades.begin(), decades.end(),
                                        [](std::uint64_t c) { return c > 0; }));
}

int ElementHistogram::span_decades() const {
  int lo = -1, hi = -1;
  for (int d = 0; d < kDecades; ++d) {
    if (decades[d] == 0) continue;
    if (lo < 0) lo = d;
    hi = d;
  }
  return lo < 0 ? 0 : hi - lo + 1;
}

ElementHistogram element_histogram(std::span<const double> values) {
  static const double edges[ElementHistogram::kDecades + 1] = {
      1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0};
  ElementHistogram h;
  for (double v : values) {
    if (v < 0.0) ++h.negative;
    const double a = std::fabs(v);
    if (a == 0.0) {
      ++h.zeros;
    } else if (a < edges[0]) {
      ++h.below;
    } else if (a > 1.0) {
      ++h.above;
    } else {
      // last decade is closed at 1
      const auto it = std::upper_bound(std::begin(edges), std::end(edges) - 1, a);
      const auto d = std::min<std::ptrdiff_t>(it - std::begin(edges) - 1,
                                              ElementHistogram::kDecades - 1);
      ++h.decades[static_cast<std::size_t>(d)];
    }
  }
  return h;
}

void write_matrix(const std::filesystem::path& path, const TransferMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << kMatrixMagic << '\n'
      << "n " << m.n << '\n'
      << "dt_encoded " << text::fmt(m.dt_encoded) << '\n'
      << "n_pre " << m.n_pre << '\n'
      << "precision " << to_string(m.precision) << '\n'
      << "geometry_hash " << text::hex64(m.geometry_hash) << '\n'
      << "data\n";
  for (double v : m.P) put_value(out, v, m.precision);
  for (double v : m.P_BC) put_value(out, v, m.precision);
  if (!out) throw FormatError("failed writing " + path.string());
}

TransferMatrix read_matrix(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open matrix file " + path.string());
  if (text::read_line(in, "magic") != kMatrixMagic) {
    throw FormatError(path.string() + " is not an " + std::string(kMatrixMagic) + " file");
  }
  TransferMatrix m;
  m.n = text::parse_int<std::size_t>(text::expect_key(text::read_line(in, "n"), "n"), "n");
  m.dt_encoded = text::parse_double(
      text::expect_key(text::read_line(in, "dt_encoded"), "dt_encoded"), "dt_encoded");
  m.n_pre = text::parse_int<int>(text::expect_key(text::read_line(in, "n_pre"), "n_pre"), "n_pre");
  m.precision = parse_precision_mode(
      text::expect_key(text::read_line(in, "precision"), "precision"));
  m.geometry_hash = text::parse_int<std::uint64_t>(
      text::expect_key(text::read_line(in, "geometry_hash"), "geometry_hash"), "geometry_hash",
      16);
  if (text::read_line(in, "data marker") != "data") throw FormatError("missing data marker");
  if (expected_hash && *expected_hash != m.geometry_hash) {
    throw FormatError("matrix " + path.string() + " was built for geometry " +
                      text::hex64(m.geometry_hash) + " but the loaded geometry hashes to " +
                      text::hex64(*expected_hash));
  }
  m.P.resize(m.n * m.n);
  m.P_BC.resize(m.n);
  for (auto& v : m.P) v = get_value(in, m.precision);
  for (auto& v : m.P_BC) v = get_value(in, m.precision);
  m.pack();
  return m;
}

}  // namespace fdirw
