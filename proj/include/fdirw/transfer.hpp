#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fdirw/coarse_mesh.hpp"
#include "fdirw/precision.hpp"

namespace fdirw {

/// Dense FDiRW transfer operator for one macro step.
///
/// P(I, J) is the mean concentration of group I after the liquid has evolved
/// for dt_encoded from unit concentration on every voxel of group J (zero
/// elsewhere, zero far field). P_BC(I) is the response to a far-field value
/// of one held for the same interval over an empty near field.
struct TransferMatrix {
  std::size_t n = 0;
  std::vector<double> P;     // row-major n x n
  std::vector<double> P_BC;  // n
  double dt_encoded = 0.0;
  int n_pre = 0;
  PrecisionMode precision = PrecisionMode::Full;
  std::uint64_t geometry_hash = 0;
  /// Full blocks of kPackRows rows, column-major inside each block, for the
  /// full-precision kernel. Derived from P by pack(); empty means unpacked.
  std::vector<double> packed;
  static constexpr std::size_t kPackRows = 8;

  double operator()(std::size_t i, std::size_t j) const { return P[i * n + j]; }
  std::span<const double> row(std::size_t i) const { return {P.data() + i * n, n}; }

  /// max_I |sum_J P(I, J) + P_BC(I) - 1|
  double row_sum_residual() const;

  /// Copy with every entry rounded into `mode` storage.
  TransferMatrix stored_as(PrecisionMode mode) const;

  /// Rebuilds `packed` from P; call after any change to P.
  void pack();
  bool is_packed() const { return packed.size() == (n / kPackRows) * kPackRows * n; }
};

enum class SourceKind {
  GroupUniform,  // unit concentration on every member of the source group
  SingleVoxel,   // the group's total (N_J) placed on its most central member
};

struct PreconditionOptions {
  SourceKind source = SourceKind::GroupUniform;
  PrecisionMode storage = PrecisionMode::Full;
  Exec exec;
};

/// Builds P and P_BC column by column with n_pre explicit liquid steps each
/// (solid no-flux, FAR Dirichlet). Columns are independent and computed in
/// parallel; the result does not depend on the worker count.
TransferMatrix precondition(const PhaseGrid& grid, const Topology& topo, const CoarseMap& cmap,
                            const PhysParams& params, const PreconditionOptions& options = {});

struct SuperposeEvents {
  std::uint64_t nonfinite = 0;
};

/// C'(I) = sum_J P(I, J) C(J) + P_BC(I) c_far under the arithmetic of `mode`,
/// one row per task, ascending J within a row.
std::vector<double> superpose(const TransferMatrix& m, std::span<const double> coarse,
                              double c_far, PrecisionMode mode, const Exec& exec = {},
                              DotOptions dot = {}, SuperposeEvents* events = nullptr);

/// Counts of |entry| per decade over [1e-12, 1]; decade d covers
/// [10^(d-12), 10^(d-11)) and the last decade includes 1 itself.
struct ElementHistogram {
  static constexpr int kDecades = 12;
  static constexpr int kLowestExponent = -12;
  std::array<std::uint64_t, kDecades> decades{};
  std::uint64_t zeros = 0;
  std::uint64_t below = 0;     // 0 < |x| < 1e-12
  std::uint64_t above = 0;     // |x| > 1
  std::uint64_t negative = 0;  // entries < 0 (also binned by magnitude)

  int occupied_decades() const;
  /// Decades between the smallest and largest occupied bin, inclusive.
  int span_decades() const;
};

ElementHistogram element_histogram(std::span<const double> values);

void write_matrix(const std::filesystem::path& path, const TransferMatrix& m);

/// Throws FormatError naming both hashes when `expected_hash` is given and
/// differs from the file's.
TransferMatrix read_matrix(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_hash = std::nullopt);

inline constexpr const char* kMatrixMagic = "FDIRW-MAT v1";

}  // namespace fdirw
