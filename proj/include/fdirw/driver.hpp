#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fdirw/coarse_mesh.hpp"
#include "fdirw/fd_solver.hpp"
#include "fdirw/transfer.hpp"

namespace fdirw {

/// Geometry plus everything derived from it that a run needs.
struct Domain {
  PhaseGrid grid;  // partitioned, n_far_equiv set
  Topology topo;
  CoarseMap cmap;
  PhysParams params;  // total_mass_0 resolved

  /// Partitions `grid` against `params`, builds topology and coarse map.
  static Domain build(PhaseGrid grid, PhysParams params, int block = kDefaultCoarsening);

  double n_far_equiv() const { return grid.n_far_equiv; }
  FineState initial_state() const;
};

/// Multiplications per FDiRW step: N(N + 1) + 2 N_L.
std::uint64_t flop_count(std::uint64_t n_groups, std::uint64_t n_liquid);

struct PhaseTimes {
  double precondition = 0.0;
  double mapping = 0.0;
  double superpose = 0.0;
  double remap = 0.0;
  double liquid_fd = 0.0;  // FD baseline only
  double solid = 0.0;
  double far_field = 0.0;
};

struct RunReport {
  std::string solver;  // "fd" | "fdirw"
  PrecisionMode mode = PrecisionMode::Full;
  std::size_t steps = 0;
  std::size_t n_groups = 0;
  std::size_t n_liquid = 0;
  std::size_t n_solid = 0;
  std::uint64_t flops_per_step = 0;
  std::uint64_t flops_total = 0;
  PhaseTimes times;
  std::uint64_t clamps = 0;
  std::uint64_t nonfinite = 0;
  std::uint64_t over_absorbed = 0;
  /// Per step: (Q_total with the previous c_far - total_mass_0) / total_mass_0,
  /// i.e. the imbalance the far-field update absorbs.
  std::vector<double> pre_correction_residual;
  /// max |Q_total - total_mass_0| / total_mass_0 over the kinetics samples.
  double max_conservation_error = 0.0;
  /// Per kinetics sample, against the reference run (compare_precision).
  std::vector<double> abs_error;
  std::vector<double> rel_error;
};

struct RunResult {
  FineState state;
  KineticsRecord kinetics;
  RunReport report;
};

struct RunOptions {
  PrecisionMode mode = PrecisionMode::Full;
  int stride = 1;
  Exec exec;
  DotOptions dot;
  /// Called after every macro step with the post-step state.
  std::function<void(const FineState&, std::size_t step)> observer;
};

/// Integrated FDiRW loop over [initial.t, t_end]. Per macro step: map,
/// superpose, remap, solid/interface update over dt_macro, far-field update,
/// kinetics sample every `stride` steps (and at the last step).
RunResult run_integrated(const Domain& domain, const TransferMatrix& matrix, FineState initial,
                         double t_end, const RunOptions& options = {});

/// FD baseline wrapped into the same result type.
RunResult run_baseline(const Domain& domain, FineState initial, double t_end,
                       const BaselineOptions& options = {});

/// Normalized solid concentration Q_S / (N_S c_S_eq) per sample.
std::vector<double> normalized_solid(const KineticsRecord& kinetics);

struct PrecisionComparison {
  std::array<RunResult, 4> runs;  // indexed like kAllModes

  const RunResult& run(PrecisionMode mode) const { return runs[static_cast<int>(mode)]; }
  double max_rel_error(PrecisionMode mode) const;
  double max_abs_error(PrecisionMode mode) const;
  /// Mean relative error over the last quarter of the samples.
  double final_quarter_rel_error(PrecisionMode mode) const;
};

/// Runs every precision mode on identical inputs and fills AE/RE of the
/// normalized solid concentration against the Full run.
PrecisionComparison compare_precision(const Domain& domain, const TransferMatrix& matrix,
                                      double t_end, const RunOptions& options = {});

struct ScalingRow {
  double r_p = 0.0;
  int grid_size = 0;
  std::size_t n_groups = 0;
  std::size_t n_liquid = 0;
  std::size_t n_solid = 0;
  std::uint64_t flops = 0;
  double precondition_seconds = 0.0;
  double row_sum_residual = 0.0;
  double fdirw_step_seconds = 0.0;  // map + superpose + remap per macro step
  double fd_step_seconds = 0.0;     // n_pre liquid substeps per macro step
};

struct ScalingTable {
  PrecisionMode mode = PrecisionMode::Full;
  std::vector<ScalingRow> rows;
  double slope = 0.0;  // d log(fdirw_step_seconds) / d log(N_L)
};

struct BenchOptions {
  int grid_factor = 4;  // grid edge = grid_factor * r_p
  double pore_density = 20.0 / (12.0 * 12.0 * 12.0);  // pores per r_p^3
  double pore_radius_min = 2.0;
  double pore_radius_max = 3.0;
  std::uint64_t seed = 7;
  int repeats = 5;
  int block = kDefaultCoarsening;
  double min_batch_seconds = 0.02;
  Exec exec;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Generates, preconditions and times one geometry per radius (>= 3 radii).
ScalingTable bench_scaling(std::span<const double> radii, const PhysParams& params,
                           PrecisionMode mode, const BenchOptions& options = {});

}  // namespace fdirw
