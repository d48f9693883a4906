#include "fdirw/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fdirw/text_io.hpp"

namespace fdirw {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double conservation_error(const KineticsRecord& kinetics, double total) {
  double worst = 0.0;
  for (const auto& s : kinetics.samples) {
    worst = std::max(worst, std::fabs(s.Q_total - total) / total);
  }
  return worst;
}

}  // namespace

Domain Domain::build(PhaseGrid grid, PhysParams params, int block) {
  params.validate();
  Domain d;
  d.grid = partition_near_far(std::move(grid), params);
  d.topo = build_topology(d.grid);
  d.cmap = coarsen(d.topo, block);
  d.params = resolve_total_mass(std::move(params), d.grid.n_solid, d.grid.n_near);
  return d;
}

FineState Domain::initial_state() const {
  return fdirw::initial_state(topo, params, n_far_equiv());
}

std::uint64_t flop_count(std::uint64_t n_groups, std::uint64_t n_liquid) {
  return n_groups * (n_groups + 1) + 2 * n_liquid;
}

RunResult run_integrated(const Domain& domain, const TransferMatrix& matrix, FineState initial,
                         double t_end, const RunOptions& options) {
  const auto& params = domain.params;
  if (options.stride < 1) throw std::invalid_argument("kinetics stride must be >= 1");
  if (matrix.geometry_hash != geometry_hash(domain.grid)) {
    throw FormatError("transfer matrix was built for geometry " +
                      text::hex64(matrix.geometry_hash) + ", run geometry hashes to " +
                      text::hex64(geometry_hash(domain.grid)));
  }
  if (std::fabs(matrix.dt_encoded - params.dt_macro) > 1e-12 * params.dt_macro) {
    std::ostringstream msg;
    msg << "transfer matrix encodes dt = " << matrix.dt_encoded << " s but dt_macro = "
        << params.dt_macro << " s";
    throw ConfigError(msg.str());
  }
  if (matrix.n != domain.cmap.n_groups()) {
    throw FormatError("transfer matrix size " + std::to_string(matrix.n) +
                      " does not match coarse map with " +
                      std::to_string(domain.cmap.n_groups()) + " groups");
  }
  const double total = *params.total_mass_0;
  const double n_far = domain.n_far_equiv();
  const PrecisionMode map_mode =
      options.mode == PrecisionMode::Full ? PrecisionMode::Full : PrecisionMode::B32;

  RunResult result;
  auto& report = result.report;
  report.solver = "fdirw";
  report.mode = options.mode;
  report.n_groups = matrix.n;
  report.n_liquid = domain.topo.n_liquid();
  report.n_solid = domain.topo.n_solid();
  report.flops_per_step = flop_count(report.n_groups, report.n_liquid);
  result.kinetics = make_kinetics_record(domain.topo, params);

  FineState state = std::move(initial);
  const double t0 = state.t;
  const std::size_t steps = macro_steps_between(t0, t_end, params.dt_macro);
  SuperposeEvents superpose_events;

  for (std::size_t step = 1; step <= steps; ++step) {
    auto start = Clock::now();
    const auto coarse = map_fine_to_coarse(state.liquid, domain.cmap, map_mode, options.exec);
    report.times.mapping += seconds_since(start);

    start = Clock::now();
    const auto next = superpose(matrix, coarse, state.c_far, options.mode, options.exec,
                                options.dot, &superpose_events);
    report.times.superpose += seconds_since(start);

    start = Clock::now();
    remap_coarse_to_fine(next, domain.cmap, state.liquid, options.exec);
    report.times.remap += seconds_since(start);

    start = Clock::now();
    report.clamps +=
        advance_solid_interface(state, domain.topo, params, params.dt_macro, options.exec).clamps;
    report.times.solid += seconds_since(start);

    start = Clock::now();
    const double sum_near = state.sum_liquid();
    const double sum_solid = state.sum_solid();
    report.pre_correction_residual.push_back((sum_near + sum_solid + state.c_far * n_far - total) /
                                             total);
    const auto far = far_field_update(total, sum_near, sum_solid, n_far);
    state.c_far = far.c_far;
    report.over_absorbed += far.over_absorbed;
    report.times.far_field += seconds_since(start);

    state.t = t0 + static_cast<double>(step) * params.dt_macro;
    if (step % static_cast<std::size_t>(options.stride) == 0 || step == steps) {
      result.kinetics.samples.push_back(sample_kinetics(state, n_far));
    }
    if (options.observer) options.observer(state, step);
  }
  report.steps = steps;
  report.flops_total = report.flops_per_step * steps;
  report.nonfinite = superpose_events.nonfinite;
  report.max_conservation_error = conservation_error(result.kinetics, total);
  result.state = std::move(state);
  return result;
}

RunResult run_baseline(const Domain& domain, FineState initial, double t_end,
                       const BaselineOptions& options) {
  const std::size_t steps = macro_steps_between(initial.t, t_end, domain.params.dt_macro);
  auto base = fd_run_baseline(std::move(initial), domain.topo, domain.params,
                              domain.n_far_equiv(), t_end, options);
  RunResult result;
  result.state = std::move(base.state);
  result.kinetics = std::move(base.kinetics);
  auto& report = result.report;
  report.solver = "fd";
  report.mode = PrecisionMode::Full;
  report.steps = steps;
  report.n_groups = domain.cmap.n_groups();
  report.n_liquid = domain.topo.n_liquid();
  report.n_solid = domain.topo.n_solid();
  report.times.liquid_fd = base.liquid_seconds;
  report.times.solid = base.solid_seconds;
  report.clamps = base.events.clamps;
  report.over_absorbed = base.over_absorbed;
  report.max_conservation_error = conservation_error(result.kinetics, *domain.params.total_mass_0);
  return result;
}

std::vector<double> normalized_solid(const KineticsRecord& kinetics) {
  std::vector<double> out;
  out.reserve(kinetics.samples.size());
  for (const auto& s : kinetics.samples) out.push_back(s.Q_S / kinetics.Q_S_e);
  return out;
}

double PrecisionComparison::max_rel_error(PrecisionMode mode) const {
  const auto& re = run(mode).report.rel_error;
  return re.empty() ? 0.0 : *std::max_element(re.begin(), re.end());
}

double PrecisionComparison::max_abs_error(PrecisionMode mode) const {
  const auto& ae = run(mode).report.abs_error;
  return ae.empty() ? 0.0 : *std::max_element(ae.begin(), ae.end());
}

double PrecisionComparison::final_quarter_rel_error(PrecisionMode mode) const {
  const auto& re = run(mode).report.rel_error;
  if (re.empty()) return 0.0;
  const std::size_t begin = re.size() - std::max<std::size_t>(1, re.size() / 4);
  return std::accumulate(re.begin() + static_cast<std::ptrdiff_t>(begin), re.end(), 0.0) /
         static_cast<double>(re.size() - begin);
}

PrecisionComparison compare_precision(const Domain& domain, const TransferMatrix& matrix,
                                      double t_end, const RunOptions& options) {
  PrecisionComparison cmp;
  for (auto mode : kAllModes) {
    RunOptions opts = options;
    opts.mode = mode;
    cmp.runs[static_cast<int>(mode)] =
        run_integrated(domain, matrix, domain.initial_state(), t_end, opts);
  }
  const auto reference = normalized_solid(cmp.run(PrecisionMode::Full).kinetics);
  for (auto& run : cmp.runs) {
    const auto values = normalized_solid(run.kinetics);
    run.report.abs_error.clear();
    run.report.rel_error.clear();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double ae = std::fabs(reference[i] - values[i]);
      run.report.abs_error.push_back(ae);
      run.report.rel_error.push_back(ae / reference[i]);
    }
  }
  return cmp;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingTable bench_scaling(std::span<const double> radii, const PhysParams& params,
                           PrecisionMode mode, const BenchOptions& options) {
  if (radii.size() < 3) {
    throw std::invalid_argument("bench_scaling needs at least 3 particle sizes, got " +
                                std::to_string(radii.size()));
  }
  ScalingTable table;
  table.mode = mode;
  const PrecisionMode map_mode = mode == PrecisionMode::Full ? PrecisionMode::Full : PrecisionMode::B32;

  struct Case {
    Domain domain;
    TransferMatrix matrix;
    FineState state;
    FineState fd_state;
    std::size_t batch = 1;
  };
  std::vector<Case> cases;
  cases.reserve(radii.size());
  for (double r_p : radii) {
    ScalingRow row;
    row.r_p = r_p;
    row.grid_size = static_cast<int>(std::ceil(options.grid_factor * r_p));
    GridSpec spec{row.grid_size, row.grid_size, row.grid_size, params.dh};
    ParticleSpec part;
    part.r_p = r_p;
    part.n_pores = static_cast<int>(std::lround(options.pore_density * r_p * r_p * r_p));
    part.pore_radius_min = options.pore_radius_min;
    part.pore_radius_max = options.pore_radius_max;
    part.seed = options.seed;
    Domain domain = Domain::build(generate_particle(spec, part), params, options.block);
    row.n_groups = domain.cmap.n_groups();
    row.n_liquid = domain.topo.n_liquid();
    row.n_solid = domain.topo.n_solid();
    row.flops = flop_count(row.n_groups, row.n_liquid);

    const auto start = Clock::now();
    auto matrix = precondition(domain.grid, domain.topo, domain.cmap, domain.params,
                               {SourceKind::GroupUniform, PrecisionMode::Full, options.exec});
    row.precondition_seconds = seconds_since(start);
    row.row_sum_residual = matrix.row_sum_residual();
    row.fdirw_step_seconds = std::numeric_limits<double>::infinity();
    row.fd_step_seconds = std::numeric_limits<double>::infinity();
    auto state = domain.initial_state();
    auto fd_state = domain.initial_state();
    cases.push_back({std::move(domain), std::move(matrix), std::move(state), std::move(fd_state)});
    table.rows.push_back(row);
  }

  // FDiRW phases only; batch enough steps that clock resolution is irrelevant.
  auto fdirw_step = [&](Case& c) {
    const auto coarse = map_fine_to_coarse(c.state.liquid, c.domain.cmap, map_mode, options.exec);
    const auto next = superpose(c.matrix, coarse, c.state.c_far, mode, options.exec);
    remap_coarse_to_fine(next, c.domain.cmap, c.state.liquid, options.exec);
  };
  for (auto& c : cases) {
    for (;;) {
      const auto start = Clock::now();
      for (std::size_t i = 0; i < c.batch; ++i) fdirw_step(c);
      if (seconds_since(start) >= options.min_batch_seconds || c.batch >= (1u << 20)) break;
      c.batch *= 2;
    }
  }

  // repeats run round-robin over the sizes so a slow spell on a shared host
  // cannot bias a single size
  for (int r = 0; r < options.repeats; ++r) {
    for (std::size_t i = 0; i < cases.size(); ++i) {
      auto& c = cases[i];
      auto& row = table.rows[i];
      auto start = Clock::now();
      for (std::size_t s = 0; s < c.batch; ++s) fdirw_step(c);
      row.fdirw_step_seconds =
          std::min(row.fdirw_step_seconds, seconds_since(start) / static_cast<double>(c.batch));
      if (r % 2 == 0) {
        start = Clock::now();
        for (int s = 0; s < c.domain.params.n_pre(); ++s) {
          fd_step_liquid(c.fd_state, c.domain.topo, c.domain.params, c.domain.params.dt_fd,
                         options.exec);
        }
        row.fd_step_seconds = std::min(row.fd_step_seconds, seconds_since(start));
      }
    }
  }

  std::vector<double> nl, t;
  for (const auto& row : table.rows) {
    nl.push_back(static_cast<double>(row.n_liquid));
    t.push_back(row.fdirw_step_seconds);
  }
  table.slope = loglog_slope(nl, t);
  return table;
}

}  // namespace fdirw
