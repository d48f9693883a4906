// fdirw: geometry generation, preconditioning, runs, precision comparison,
// scaling benchmark and plots.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fdirw/driver.hpp"
#include "fdirw/output.hpp"
#include "fdirw/text_io.hpp"

namespace fs = std::filesystem;
using namespace fdirw;

namespace {

constexpr const char* kVersion = "fdirw 1.0";

PrecisionMode precision_flag(const std::string& s) { return parse_precision_mode(s); }

std::pair<double, double> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    const double v = text::parse_double(s, "--pore-radius");
    return {v, v};
  }
  return {text::parse_double(std::string_view(s).substr(0, colon), "--pore-radius"),
          text::parse_double(std::string_view(s).substr(colon + 1), "--pore-radius")};
}

void warn_mass_gap(const PhysParams& params, const PhaseGrid& grid) {
  const double gap = total_mass_gap(params, grid.n_solid, grid.n_near);
  if (gap > kMassGapWarning) {
    std::cerr << "warning: total_mass_0 differs from the initial inventory of this geometry by "
              << std::setprecision(3) << gap * 100.0 << "%\n";
  }
}

Domain load_domain(const std::string& geometry, const std::string& config, int block) {
  const auto params = load_params(config);
  auto grid = read_geometry(geometry);
  auto domain = Domain::build(std::move(grid), params, block);
  warn_mass_gap(params, domain.grid);
  return domain;
}

TransferMatrix obtain_matrix(const Domain& domain, const std::string& path, const Exec& exec) {
  const auto hash = geometry_hash(domain.grid);
  if (!path.empty()) return read_matrix(path, hash);
  std::cerr << "no --matrix given; preconditioning " << domain.cmap.n_groups() << " groups\n";
  PreconditionOptions opts;
  opts.exec = exec;
  return precondition(domain.grid, domain.topo, domain.cmap, domain.params, opts);
}

struct RunFlags {
  std::string geometry, config, matrix, out, solver = "fdirw", precision = "full";
  std::string cadence = "macro";
  double t_end = 0.0;
  int stride = 1;
  int workers = 1;
  int block = kDefaultCoarsening;
  int dump_every = 0;
};

void add_common(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--geometry", f.geometry, "geometry file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", f.config, "physics config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--block", f.block, "coarsening block edge in voxels")->check(CLI::PositiveNumber);
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  add_common(cmd, f);
  cmd->add_option("--matrix", f.matrix, "transfer matrix file (preconditioned in-process if absent)");
  cmd->add_option("--t-end", f.t_end, "end time [s]")->required();
  cmd->add_option("--stride", f.stride, "kinetics sample every N macro steps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory")->required();
  cmd->add_option("--dump-every", f.dump_every, "field dump every N macro steps (0: final only)")
      ->check(CLI::NonNegativeNumber);
}

void write_run_dir(const fs::path& dir, const RunResult& r, const std::string& label) {
  fs::create_directories(dir / "plots");
  write_kinetics_csv(dir / "kinetics.csv", r.kinetics);
  write_report(dir / "report.txt", r.report, r.kinetics);
  write_timing(dir / "timing.txt", r.report);
  write_text(dir / "plots" / "kinetics.svg", kinetics_plot({{label, r.kinetics}}));
}

std::function<void(const FineState&, std::size_t)> field_dumper(const Domain& domain,
                                                                const fs::path& dir, int every) {
  fs::create_directories(dir);
  if (every <= 0) return {};
  return [&domain, dir, every](const FineState& s, std::size_t step) {
    if (step % static_cast<std::size_t>(every) != 0) return;
    char name[32];
    std::snprintf(name, sizeof name, "step_%06zu.txt", step);
    write_field(dir / name, domain.grid, domain.topo, s);
  };
}

int cmd_run(const RunFlags& f) {
  const auto domain = load_domain(f.geometry, f.config, f.block);
  const Exec exec{f.workers};
  const fs::path dir = f.out;
  const auto fields = dir / "fields";
  auto dumper = field_dumper(domain, fields, f.dump_every);
  RunResult result;
  if (f.solver == "fd") {
    BaselineOptions opts;
    opts.stride = f.stride;
    opts.exec = exec;
    opts.cadence = f.cadence == "substep" ? InterfaceCadence::Substep : InterfaceCadence::Macro;
    opts.observer = dumper;
    result = run_baseline(domain, domain.initial_state(), f.t_end, opts);
  } else {
    const auto mode = precision_flag(f.precision);
    const auto start = std::chrono::steady_clock::now();
    const auto matrix = obtain_matrix(domain, f.matrix, exec);
    const double pre_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    RunOptions opts;
    opts.mode = mode;
    opts.stride = f.stride;
    opts.exec = exec;
    opts.observer = dumper;
    result = run_integrated(domain, matrix.stored_as(mode), domain.initial_state(), f.t_end, opts);
    if (f.matrix.empty()) result.report.times.precondition = pre_seconds;
  }
  write_run_dir(dir, result, f.solver);
  write_field(fields / "final.txt", domain.grid, domain.topo, result.state);
  const auto& last = result.kinetics.samples.back();
  std::cout << "steps " << result.report.steps << "  Q_S/Q_S^e " << last.Q_S / result.kinetics.Q_S_e
            << "  conservation error " << result.report.max_conservation_error << '\n';
  return 0;
}

int cmd_compare(const RunFlags& f) {
  const auto domain = load_domain(f.geometry, f.config, f.block);
  const Exec exec{f.workers};
  const auto matrix = obtain_matrix(domain, f.matrix, exec);
  RunOptions opts;
  opts.stride = f.stride;
  opts.exec = exec;
  const auto cmp = compare_precision(domain, matrix, f.t_end, opts);
  const fs::path dir = f.out;
  std::vector<std::pair<std::string, KineticsRecord>> curves;
  for (auto mode : kAllModes) {
    const std::string name(to_string(mode));
    write_run_dir(dir / name, cmp.run(mode), name);
    curves.emplace_back(name, cmp.run(mode).kinetics);
  }
  fs::create_directories(dir / "plots");
  write_comparison_csv(dir / "compare.csv", cmp);
  write_text(dir / "plots" / "rel_error.svg", rel_error_plot(cmp));
  write_text(dir / "plots" / "kinetics.svg", kinetics_plot(curves));
  for (auto mode : kAllModes) {
    std::cout << std::left << std::setw(6) << to_string(mode) << " max AE "
              << cmp.max_abs_error(mode) << "  max RE " << cmp.max_rel_error(mode) << '\n';
  }
  return 0;
}

std::vector<double> parse_sizes(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto end = comma == std::string::npos ? s.size() : comma;
    out.push_back(text::parse_double(std::string_view(s).substr(pos, end - pos), "--sizes"));
    pos = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference informed random walker solver for particle absorption"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion) + "\n" + kGeometryMagic + "\n" +
                                        kMatrixMagic + "\n" + kFieldMagic + "\n" + kCoarseMapMagic);

  // gen-geometry
  auto* gen = app.add_subcommand("gen-geometry", "generate a porous spherical particle");
  int size = 0, pores = 0;
  double rp = 0.0, dh = 10e-9;
  std::string pore_radius = "2:3", geo_out;
  std::uint64_t seed = 1;
  gen->add_option("--size", size, "grid edge in voxels")->required()->check(CLI::PositiveNumber);
  gen->add_option("--rp", rp, "particle radius in voxels")->required();
  gen->add_option("--pores", pores, "number of spherical pores")->check(CLI::NonNegativeNumber);
  gen->add_option("--pore-radius", pore_radius, "pore radius range a:b in voxels");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--dh", dh, "voxel edge [m]");
  gen->add_option("--out", geo_out, "output geometry file")->required();

  // precondition
  auto* pre = app.add_subcommand("precondition", "build the transfer matrix for a geometry");
  RunFlags pre_flags;
  std::string source = "group";
  add_common(pre, pre_flags);
  pre->add_option("--precision", pre_flags.precision, "storage precision: full|fp32|mixed|fp16");
  pre->add_option("--source", source, "unit source: group|voxel")
      ->check(CLI::IsMember({"group", "voxel"}));
  pre->add_option("--out", pre_flags.out, "output matrix file")->required();

  // run
  auto* run = app.add_subcommand("run", "simulate absorption kinetics");
  RunFlags run_flags;
  add_run_flags(run, run_flags);
  run->add_option("--solver", run_flags.solver, "fd|fdirw")->check(CLI::IsMember({"fd", "fdirw"}));
  run->add_option("--precision", run_flags.precision, "full|fp32|mixed|fp16");
  run->add_option("--cadence", run_flags.cadence, "fd interface update cadence: macro|substep")
      ->check(CLI::IsMember({"macro", "substep"}));

  // compare
  auto* compare = app.add_subcommand("compare", "run all four precision modes");
  RunFlags cmp_flags;
  add_run_flags(compare, cmp_flags);

  // bench
  auto* bench = app.add_subcommand("bench", "per-step wall time versus particle size");
  std::string sizes = "8,12,16", bench_config, bench_precision = "full", bench_out;
  BenchOptions bench_opts;
  bench->add_option("--sizes", sizes, "comma-separated particle radii in voxels");
  bench->add_option("--config", bench_config, "physics config file")->required()
      ->check(CLI::ExistingFile);
  bench->add_option("--precision", bench_precision, "full|fp32|mixed|fp16");
  bench->add_option("--repeats", bench_opts.repeats, "timing repeats")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_opts.seed, "geometry seed");
  bench->add_option("--block", bench_opts.block, "coarsening block edge in voxels")
      ->check(CLI::PositiveNumber);
  bench->add_option("--workers", bench_opts.exec.workers, "worker threads")
      ->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "output directory for scaling.csv and plot");

  // plot
  auto* plot = app.add_subcommand("plot", "render kinetics CSV files as an SVG chart");
  std::vector<std::string> plot_inputs;
  std::string plot_out;
  plot->add_option("inputs", plot_inputs, "kinetics.csv files")->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "output SVG file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto [rmin, rmax] = parse_range(pore_radius);
      const GridSpec spec{size, size, size, dh};
      const auto grid = label_near_field(generate_particle(spec, {rp, pores, rmin, rmax, seed}));
      write_geometry(geo_out, grid);
      const double sphere = static_cast<double>(digitized_sphere_count(rp));
      std::cout << "N_S " << grid.n_solid << "\nN_L " << grid.n_near << "\nporosity "
                << 1.0 - static_cast<double>(grid.n_solid) / sphere << '\n';
    } else if (pre->parsed()) {
      const auto domain = load_domain(pre_flags.geometry, pre_flags.config, pre_flags.block);
      PreconditionOptions opts;
      opts.source = source == "voxel" ? SourceKind::SingleVoxel : SourceKind::GroupUniform;
      opts.exec = Exec{pre_flags.workers};
      const auto m = precondition(domain.grid, domain.topo, domain.cmap, domain.params, opts);
      const auto stored = m.stored_as(precision_flag(pre_flags.precision));
      write_matrix(pre_flags.out, stored);
      std::cout << "N " << stored.n << "\nN_L " << domain.topo.n_liquid()
                << "\nmax row-sum residual " << m.row_sum_residual() << '\n';
    } else if (run->parsed()) {
      return cmd_run(run_flags);
    } else if (compare->parsed()) {
      return cmd_compare(cmp_flags);
    } else if (bench->parsed()) {
      const auto radii = parse_sizes(sizes);
      const auto table = bench_scaling(radii, load_params(bench_config),
                                       precision_flag(bench_precision), bench_opts);
      std::cout << "r_p  N_L      N     fdirw_step_s  fd_step_s    precondition_s\n";
      for (const auto& r : table.rows) {
        std::cout << std::left << std::setw(5) << r.r_p << std::setw(9) << r.n_liquid
                  << std::setw(6) << r.n_groups << std::setw(13) << r.fdirw_step_seconds
                  << std::setw(13) << r.fd_step_seconds << r.precondition_seconds << '\n';
      }
      std::cout << "slope " << table.slope << '\n';
      if (!bench_out.empty()) {
        fs::create_directories(fs::path(bench_out) / "plots");
        write_scaling_csv(fs::path(bench_out) / "scaling.csv", table);
        write_text(fs::path(bench_out) / "plots" / "scaling.svg", scaling_plot(table));
      }
    } else if (plot->parsed()) {
      std::vector<std::pair<std::string, KineticsRecord>> runs;
      for (const auto& in : plot_inputs) {
        runs.emplace_back(fs::path(in).parent_path().filename().string(), read_kinetics_csv(in));
      }
      write_text(plot_out, kinetics_plot(runs));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
