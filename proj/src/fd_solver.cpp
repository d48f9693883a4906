#include "fdirw/fd_solver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "fdirw/text_io.hpp"

namespace fdirw {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void reject_unstable(const char* what, double dt, double limit) {
  std::ostringstream msg;
  msg << what << ": dt = " << dt << " s exceeds the stability limit " << limit << " s";
  throw StabilityError(msg.str());
}

}  // namespace

Topology build_topology(const PhaseGrid& grid) {
  const auto& spec = grid.spec;
  Topology topo;
  topo.spec = spec;
  std::vector<std::uint32_t> compact(spec.voxel_count(), kNone);
  for (std::size_t idx = 0; idx < spec.voxel_count(); ++idx) {
    switch (grid.labels[idx]) {
      case Phase::LiquidNear:
        compact[idx] = static_cast<std::uint32_t>(topo.liquid_voxels.size());
        topo.liquid_voxels.push_back(idx);
        break;
      case Phase::Solid:
        compact[idx] = static_cast<std::uint32_t>(topo.solid_voxels.size());
        topo.solid_voxels.push_back(idx);
        break;
      case Phase::Far:
        break;
    }
  }

  // Neighbour grid index per slot, or nullopt-equivalent past the grid edge.
  auto neighbours = [&spec](std::size_t idx) {
    const auto [i, j, k] = spec.coords(idx);
    std::array<std::size_t, 6> out;
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    out[0] = i > 0 ? idx - 1 : none;
    out[1] = i + 1 < spec.nx ? idx + 1 : none;
    out[2] = j > 0 ? idx - spec.nx : none;
    out[3] = j + 1 < spec.ny ? idx + spec.nx : none;
    const std::size_t plane = static_cast<std::size_t>(spec.nx) * spec.ny;
    out[4] = k > 0 ? idx - plane : none;
    out[5] = k + 1 < spec.nz ? idx + plane : none;
    return out;
  };
  const std::size_t none = std::numeric_limits<std::size_t>::max();

  topo.liquid_nb.resize(topo.n_liquid());
  for (std::uint32_t v = 0; v < topo.n_liquid(); ++v) {
    const auto nb = neighbours(topo.liquid_voxels[v]);
    for (int f = 0; f < 6; ++f) {
      std::uint32_t slot = v;
      if (nb[f] != none) {
        switch (grid.labels[nb[f]]) {
          case Phase::LiquidNear:
            slot = compact[nb[f]];
            break;
          case Phase::Far:
            slot = topo.far_slot();
            break;
          case Phase::Solid:
            break;
        }
      }
      topo.liquid_nb[v][f] = slot;
    }
  }

  topo.solid_nb.resize(topo.n_solid());
  topo.solid_face_begin.assign(topo.n_solid() + 1, 0);
  for (std::uint32_t s = 0; s < topo.n_solid(); ++s) {
    topo.solid_face_begin[s] = static_cast<std::uint32_t>(topo.faces.size());
    const auto nb = neighbours(topo.solid_voxels[s]);
    for (int f = 0; f < 6; ++f) {
      std::uint32_t slot = s;
      if (nb[f] != none) {
        if (grid.labels[nb[f]] == Phase::Solid) {
          slot = compact[nb[f]];
        } else if (grid.labels[nb[f]] == Phase::LiquidNear) {
          topo.faces.push_back({s, compact[nb[f]]});
        }
        // solid-FAR faces carry no exchange
      }
      topo.solid_nb[s][f] = slot;
    }
  }
  topo.solid_face_begin[topo.n_solid()] = static_cast<std::uint32_t>(topo.faces.size());

  // Transpose the face list per liquid voxel (counting sort keeps face ids ascending).
  topo.liquid_face_begin.assign(topo.n_liquid() + 1, 0);
  for (const auto& face : topo.faces) ++topo.liquid_face_begin[face.liquid + 1];
  std::partial_sum(topo.liquid_face_begin.begin(), topo.liquid_face_begin.end(),
                   topo.liquid_face_begin.begin());
  topo.liquid_face_ids.resize(topo.faces.size());
  std::vector<std::uint32_t> cursor(topo.liquid_face_begin.begin(),
                                    topo.liquid_face_begin.end() - 1);
  for (std::uint32_t f = 0; f < topo.faces.size(); ++f) {
    topo.liquid_face_ids[cursor[topo.faces[f].liquid]++] = f;
  }
  return topo;
}

double FineState::sum_liquid() const { return std::accumulate(liquid.begin(), liquid.end(), 0.0); }
double FineState::sum_solid() const { return std::accumulate(solid.begin(), solid.end(), 0.0); }

FineState initial_state(const Topology& topo, const PhysParams& params, double n_far_equiv) {
  if (!params.total_mass_0) {
    throw ConfigError("initial_state: total_mass_0 must be resolved first");
  }
  FineState state;
  state.liquid.assign(topo.n_liquid(), params.c_L_0);
  state.solid.assign(topo.n_solid(), params.c_S_0);
  state.c_far =
      far_field_update(*params.total_mass_0, state.sum_liquid(), state.sum_solid(), n_far_equiv)
          .c_far;
  state.t = 0.0;
  return state;
}

void fd_step_liquid(FineState& state, const Topology& topo, const PhysParams& params, double dt,
                    const Exec& exec) {
  const double limit = stability_limit(params, Material::Liquid);
  if (dt > limit) reject_unstable("fd_step_liquid", dt, limit);
  const double lambda =
      effective_diffusivity(params, Material::Liquid) * dt / (params.dh * params.dh);
  std::vector<double> ext(topo.n_liquid() + 1);
  std::copy(state.liquid.begin(), state.liquid.end(), ext.begin());
  ext.back() = state.c_far;
  liquid_diffusion_sweep<1>(topo, lambda, ext, state.liquid, exec);
}

ExchangeEvents fd_step_solid_interface(FineState& state, const Topology& topo,
                                       const PhysParams& params, double dt, const Exec& exec) {
  const double limit = solid_interface_limit(params);
  if (dt > limit) reject_unstable("fd_step_solid_interface", dt, limit);
  const double h2 = params.dh * params.dh;
  const double lambda_s = effective_diffusivity(params, Material::Solid) * dt / h2;
  const double exchange = interface_diffusivity(params) * dt / h2;

  const std::vector<double> cs = state.solid;
  const std::vector<double> cl = state.liquid;

  // Per-face transfer into the solid, from the pre-step field.
  std::vector<double> q(topo.faces.size());
  parallel_for(exec, topo.faces.size(), [&](std::size_t f) {
    const auto [s, l] = topo.faces[f];
    const double flux = exchange * (chem_potential(cl[l], Material::Liquid, params) -
                                    chem_potential(cs[s], Material::Solid, params));
    const double uptake = params.k * liquid_driving_factor(cl[l], params) *
                          solid_driving_factor(cs[s], params) * dt;
    q[f] = flux + uptake;
  });

  // Cap each liquid voxel's net outflow at what it holds.
  std::vector<std::uint8_t> clamped(topo.n_liquid(), 0);
  parallel_for(exec, topo.n_liquid(), [&](std::size_t l) {
    const auto begin = topo.liquid_face_begin[l], end = topo.liquid_face_begin[l + 1];
    if (begin == end) return;
    double out = 0.0;
    for (auto i = begin; i < end; ++i) out += q[topo.liquid_face_ids[i]];
    if (out > cl[l] && out > 0.0) {
      const double scale = std::max(cl[l], 0.0) / out;
      for (auto i = begin; i < end; ++i) q[topo.liquid_face_ids[i]] *= scale;
      clamped[l] = 1;
    }
    double moved = 0.0;
    for (auto i = begin; i < end; ++i) moved += q[topo.liquid_face_ids[i]];
    state.liquid[l] = cl[l] - moved;
  });

  parallel_for(exec, topo.n_solid(), [&](std::size_t s) {
    const auto& nb = topo.solid_nb[s];
    double lap = 0.0;
    for (int f = 0; f < 6; ++f) lap += cs[nb[f]] - cs[s];
    double gained = 0.0;
    for (auto f = topo.solid_face_begin[s]; f < topo.solid_face_begin[s + 1]; ++f) gained += q[f];
    state.solid[s] = cs[s] + lambda_s * lap + gained;
  });

  ExchangeEvents events;
  events.substeps = 1;
  for (auto c : clamped) events.clamps += c;
  return events;
}

int solid_substeps(const PhysParams& params, double dt) {
  const double limit = solid_interface_limit(params);
  if (!std::isfinite(limit)) return 1;
  return std::max(1, static_cast<int>(std::ceil(dt / (0.5 * limit))));
}

ExchangeEvents advance_solid_interface(FineState& state, const Topology& topo,
                                       const PhysParams& params, double dt, const Exec& exec) {
  const int n = solid_substeps(params, dt);
  const double sub = dt / n;
  ExchangeEvents total;
  for (int i = 0; i < n; ++i) {
    const auto e = fd_step_solid_interface(state, topo, params, sub, exec);
    total.clamps += e.clamps;
    total.substeps += e.substeps;
  }
  return total;
}

KineticsSample sample_kinetics(const FineState& state, double n_far_equiv) {
  KineticsSample s;
  s.t = state.t;
  s.Q_S = state.sum_solid();
  s.Q_L_near = state.sum_liquid();
  s.c_far = state.c_far;
  s.Q_total = s.Q_S + s.Q_L_near + s.c_far * n_far_equiv;
  return s;
}

KineticsRecord make_kinetics_record(const Topology& topo, const PhysParams& params) {
  KineticsRecord rec;
  rec.Q_S_e = params.c_S_eq * static_cast<double>(topo.n_solid());
  rec.Q_L_0 = params.c_L_0 * static_cast<double>(topo.n_liquid());
  return rec;
}

std::size_t macro_steps_between(double t, double t_end, double dt_macro) {
  if (t_end <= t) return 0;
  return static_cast<std::size_t>(std::floor((t_end - t) / dt_macro + 1e-9));
}

BaselineResult fd_run_baseline(FineState state, const Topology& topo, const PhysParams& params,
                               double n_far_equiv, double t_end,
                               const BaselineOptions& options) {
  if (!params.total_mass_0) throw ConfigError("fd_run_baseline: total_mass_0 unresolved");
  if (options.stride < 1) throw std::invalid_argument("kinetics stride must be >= 1");
  const double liquid_limit = stability_limit(params, Material::Liquid);
  if (params.dt_fd > liquid_limit) reject_unstable("fd_run_baseline", params.dt_fd, liquid_limit);

  BaselineResult result;
  result.kinetics = make_kinetics_record(topo, params);
  const int n_pre = params.n_pre();
  const double t0 = state.t;
  const std::size_t steps = macro_steps_between(t0, t_end, params.dt_macro);
  const double total = *params.total_mass_0;

  auto update_far = [&]() {
    const auto far = far_field_update(total, state.sum_liquid(), state.sum_solid(), n_far_equiv);
    state.c_far = far.c_far;
    result.over_absorbed += far.over_absorbed;
  };
  auto add = [&result](const ExchangeEvents& e) {
    result.events.clamps += e.clamps;
    result.events.substeps += e.substeps;
  };

  for (std::size_t step = 1; step <= steps; ++step) {
    if (options.cadence == InterfaceCadence::Macro) {
      auto start = Clock::now();
      for (int s = 0; s < n_pre; ++s) fd_step_liquid(state, topo, params, params.dt_fd, options.exec);
      result.liquid_seconds += seconds_since(start);
      start = Clock::now();
      add(advance_solid_interface(state, topo, params, params.dt_macro, options.exec));
      update_far();
      result.solid_seconds += seconds_since(start);
    } else {
      for (int s = 0; s < n_pre; ++s) {
        auto start = Clock::now();
        fd_step_liquid(state, topo, params, params.dt_fd, options.exec);
        result.liquid_seconds += seconds_since(start);
        start = Clock::now();
        add(advance_solid_interface(state, topo, params, params.dt_fd, options.exec));
        update_far();
        result.solid_seconds += seconds_since(start);
      }
    }
    state.t = t0 + static_cast<double>(step) * params.dt_macro;
    if (step % static_cast<std::size_t>(options.stride) == 0 || step == steps) {
      result.kinetics.samples.push_back(sample_kinetics(state, n_far_equiv));
    }
    if (options.observer) options.observer(state, step);
  }
  result.state = std::move(state);
  return result;
}

void write_field(const std::filesystem::path& path, const PhaseGrid& grid, const Topology& topo,
                 const FineState& state) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << kFieldMagic << '\n'
      << "time " << text::fmt(state.t) << '\n'
      << "dims " << grid.spec.nx << ' ' << grid.spec.ny << ' ' << grid.spec.nz << '\n'
      << "counts " << topo.n_solid() << ' ' << topo.n_liquid() << '\n'
      << "data\n";
  std::size_t l = 0, s = 0;
  for (std::size_t idx = 0; idx < grid.labels.size(); ++idx) {
    switch (grid.labels[idx]) {
      case Phase::LiquidNear:
        out << text::fmt(state.liquid[l++]) << '\n';
        break;
      case Phase::Solid:
        out << text::fmt(state.solid[s++]) << '\n';
        break;
      case Phase::Far:
        break;
    }
  }
  out << text::fmt(state.c_far) << '\n';
}

}  // namespace fdirw
