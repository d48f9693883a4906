#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fdirw/common.hpp"
#include "fdirw/fd_solver.hpp"
#include "fdirw/geometry.hpp"
#include "fdirw/physics.hpp"
#include "support/oracles.hpp"

using namespace fdirw;

namespace {

PhaseGrid uniform_grid(int nx, int ny, int nz, Phase phase) {
  const GridSpec spec{nx, ny, nz, 10e-9};
  return PhaseGrid::from_labels(spec, std::vector<Phase>(spec.voxel_count(), phase));
}

struct Small {
  PhaseGrid grid;
  Topology topo;
  PhysParams params;
};

Small small_particle(int size = 24, double r_p = 6.0, int pores = 6) {
  auto params = reference_params();
  params.V_far = 2e-20;
  params.total_mass_0.reset();
  const GridSpec spec{size, size, size, params.dh};
  auto grid = partition_near_far(generate_particle(spec, {r_p, pores, 1.5, 2.5, 11}), params);
  params = resolve_total_mass(params, grid.n_solid, grid.n_near);
  auto topo = build_topology(grid);
  return {std::move(grid), std::move(topo), params};
}

std::vector<double> random_field(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double lambda_liquid(const PhysParams& p, double dt) {
  return effective_diffusivity(p, Material::Liquid) * dt / (p.dh * p.dh);
}

}  // namespace

TEST_CASE("uniform field is stationary") {
  const auto s = small_particle();
  FineState st;
  st.liquid.assign(s.topo.n_liquid(), 0.37);
  st.solid.assign(s.topo.n_solid(), 0.5);
  st.c_far = 0.37;
  for (int i = 0; i < 20; ++i) fd_step_liquid(st, s.topo, s.params, s.params.dt_fd);
  for (double c : st.liquid) REQUIRE(c == 0.37);
}

TEST_CASE("single-voxel stencil") {
  auto grid = uniform_grid(3, 3, 3, Phase::LiquidNear);
  const auto topo = build_topology(grid);
  const auto p = reference_params();
  FineState st;
  st.liquid.assign(27, 0.0);
  st.liquid[grid.spec.index(1, 1, 1)] = 1.0;
  fd_step_liquid(st, topo, p, p.dt_fd);
  const double lambda = lambda_liquid(p, p.dt_fd);
  CHECK(st.liquid[grid.spec.index(1, 1, 1)] == doctest::Approx(1 - 6 * lambda).epsilon(1e-15));
  for (auto [i, j, k] : {std::array{0, 1, 1}, std::array{2, 1, 1}, std::array{1, 0, 1},
                         std::array{1, 2, 1}, std::array{1, 1, 0}, std::array{1, 1, 2}}) {
    CHECK(st.liquid[grid.spec.index(i, j, k)] == doctest::Approx(lambda).epsilon(1e-15));
  }
  CHECK(st.liquid[grid.spec.index(0, 0, 0)] == 0.0);
}

TEST_CASE("liquid sweep matches the dense-grid oracle") {
  const auto s = small_particle();
  const auto init = random_field(s.topo.n_liquid(), 1, 0.0, 1.0);
  std::vector<double> dense(s.grid.spec.voxel_count(), 0.0);
  for (std::size_t v = 0; v < init.size(); ++v) dense[s.topo.liquid_voxels[v]] = init[v];
  FineState st;
  st.liquid = init;
  st.solid.assign(s.topo.n_solid(), 0.0);
  st.c_far = 0.25;
  for (int i = 0; i < 50; ++i) fd_step_liquid(st, s.topo, s.params, s.params.dt_fd);
  oracle::dense_liquid_steps(s.grid, dense, 0.25, lambda_liquid(s.params, s.params.dt_fd), 50);
  double worst = 0.0;
  for (std::size_t v = 0; v < init.size(); ++v)
    worst = std::max(worst, std::fabs(st.liquid[v] - dense[s.topo.liquid_voxels[v]]));
  CHECK(worst <= 1e-14);
  CHECK(st.c_far == 0.25);
}

TEST_CASE("sealed domain conserves mass") {
  // liquid box with a solid core and no FAR voxels anywhere
  const GridSpec spec{12, 12, 12, 10e-9};
  std::vector<Phase> labels(spec.voxel_count(), Phase::LiquidNear);
  for (int k = 4; k < 8; ++k)
    for (int j = 4; j < 8; ++j)
      for (int i = 4; i < 8; ++i) labels[spec.index(i, j, k)] = Phase::Solid;
  const auto grid = PhaseGrid::from_labels(spec, labels);
  const auto topo = build_topology(grid);
  const auto p = reference_params();
  FineState st;
  st.liquid = random_field(topo.n_liquid(), 2, 0.0, 4e-3);
  st.solid = random_field(topo.n_solid(), 3, 0.0, 0.5);
  const double before = st.sum_liquid() + st.sum_solid();
  for (int i = 0; i < 1000; ++i) {
    fd_step_liquid(st, topo, p, p.dt_fd);
    if (i % 100 == 99) advance_solid_interface(st, topo, p, 100 * p.dt_fd);
  }
  const double after = st.sum_liquid() + st.sum_solid();
  CHECK(std::fabs(after - before) / before <= 1e-12);
}

TEST_CASE("two-voxel exchange matches the hand-written step") {
  const GridSpec spec{2, 1, 1, 10e-9};
  const auto grid = PhaseGrid::from_labels(spec, {Phase::Solid, Phase::LiquidNear});
  const auto topo = build_topology(grid);
  REQUIRE(topo.faces.size() == 1);
  const auto p = reference_params();
  for (auto [cs, cl] : {std::array{0.3, 2e-3}, std::array{0.9, 5e-2}, std::array{1.2, 1e-6}}) {
    FineState st;
    st.solid = {cs};
    st.liquid = {cl};
    const double dt = 1e-4;
    const auto events = fd_step_solid_interface(st, topo, p, dt);
    const auto ref = oracle::two_box_step(cs, cl, p.D_S, p.D_L, p.A_S_over_RT, p.A_L_over_RT,
                                          p.c_S_eq, p.c_L_eq, p.k, p.dh, dt);
    CHECK(st.solid[0] == doctest::Approx(ref.solid).epsilon(1e-13));
    CHECK(st.liquid[0] == doctest::Approx(ref.liquid).epsilon(1e-12).scale(1e-12));
    CHECK(st.solid[0] + st.liquid[0] == doctest::Approx(cs + cl).epsilon(1e-15));
    CHECK(events.substeps == 1);
  }
}

TEST_CASE("double equilibrium exchanges nothing") {
  const GridSpec spec{2, 1, 1, 10e-9};
  const auto topo = build_topology(PhaseGrid::from_labels(spec, {Phase::Solid, Phase::LiquidNear}));
  const auto p = reference_params();
  FineState st;
  st.solid = {p.c_S_eq};
  st.liquid = {p.c_L_eq};
  fd_step_solid_interface(st, topo, p, 1e-4);
  CHECK(st.solid[0] == p.c_S_eq);
  CHECK(st.liquid[0] == p.c_L_eq);
}

TEST_CASE("pure solid block stays uniform") {
  const auto grid = uniform_grid(4, 4, 4, Phase::Solid);
  const auto topo = build_topology(grid);
  const auto p = reference_params();
  FineState st;
  st.solid.assign(64, 0.4);
  advance_solid_interface(st, topo, p, p.dt_macro);
  for (double c : st.solid) CHECK(c == 0.4);
}

TEST_CASE("outflow larger than the liquid holds is clamped") {
  // one liquid voxel between two undersaturated solid voxels
  const GridSpec spec{3, 1, 1, 10e-9};
  const auto topo = build_topology(
      PhaseGrid::from_labels(spec, {Phase::Solid, Phase::LiquidNear, Phase::Solid}));
  const auto p = reference_params();
  FineState st;
  st.solid = {0.1, 0.2};
  st.liquid = {1e-6};
  const double before = st.sum_solid() + st.sum_liquid();
  const auto events = fd_step_solid_interface(st, topo, p, 1e-4);
  CHECK(events.clamps == 1);
  CHECK(std::fabs(st.liquid[0]) <= 1e-20);
  CHECK(st.sum_solid() + st.sum_liquid() == doctest::Approx(before).epsilon(1e-15));
  CHECK(st.solid[0] > 0.1);
  CHECK(st.solid[1] > 0.2);
}

TEST_CASE("liquid step is linear and bounded") {
  const auto s = small_particle();
  const auto a = random_field(s.topo.n_liquid(), 4, 0.0, 1.0);
  const auto b = random_field(s.topo.n_liquid(), 5, 0.0, 1.0);
  auto run = [&](std::vector<double> init, double c_far) {
    FineState st;
    st.liquid = std::move(init);
    st.solid.assign(s.topo.n_solid(), 0.0);
    st.c_far = c_far;
    for (int i = 0; i < 30; ++i) fd_step_liquid(st, s.topo, s.params, s.params.dt_fd);
    return st.liquid;
  };
  std::vector<double> ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) ab[i] = 2.0 * a[i] + b[i];
  const auto ra = run(a, 0.3), rb = run(b, 0.1), rab = run(ab, 0.7);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::fabs(rab[i] - (2.0 * ra[i] + rb[i])));
  CHECK(worst <= 1e-13);
  for (double c : ra) {
    CHECK(c >= 0.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("unstable steps are rejected") {
  const auto s = small_particle();
  FineState st;
  st.liquid.assign(s.topo.n_liquid(), 0.0);
  st.solid.assign(s.topo.n_solid(), 0.0);
  CHECK_THROWS_AS(fd_step_liquid(st, s.topo, s.params, 1e-6), StabilityError);
  CHECK_THROWS_AS(fd_step_solid_interface(st, s.topo, s.params, s.params.dt_macro),
                  StabilityError);
  CHECK(solid_substeps(s.params, s.params.dt_macro) == 3);
  CHECK_NOTHROW(advance_solid_interface(st, s.topo, s.params, s.params.dt_macro));
}

TEST_CASE("baseline run") {
  const auto s = small_particle();
  const auto init = initial_state(s.topo, s.params, s.grid.n_far_equiv);
  const double total = *s.params.total_mass_0;
  CHECK(sample_kinetics(init, s.grid.n_far_equiv).Q_total ==
        doctest::Approx(total).epsilon(1e-14));

  SUBCASE("t_end = t is the identity") {
    const auto r = fd_run_baseline(init, s.topo, s.params, s.grid.n_far_equiv, init.t);
    CHECK(r.kinetics.samples.empty());
    CHECK(r.state.liquid == init.liquid);
    CHECK(r.state.solid == init.solid);
    CHECK(r.state.c_far == init.c_far);
  }

  SUBCASE("worker count does not change the bits") {
    const double t_end = 3 * s.params.dt_macro;
    BaselineOptions one, four;
    four.exec.workers = 4;
    const auto r1 = fd_run_baseline(init, s.topo, s.params, s.grid.n_far_equiv, t_end, one);
    const auto r4 = fd_run_baseline(init, s.topo, s.params, s.grid.n_far_equiv, t_end, four);
    CHECK(r1.state.liquid == r4.state.liquid);
    CHECK(r1.state.solid == r4.state.solid);
    CHECK(r1.state.c_far == r4.state.c_far);
    REQUIRE(r1.kinetics.samples.size() == 3);
    for (const auto& k : r1.kinetics.samples)
      CHECK(std::fabs(k.Q_total - total) / total <= 1e-12);
    CHECK(r1.kinetics.samples[2].Q_S > r1.kinetics.samples[0].Q_S);
  }

  SUBCASE("observer sees every macro step") {
    BaselineOptions opts;
    opts.stride = 2;
    std::vector<std::size_t> seen;
    opts.observer = [&](const FineState&, std::size_t step) { seen.push_back(step); };
    const auto r =
        fd_run_baseline(init, s.topo, s.params, s.grid.n_far_equiv, 3 * s.params.dt_macro, opts);
    CHECK(seen == std::vector<std::size_t>{1, 2, 3});
    CHECK(r.kinetics.samples.size() == 2);  // step 2 and the final step
  }
}

TEST_CASE("macro step counting") {
  CHECK(macro_steps_between(0.0, 0.0, 5e-4) == 0);
  CHECK(macro_steps_between(0.0, 0.1, 5e-4) == 200);
  CHECK(macro_steps_between(0.0, 0.10024, 5e-4) == 200);
  CHECK(macro_steps_between(1.0, 0.5, 5e-4) == 0);
}
