#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "fdirw/common.hpp"
#include "fdirw/geometry.hpp"
#include "fdirw/physics.hpp"
#include "support/oracles.hpp"

using namespace fdirw;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fdirw_test_geometry_" + name);
}

}  // namespace

TEST_CASE("solid sphere without pores") {
  const GridSpec spec{32, 32, 32, 1e-8};
  const auto g = generate_particle(spec, {10.0, 0, 0.0, 0.0, 1});
  CHECK(g.n_solid == oracle::sphere_count(10.0));
  CHECK(digitized_sphere_count(10.0) == oracle::sphere_count(10.0));
  CHECK(digitized_sphere_count(2.5) == oracle::sphere_count(2.5));
  CHECK(g.n_near == 0);
  CHECK(oracle::liquid_reaches_boundary(g));
}

TEST_CASE("generation is deterministic") {
  const GridSpec spec{40, 40, 40, 1e-8};
  const ParticleSpec part{12.0, 30, 2.0, 3.0, 99};
  const auto a = generate_particle(spec, part);
  const auto b = generate_particle(spec, part);
  CHECK(a.labels == b.labels);
  CHECK(geometry_hash(a) == geometry_hash(b));
  auto other = part;
  other.seed = 100;
  CHECK(generate_particle(spec, other).labels != a.labels);
}

TEST_CASE("porous reference particle") {
  const GridSpec spec{96, 96, 96, 1e-8};
  const auto g = generate_particle(spec, {25.0, 50, 2.0, 4.0, 2024});
  const double sphere = static_cast<double>(oracle::sphere_count(25.0));
  const double porosity = 1.0 - static_cast<double>(g.n_solid) / sphere;
  CHECK(porosity > 0.0);
  CHECK(porosity < 0.6);
  // frozen from the first run of this fixture
  CHECK(g.n_solid == 62631);
  CHECK(porosity == doctest::Approx(0.0403879).epsilon(1e-5));
  CHECK(oracle::liquid_reaches_boundary(g));
}

TEST_CASE("margin violations are rejected with the bound") {
  const GridSpec spec{30, 30, 30, 1e-8};
  try {
    generate_particle(spec, {11.0, 0, 0.0, 0.0, 1});
    FAIL("expected GeometryError");
  } catch (const GeometryError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("r_p + 5 = 16") != std::string::npos);
    CHECK(msg.find("have 14") != std::string::npos);
  }
  CHECK_NOTHROW(generate_particle(spec, {9.0, 0, 0.0, 0.0, 1}));
}

TEST_CASE("near/far partition") {
  const GridSpec spec{21, 21, 21, 1e-8};
  std::vector<Phase> labels(spec.voxel_count(), Phase::Far);
  labels[spec.index(10, 10, 10)] = Phase::Solid;
  labels[spec.index(0, 0, 0)] = Phase::Solid;  // far from the center, stays solid
  auto params = reference_params();
  params.V_far = 5e-22;
  const auto g =
      partition_near_far(PhaseGrid::from_labels(spec, labels, 3.0), params);
  CHECK(g.at(18, 10, 10) == Phase::LiquidNear);  // distance 8 = r_p + 5
  CHECK(g.at(10, 2, 10) == Phase::LiquidNear);
  CHECK(g.at(19, 10, 10) == Phase::Far);         // distance 9 = r_p + 6
  CHECK(g.at(10, 10, 10) == Phase::Solid);
  CHECK(g.at(0, 0, 0) == Phase::Solid);
  CHECK(g.n_near == oracle::sphere_count(8.0) - 1);
  CHECK(g.n_far_equiv == doctest::Approx(500.0));
}

TEST_CASE("partition without near-field liquid is an error") {
  const GridSpec spec{24, 24, 24, 1e-8};
  std::vector<Phase> labels(spec.voxel_count(), Phase::Far);
  for (int k = 0; k < 24; ++k)
    for (int j = 0; j < 24; ++j)
      for (int i = 0; i < 24; ++i) {
        const int dx = i - 12, dy = j - 12, dz = k - 12;
        if (dx * dx + dy * dy + dz * dz <= 64) labels[spec.index(i, j, k)] = Phase::Solid;
      }
  CHECK_THROWS_AS(partition_near_far(PhaseGrid::from_labels(spec, labels, 2.0), reference_params()),
                  GeometryError);
}

TEST_CASE("geometry file round trip") {
  const GridSpec spec{32, 28, 30, 1e-8};
  auto g = partition_near_far(generate_particle(spec, {8.0, 10, 1.5, 2.5, 5}), reference_params());
  const auto a = temp_path("a.bin"), b = temp_path("b.bin");
  write_geometry(a, g);
  const auto back = read_geometry(a);
  CHECK(back.spec == g.spec);
  CHECK(back.labels == g.labels);
  CHECK(back.r_p == g.r_p);
  CHECK(back.seed == g.seed);
  CHECK(geometry_hash(back) == geometry_hash(g));
  write_geometry(b, back);
  CHECK(slurp(a) == slurp(b));

  {
    std::ofstream out(b, std::ios::binary | std::ios::trunc);
    const auto bytes = slurp(a);
    out << bytes.substr(0, bytes.size() - 10);
  }
  CHECK_THROWS_AS(read_geometry(b), FormatError);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("every liquid voxel reaches the grid boundary") {
  const GridSpec spec{24, 24, 24, 1e-8};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = generate_particle(spec, {6.0, 4, 1.5, 2.5, seed});
    REQUIRE(oracle::liquid_reaches_boundary(g));
    CHECK(g.n_solid <= oracle::sphere_count(6.0));
  }
}
