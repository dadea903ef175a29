#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "orthofold/strata.hpp"

using namespace orthofold;

namespace {

constexpr std::size_t kSamples = 200;

Vec pair_point(const Vec& x, const Vec& y) {
  Vec z(6);
  z << x, y;
  return z;
}

bool contains(const SampleCloud& c, const ManifoldModel& m, const Vec& x) {
  return std::any_of(c.records.begin(), c.records.end(),
                     [&](const PointRecord& r) { return m.distance(r.point, x) < 1e-12; });
}

std::multiset<std::string> labels(const PartitionOfM& p) {
  std::multiset<std::string> out;
  for (const auto& l : p.labels) out.insert(l.subgroup.to_string());
  return out;
}

/// Orbit dimension from exact elimination of the ambient generator columns
/// at an integer point.
int exact_orbit_dim(const ActionModel& a, const Vec& x) {
  oracle::IntMatrix m(static_cast<std::size_t>(x.size()),
                      std::vector<std::int64_t>(a.ambient_generators.size()));
  for (std::size_t j = 0; j < a.ambient_generators.size(); ++j) {
    const Vec col = a.ambient_generators[j] * x;
    for (Index i = 0; i < x.size(); ++i) {
      REQUIRE(std::abs(col(i) - std::round(col(i))) < 1e-12);
      m[static_cast<std::size_t>(i)][j] = std::llround(col(i));
    }
  }
  return oracle::bareiss_rank(m);
}

}  // namespace

TEST_CASE("clouds contain the injected special points") {
  const Tolerance tol;
  const ActionModel u1 = lookup("cp2-u1");
  const SampleCloud c = build_cloud(u1, 10, 0, tol);
  for (const char* p : {"P0", "P1", "P2"}) CHECK(contains(c, u1.manifold, u1.named_points.at(p)));
  CHECK(c.uniform_count == 10);
  CHECK(c.size() > 10);
  CHECK(std::none_of(c.records.begin(), c.records.begin() + 10,
                     [](const PointRecord& r) { return r.injected; }));

  const ActionModel s = lookup("s2xs2-so3");
  const SampleCloud cs = build_cloud(s, 5, 0, tol);
  bool diag = false, anti = false;
  for (const auto& r : cs.records) {
    diag = diag || (r.point.head(3) - r.point.tail(3)).norm() < 1e-12;
    anti = anti || (r.point.head(3) + r.point.tail(3)).norm() < 1e-12;
  }
  CHECK(diag);
  CHECK(anti);

  CHECK(build_cloud(lookup("trivial(3)"), 1, 0, tol).size() == 1);
  CHECK_THROWS_AS(build_cloud(s, 0, 0, tol), InputError);
}

TEST_CASE("quotient dimension against exact elimination") {
  const Tolerance tol;
  const ActionModel s = lookup("s2xs2-so3");
  const Vec e1 = Vec::Unit(3, 0), e2 = Vec::Unit(3, 1);
  CHECK(exact_orbit_dim(s, pair_point(e1, e2)) == 3);
  CHECK(quotient_dimension(s, pair_point(e1, e2), tol) == 4 - 3);
  CHECK(exact_orbit_dim(s, pair_point(e1, e1)) == 2);
  CHECK(quotient_dimension(s, pair_point(e1, e1), tol) == 4 - 2);
  const ActionModel rp2 = lookup("rp2-so2");
  CHECK(quotient_dimension(rp2, rp2.named_points.at("k"), tol) == 2);
  const ActionModel c3 = lookup("cn-tn(3)");
  for (const char* spec : {"1,1,1", "0,1,1", "0,0,1", "0,0,0", "1,0,1"}) {
    const Vec z = parse_point(c3, spec);
    CHECK(quotient_dimension(c3, z, tol) == 6 - exact_orbit_dim(c3, z));
  }
}

TEST_CASE("dimension identity and principal bounds on every catalog cloud") {
  const Tolerance tol;
  for (const auto& a : catalog()) {
    CAPTURE(a.name);
    const SampleCloud c = build_cloud(a, kSamples, 1, tol);
    for (const auto& r : c.records) {
      CHECK(r.quotient_dim + r.orbit_dim == a.manifold.intrinsic_dim());
      CHECK(r.slice.slice_dim == r.quotient_dim);
    }
    const PartitionOfM ot = orbit_type_partition(c);
    const PrincipalData pr = principal_dimension(c, ot);
    CHECK(pr.attained_on_principal);
    for (const auto& r : c.records) CHECK(r.quotient_dim >= pr.d_pr);
    for (std::size_t i : pr.exceptional) {
      CHECK_FALSE(classes_conjugate(c.records[i].stab.subgroup_class, pr.principal_class));
      CHECK(c.records[i].orbit_dim == a.manifold.intrinsic_dim() - pr.d_pr);
    }

    const PartitionOfM iso = isostabilizer_decomposition(a, c, tol);
    CHECK_NOTHROW(iso.block_of(c.size()));
    CHECK_NOTHROW(ot.block_of(c.size()));
    // Iso refines orbit type.
    const auto ot_of = ot.block_of(c.size());
    for (const auto& blk : iso.blocks)
      for (std::size_t i : blk) CHECK(ot_of[i] == ot_of[blk.front()]);
    // Singularity labels are constant on iso blocks.
    for (const auto& blk : iso.blocks) {
      const auto first = classify_singularity(c.records[blk.front()], pr.d_pr, pr.principal_class);
      for (std::size_t i : blk)
        CHECK(classify_singularity(c.records[i], pr.d_pr, pr.principal_class) == first);
    }
  }
}

TEST_CASE("orbit-type partitions") {
  const Tolerance tol;
  const SampleCloud so3 = build_cloud(lookup("cp2-so3"), kSamples, 0, tol);
  CHECK(labels(orbit_type_partition(so3)) == std::multiset<std::string>{"O2", "SO2", "Z2"});
  const SampleCloud u1 = build_cloud(lookup("cp2-u1"), kSamples, 0, tol);
  CHECK(labels(orbit_type_partition(u1)) == std::multiset<std::string>{"Trivial", "U1", "Z2"});
  CHECK(orbit_type_partition(build_cloud(lookup("trivial(2)"), 20, 0, tol)).blocks.size() == 1);
}

TEST_CASE("isostabilizer decomposition") {
  const Tolerance tol;
  const ActionModel u1 = lookup("cp2-u1");
  const SampleCloud c = build_cloud(u1, kSamples, 0, tol);
  const PartitionOfM iso = isostabilizer_decomposition(u1, c, tol);
  std::vector<std::size_t> fixed_blocks;
  for (std::size_t b = 0; b < iso.blocks.size(); ++b)
    if (iso.labels[b].subgroup.label == SubgroupLabel::U1) fixed_blocks.push_back(b);
  REQUIRE(fixed_blocks.size() == 3);
  for (std::size_t b : fixed_blocks) CHECK(iso.blocks[b].size() == 1);
  // The principal points form one connected block.
  const auto block = iso.block_of(c.size());
  for (std::size_t i = 1; i < kSamples; ++i) CHECK(block[i] == block[0]);

  const SampleCloud one = build_cloud(lookup("trivial(2)"), 1, 0, tol);
  CHECK(isostabilizer_decomposition(lookup("trivial(2)"), one, tol).blocks.size() == 1);
}

TEST_CASE("the singular locus of S2 x S2 has two components") {
  const Tolerance tol;
  const ActionModel a = lookup("s2xs2-so3");
  const SampleCloud c = build_cloud(a, kSamples, 0, tol);
  const PartitionOfM ot = orbit_type_partition(c);
  std::set<long> values;
  for (std::size_t b = 0; b < ot.blocks.size(); ++b) {
    if (ot.labels[b].subgroup.label != SubgroupLabel::SO2) continue;
    for (std::size_t i : ot.blocks[b]) values.insert(std::lround(a.interval->value(c.records[i].point)));
  }
  // Diagonal (pi = 1) and antidiagonal (pi = -1).
  CHECK(values == std::set<long>{-1, 1});
}

TEST_CASE("principal dimension and exceptional orbits") {
  const Tolerance tol;
  const SampleCloud s = build_cloud(lookup("s2xs2-so3"), kSamples, 0, tol);
  CHECK(principal_dimension(s, orbit_type_partition(s)).d_pr == 1);

  const ActionModel rp2 = lookup("rp2-so2");
  const SampleCloud r = build_cloud(rp2, kSamples, 0, tol);
  const PrincipalData pr = principal_dimension(r, orbit_type_partition(r));
  CHECK(pr.d_pr == 1);
  REQUIRE_FALSE(pr.exceptional.empty());
  for (std::size_t i : pr.exceptional) CHECK(std::abs(r.records[i].point(2)) < 1e-12);

  const SampleCloud t = build_cloud(lookup("trivial(3)"), 10, 0, tol);
  CHECK(principal_dimension(t, orbit_type_partition(t)).d_pr == 3);
}

TEST_CASE("singularity labels on RP2") {
  const Tolerance tol;
  const ActionModel rp2 = lookup("rp2-so2");
  const SampleCloud c = build_cloud(rp2, kSamples, 0, tol);
  const PrincipalData pr = principal_dimension(c, orbit_type_partition(c));
  const StabilizerSearch search(rp2, 5);
  auto label = [&](const Vec& x) {
    return classify_singularity(analyze_point(rp2, x, search, 0, tol), pr.d_pr, pr.principal_class);
  };
  CHECK(label(Vec::Unit(3, 0)) == SingularityLabel{SingularityKind::OrbifoldPoint, 2});
  CHECK(label(Vec::Unit(3, 0)).to_string() == "OrbifoldPoint(2)");
  CHECK(label(rp2.named_points.at("k")).kind == SingularityKind::OrthofoldPoint);
  CHECK(label(Vec(Eigen::Vector3d(0.6, 0.0, 0.8))).kind == SingularityKind::ManifoldPoint);
}

TEST_CASE("toric depth") {
  const double eps = 1e-9;
  CHECK(toric_depth(Vec(Eigen::Vector2d(0, 1)), eps).depth == 1);
  CHECK(toric_depth(Vec(Eigen::Vector2d(0, 1)), eps).dim == 3);
  CHECK(toric_depth(Vec(Eigen::Vector2d(2, 1)), eps).dim == 2);
  CHECK(toric_depth(Vec(Eigen::Vector2d(0, 0)), eps).dim == 4);
  CHECK_THROWS_AS(toric_depth(Vec(Eigen::Vector2d(-1, 1)), eps), InputError);

  const Tolerance tol;
  const ActionModel c2 = lookup("cn-tn(2)");
  CHECK(toric_consistency(c2, parse_point(c2, "1,1"), tol));
  CHECK(quotient_dimension(c2, parse_point(c2, "1,1"), tol) == 2);
  CHECK(quotient_dimension(c2, parse_point(c2, "0,1"), tol) == 3);
  CHECK(quotient_dimension(c2, parse_point(c2, "origin"), tol) == 4);
  CHECK_THROWS_AS(toric_consistency(lookup("rp2-so2"), Vec::Unit(3, 0), tol), InputError);
}

TEST_CASE("partition validation") {
  PartitionOfM p;
  p.blocks = {{0, 1}, {1, 2}};
  CHECK_THROWS_AS(p.block_of(3), InputError);
  p.blocks = {{0}, {2}};
  CHECK_THROWS_AS(p.block_of(3), InputError);
  p.blocks = {{0, 5}};
  CHECK_THROWS_AS(p.block_of(2), InputError);
}

TEST_CASE("isostabilizer blocks match the connected components of each M_K") {
  const Tolerance tol;
  // Expected counts: rp2 {k}, equator, the rest; s2-zn north, south, the rest;
  // cp2-u1 three fixed points, {z2 = 0} minus two of them, the rest;
  // cn-tn(2) origin, two punctured axes, the rest.
  const std::vector<std::pair<std::string, std::size_t>> expected{
      {"rp2-so2", 3}, {"s2-zn(5)", 3}, {"cp2-u1", 5}, {"cn-tn(2)", 4}};
  for (const auto& [id, count] : expected)
    for (std::uint64_t seed : {0, 3}) {
      CAPTURE(id);
      CAPTURE(seed);
      const ActionModel a = lookup(id);
      const SampleCloud c = build_cloud(a, 500, seed, tol);
      CHECK(isostabilizer_decomposition(a, c, tol).blocks.size() == count);
    }
}
