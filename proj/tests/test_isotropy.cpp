#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "oracles.hpp"
#include "orthofold/isotropy.hpp"

using namespace orthofold;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec pair_point(const Vec& x, const Vec& y) {
  Vec z(6);
  z << x, y;
  return z;
}

Vec cp(std::initializer_list<double> interleaved) {
  Vec z(static_cast<Index>(interleaved.size()));
  Index i = 0;
  for (double v : interleaved) z(i++) = v;
  return z.normalized();
}

StabilizerData stab_at(const ActionModel& a, const Vec& x) {
  return stabilizer(a, x, 17, Tolerance{});
}

/// Number of tau = e^{i theta} on a fine grid with [z1 : tau z2 : tau^2 z3] = [z]:
/// |<z, tau.z>| = 1 for unit z. Computed from complex arithmetic directly.
int u1_fixing_count(const Vec& z) {
  const std::complex<double> z1(z(0), z(1)), z2(z(2), z(3)), z3(z(4), z(5));
  constexpr int kGrid = 3600;
  int count = 0;
  for (int k = 0; k < kGrid; ++k) {
    const std::complex<double> tau = std::polar(1.0, 2.0 * kPi * k / kGrid);
    const std::complex<double> inner =
        std::conj(z1) * z1 + std::conj(z2) * tau * z2 + std::conj(z3) * tau * tau * z3;
    if (std::abs(inner) > 1.0 - 1e-12) ++count;
  }
  return count;
}

std::vector<int> flat_sorted(const std::vector<std::vector<int>>& ws) {
  std::vector<int> out;
  for (const auto& w : ws) out.insert(out.end(), w.begin(), w.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("stabilizers on S2 x S2") {
  const ActionModel a = lookup("s2xs2-so3");
  const Vec e1 = Vec::Unit(3, 0), e2 = Vec::Unit(3, 1);
  const auto principal = stab_at(a, pair_point(e1, e2));
  CHECK(principal.lie_dim == 0);
  CHECK(principal.subgroup_class.label == SubgroupLabel::Trivial);
  const auto diag = stab_at(a, pair_point(e1, e1));
  CHECK(diag.lie_dim == 1);
  CHECK(diag.subgroup_class.label == SubgroupLabel::SO2);
  CHECK(stab_at(a, pair_point(e1, -e1)).subgroup_class.label == SubgroupLabel::SO2);
  // Rotations about e1: the first so(3) coordinate.
  CHECK(std::abs(std::abs(diag.lie_kernel(0, 0)) - 1.0) < 1e-9);
  // Witnesses fix the point; the identity comes first.
  REQUIRE(!diag.discrete_witnesses.empty());
  CHECK((diag.discrete_witnesses.front() - Mat::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("same_stabilizer separates equal from conjugate subgroups") {
  const ActionModel a = lookup("s2xs2-so3");
  const Tolerance tol;
  const Vec e1 = Vec::Unit(3, 0), e2 = Vec::Unit(3, 1);
  const auto s11 = stab_at(a, pair_point(e1, e1));
  CHECK(same_stabilizer(a.group, s11, stab_at(a, pair_point(-e1, -e1)), tol));
  CHECK(same_stabilizer(a.group, s11, stab_at(a, pair_point(e1, -e1)), tol));
  CHECK_FALSE(same_stabilizer(a.group, s11, stab_at(a, pair_point(e2, e2)), tol));
  CHECK(classes_conjugate(s11.subgroup_class, stab_at(a, pair_point(e2, e2)).subgroup_class));
}

TEST_CASE("stabilizers on RP2 and CP2") {
  const ActionModel rp2 = lookup("rp2-so2");
  // Half-turn about k sends e1 to -e1, the same projective point.
  const Mat half = rp2.group.exp(Vec::Constant(1, kPi));
  CHECK((rp2.act(half, Vec::Unit(3, 0)) + Vec::Unit(3, 0)).norm() < 1e-12);
  const auto z2 = stab_at(rp2, Vec::Unit(3, 0));
  CHECK(z2.subgroup_class.to_string() == "Z2");
  CHECK(stab_at(rp2, rp2.named_points.at("k")).subgroup_class.label == SubgroupLabel::SO2);

  const ActionModel u1 = lookup("cp2-u1");
  for (const char* p : {"P0", "P1", "P2"}) {
    const auto s = stab_at(u1, u1.named_points.at(p));
    CHECK(s.lie_dim == 1);
    CHECK(s.subgroup_class.label == SubgroupLabel::U1);
  }

  // Oracle: count fixing phases by direct complex arithmetic.
  const Vec p101 = cp({1, 0, 0, 0, 1, 0});
  const Vec p011 = cp({0, 0, 1, 0, 1, 0});
  CHECK(u1_fixing_count(p101) == 2);
  CHECK(u1_fixing_count(p011) == 1);
  CHECK(stab_at(u1, p101).subgroup_class.to_string() == "Z2");
  CHECK(stab_at(u1, p011).subgroup_class.label == SubgroupLabel::Trivial);
  std::mt19937_64 rng(4);
  for (const auto& z : sample_points(u1.manifold, 10, 6)) {
    const int expected = u1_fixing_count(z);
    CHECK(stab_at(u1, z).subgroup_class.order == expected);
  }

  const ActionModel so3 = lookup("cp2-so3");
  CHECK(stab_at(so3, cp({1, 0, 0, 0, 0, 0})).subgroup_class.label == SubgroupLabel::O2);
  CHECK(stab_at(so3, cp({1, 0, 0, 1, 0, 0})).subgroup_class.label == SubgroupLabel::SO2);
  const auto generic = stab_at(so3, sample_points(so3.manifold, 1, 3)[0]);
  CHECK(generic.subgroup_class.to_string() == "Z2");
}

TEST_CASE("stabilizer class is constant along orbits") {
  for (const auto& a : catalog()) {
    CAPTURE(a.name);
    const auto gs = sample_elements(a.group, 3, 8);
    std::vector<Vec> pts = sample_points(a.manifold, 3, 9);
    const auto special = a.special_points(0);
    pts.insert(pts.end(), special.begin(), special.begin() + std::min<std::size_t>(4, special.size()));
    for (const auto& x : pts) {
      const auto base = stab_at(a, a.manifold.normalize(x)).subgroup_class;
      for (const auto& g : gs)
        CHECK(classes_conjugate(base, stab_at(a, a.act(g, a.manifold.normalize(x))).subgroup_class));
    }
  }
}

TEST_CASE("normal slice dimensions") {
  const Tolerance tol;
  const ActionModel s = lookup("s2xs2-so3");
  CHECK(normal_slice(s, pair_point(Vec::Unit(3, 0), Vec::Unit(3, 1)), tol).slice_dim() == 1);
  const ActionModel u1 = lookup("cp2-u1");
  CHECK(normal_slice(u1, u1.named_points.at("P1"), tol).slice_dim() == 4);
  const ActionModel c2 = lookup("cn-tn(2)");
  CHECK(normal_slice(c2, parse_point(c2, "1+i, 2"), tol).slice_dim() == 2);
  CHECK(normal_slice(c2, parse_point(c2, "0, 2"), tol).slice_dim() == 3);
  for (const auto& a : catalog())
    for (const auto& x : sample_points(a.manifold, 10, 2)) {
      const NormalSlice n = normal_slice(a, x, tol);
      CHECK(n.slice_dim() + n.orbit_dim == a.manifold.intrinsic_dim());
      // Orthogonal to the orbit directions.
      CHECK((n.basis.transpose() * n.infinitesimal).norm() < 1e-9);
    }
}

TEST_CASE("slice weights at the U(1) fixed points") {
  const ActionModel a = lookup("cp2-u1");
  const Tolerance tol;
  std::vector<SliceRep> reps;
  for (const char* p : {"P0", "P1", "P2"}) {
    const Vec x = a.named_points.at(p);
    reps.push_back(slice_representation(a, x, stab_at(a, x), 1, tol));
  }
  for (const auto& r : reps) {
    CHECK(r.kind == RepKind::TorusWeights);
    CHECK(r.slice_dim == 4);
    CHECK(r.complex_structure.has_value());
  }
  CHECK(flat_sorted(reps[0].weights) == std::vector<int>{1, 2});
  CHECK(flat_sorted(reps[1].weights) == std::vector<int>{-1, 1});
  CHECK(flat_sorted(reps[2].weights) == std::vector<int>{-2, -1});

  std::string reason;
  CHECK(reps_equivalent(reps[0], reps[2], tol));
  CHECK(reps_equivalent(reps[2], reps[0], tol));
  CHECK_FALSE(reps_equivalent(reps[0], reps[1], tol, &reason));
  CHECK_FALSE(reason.empty());
  for (const auto& r : reps) CHECK(reps_equivalent(r, r, tol));

  // Different stabilizer classes are never equivalent.
  const Vec z = sample_points(a.manifold, 1, 0)[0];
  const SliceRep trivial = slice_representation(a, z, stab_at(a, z), 1, tol);
  reason.clear();
  CHECK_FALSE(reps_equivalent(reps[0], trivial, tol, &reason));
  CHECK(reason.find("different groups") != std::string::npos);
}

TEST_CASE("trivial and finite slice representations") {
  const Tolerance tol;
  const ActionModel s = lookup("s2xs2-so3");
  const Vec x = pair_point(Vec::Unit(3, 0), Vec::Unit(3, 1));
  const SliceRep r = slice_representation(s, x, stab_at(s, x), 1, tol);
  CHECK(r.kind == RepKind::FiniteCharacters);
  REQUIRE(r.traces.size() == 1);
  CHECK(r.traces[0] == doctest::Approx(1.0));

  const ActionModel zn = lookup("s2-zn(5)");
  const Vec north = zn.named_points.at("north");
  const SliceRep rz = slice_representation(zn, north, stab_at(zn, north), 1, tol);
  CHECK(rz.kind == RepKind::FiniteCharacters);
  REQUIRE(rz.traces.size() == 5);
  std::vector<double> t = rz.traces;
  std::sort(t.begin(), t.end());
  // Oracle: 2 cos(2 pi j / 5) for j = 0..4.
  std::vector<double> expect;
  for (int j = 0; j < 5; ++j) expect.push_back(2.0 * std::cos(2.0 * kPi * j / 5));
  std::sort(expect.begin(), expect.end());
  for (std::size_t i = 0; i < 5; ++i) CHECK(t[i] == doctest::Approx(expect[i]));
}

TEST_CASE("torus weight counts match the slice dimension") {
  const Tolerance tol;
  for (const auto& a : catalog())
    for (const auto& x : a.special_points(0)) {
      const Vec p = a.manifold.normalize(x);
      const StabilizerData st = stab_at(a, p);
      const SliceRep r = slice_representation(a, p, st, 3, tol);
      if (r.kind != RepKind::TorusWeights) continue;
      Index dims = 0;
      for (const auto& w : r.weights)
        dims += std::all_of(w.begin(), w.end(), [](int v) { return v == 0; }) ? 1 : 2;
      CHECK(dims == r.slice_dim);
    }
}

TEST_CASE("weight extraction recovers planted weights") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> entry(-3, 3);
  const Tolerance tol;
  int trials = 0;
  while (trials < 100) {
    const int rank = 1 + static_cast<int>(rng() % 2);
    const Index planes = 1 + static_cast<Index>(rng() % 3);
    const bool complex_mode = (rng() % 2) == 0;
    const Index zeros = complex_mode ? 2 * static_cast<Index>(rng() % 2) : static_cast<Index>(rng() % 2);
    const Index dim = 2 * planes + zeros;
    std::vector<std::vector<int>> planted;
    for (Index k = 0; k < planes; ++k) {
      std::vector<int> w(static_cast<std::size_t>(rank));
      do {
        for (auto& v : w) v = entry(rng);
      } while (std::all_of(w.begin(), w.end(), [](int v) { return v == 0; }));
      planted.push_back(w);
    }
    for (Index z = 0; z < zeros; ++z) planted.emplace_back(static_cast<std::size_t>(rank), 0);

    const Mat q = oracle::random_orthogonal(rng, dim);
    std::vector<Mat> gens;
    for (int j = 0; j < rank; ++j) {
      Mat m = Mat::Zero(dim, dim);
      for (Index k = 0; k < planes; ++k)
        m += oracle::plane_generator(dim, k, planted[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
      gens.push_back(q * m * q.transpose());
    }
    std::optional<Mat> j;
    if (complex_mode) j = q * complex_structure(dim / 2) * q.transpose();
    CAPTURE(trials);
    const auto got = extract_torus_weights(gens, j, tol);
    auto expect = planted;
    auto found = got;
    if (complex_mode) {
      std::sort(expect.begin(), expect.end());
      std::sort(found.begin(), found.end());
      CHECK(found == expect);
    } else {
      CHECK(sign_normalized(found) == sign_normalized(expect));
    }
    ++trials;
  }
}

TEST_CASE("extraction rejects non-integral rotation speeds") {
  Mat m = oracle::plane_generator(4, 0, 1) + 0.5 * oracle::plane_generator(4, 1, 1);
  CHECK_THROWS_AS(extract_torus_weights({m}, std::nullopt, Tolerance{}), ExtractionError);
}

TEST_CASE("isostabilizer local dimensions") {
  const Tolerance tol;
  auto local_dim = [&](const ActionModel& a, const Vec& x) {
    const StabilizerData s = stab_at(a, x);
    return isostabilizer_local_dim(a.group, s, slice_representation(a, x, s, 1, tol), tol);
  };
  const ActionModel s = lookup("s2xs2-so3");
  // Points with stabilizer exactly SO(2, e1): (+-e1, +-e1), a finite set.
  CHECK(local_dim(s, pair_point(Vec::Unit(3, 0), Vec::Unit(3, 0))) == 0);
  CHECK(local_dim(s, pair_point(Vec::Unit(3, 0), Vec::Unit(3, 1))) == 4);
  const ActionModel u1 = lookup("cp2-u1");
  CHECK(local_dim(u1, u1.named_points.at("P0")) == 0);
  // {z2 = 0} minus two fixed points: a punctured CP1.
  CHECK(local_dim(u1, cp({0.6, 0, 0, 0, 0, 0.8})) == 2);
  const ActionModel c2 = lookup("cn-tn(2)");
  CHECK(local_dim(c2, parse_point(c2, "0, 1")) == 2);
  CHECK(local_dim(c2, parse_point(c2, "origin")) == 0);
  const ActionModel rp2 = lookup("rp2-so2");
  // Exceptional locus <x, k> = 0 is a circle.
  CHECK(local_dim(rp2, Vec::Unit(3, 0)) == 1);
}
