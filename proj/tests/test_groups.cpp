#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "orthofold/groups.hpp"

using namespace orthofold;

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat rot2(double t) {
  Mat r(2, 2);
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

Mat rot_z(double t) {
  Mat r = Mat::Identity(3, 3);
  r.topLeftCorner(2, 2) = rot2(t);
  return r;
}

/// Half-turn about the x axis, which inverts rotations about z.
Mat flip_x() {
  Mat r = Mat::Identity(3, 3);
  r(1, 1) = r(2, 2) = -1.0;
  return r;
}

SubgroupClass finite_class(const GroupDescriptor& g, const std::vector<Mat>& elems) {
  return classify_subgroup(g, Mat(g.dim(), 0), elems, Tolerance{});
}

}  // namespace

TEST_CASE("finite group sampling returns the element list") {
  const auto z2 = GroupDescriptor::finite({Mat::Identity(3, 3), -Mat::Identity(3, 3)});
  const auto s = sample_elements(z2, 50, 1);
  CHECK(s.size() == 2);
  // Closed under inverse.
  for (const auto& a : s)
    CHECK(std::any_of(s.begin(), s.end(),
                      [&](const Mat& b) { return (a.transpose() - b).norm() < 1e-12; }));
  CHECK_THROWS_AS(GroupDescriptor::finite({-Mat::Identity(2, 2)}), InputError);
  CHECK_THROWS_AS(GroupDescriptor::finite({Mat::Identity(2, 2), rot2(1.0)}), InputError);
}

TEST_CASE("torus samples are rotations") {
  const auto t = GroupDescriptor::torus(1);
  const auto s = sample_elements(t, 8, 3);
  CHECK(s.size() == 8);
  for (const auto& g : s) {
    CHECK((g.transpose() * g - Mat::Identity(2, 2)).norm() < 1e-12);
    CHECK(g.determinant() == doctest::Approx(1.0));
  }
}

TEST_CASE("SO3 samples are orthonormal and deterministic") {
  const auto g = GroupDescriptor::so3();
  const auto s = sample_elements(g, 100, 42);
  const auto again = sample_elements(g, 100, 42);
  REQUIRE(s.size() == 100);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK((s[i].transpose() * s[i] - Mat::Identity(3, 3)).norm() < 1e-12);
    CHECK(s[i].determinant() == doctest::Approx(1.0));
    CHECK(s[i] == again[i]);
  }
  // Haar symmetry: the mean of the samples is near zero.
  std::vector<Mat> many = sample_elements(g, 4000, 7);
  Mat mean = Mat::Zero(3, 3);
  for (const auto& m : many) mean += m / static_cast<double>(many.size());
  CHECK(mean.norm() < 0.1);
}

TEST_CASE("exponential closes at 2 pi") {
  for (const auto& g : {GroupDescriptor::so2(), GroupDescriptor::u1(), GroupDescriptor::torus(3),
                        GroupDescriptor::so3()}) {
    for (Index i = 0; i < g.dim(); ++i) {
      Vec c = Vec::Zero(g.dim());
      c(i) = 2.0 * kPi;
      CHECK((g.exp(c) - Mat::Identity(g.rep_dim(), g.rep_dim())).norm() < 1e-9);
    }
  }
  const auto so2 = GroupDescriptor::so2();
  CHECK((so2.exp(Vec::Constant(1, 0.3)) - rot2(0.3)).norm() < 1e-12);
}

TEST_CASE("lie coordinates and adjoint") {
  const auto g = GroupDescriptor::so3();
  Vec c(3);
  c << 0.5, -1.0, 2.0;
  const auto [back, residual] = g.lie_coordinates(g.lie_element(c));
  CHECK((back - c).norm() < 1e-12);
  CHECK(residual < 1e-12);
  // Ad of a half-turn about x flips the y and z components.
  const Vec ad = g.adjoint(flip_x(), c);
  CHECK(ad(0) == doctest::Approx(0.5));
  CHECK(ad(1) == doctest::Approx(1.0));
  CHECK(ad(2) == doctest::Approx(-2.0));
  const auto [_, off] = g.lie_coordinates(Mat::Identity(3, 3));
  CHECK(off > 0.1);
}

TEST_CASE("canonical generators are primitive on integral lattices") {
  const auto t = GroupDescriptor::torus(2);
  Mat k(2, 1);
  k << 1.0, 2.0;
  const Mat gens = canonical_generators(t, k / k.norm(), Tolerance{});
  REQUIRE(gens.cols() == 1);
  CHECK(gens(0, 0) == doctest::Approx(1.0));
  CHECK(gens(1, 0) == doctest::Approx(2.0));
  CHECK((t.exp(2.0 * kPi * gens.col(0)) - Mat::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("classify_subgroup labels") {
  const Tolerance tol;
  const auto so3 = GroupDescriptor::so3();
  Mat z(3, 1);
  z << 0, 0, 1;
  // Rotations about an axis.
  CHECK(classify_subgroup(so3, z, {}, tol).label == SubgroupLabel::SO2);
  // Adding the half-turn normalising the axis gives O(2).
  const auto o2 = classify_subgroup(so3, z, {flip_x()}, tol);
  CHECK(o2.label == SubgroupLabel::O2);
  CHECK(o2.order == 2);
  // Whole algebra.
  CHECK(classify_subgroup(so3, Mat::Identity(3, 3), {}, tol).label == SubgroupLabel::FullGroup);
  // Discrete cyclic subgroups.
  CHECK(finite_class(so3, {}).label == SubgroupLabel::Trivial);
  const auto z3 = finite_class(so3, {rot_z(2 * kPi / 3), rot_z(4 * kPi / 3)});
  CHECK(z3.label == SubgroupLabel::Zn);
  CHECK(z3.order == 3);
  CHECK(z3.to_string() == "Z3");
  // Klein four-group is finite but not cyclic.
  Mat fy = Mat::Identity(3, 3);
  fy(0, 0) = fy(2, 2) = -1.0;
  CHECK(finite_class(so3, {flip_x(), fy, flip_x() * fy}).label == SubgroupLabel::Other);

  const auto u1 = GroupDescriptor::u1();
  CHECK(classify_subgroup(u1, Mat::Identity(1, 1), {}, tol).label == SubgroupLabel::U1);
  CHECK(finite_class(u1, {-Mat::Identity(2, 2)}).to_string() == "Z2");

  // A witness that does not normalise the algebra is rejected.
  const Mat tilt = Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitX()).toRotationMatrix();
  CHECK_THROWS_AS(classify_subgroup(so3, z, {tilt}, tol), ClassificationError);
  CHECK_THROWS_AS(classify_subgroup(so3, Mat::Identity(2, 1), {}, tol), ClassificationError);
}

TEST_CASE("classify_subgroup is a class function") {
  const Tolerance tol;
  const auto so3 = GroupDescriptor::so3();
  Mat z(3, 1);
  z << 0, 0, 1;
  const auto base = classify_subgroup(so3, z, {flip_x()}, tol);
  for (const auto& g : sample_elements(so3, 20, 9)) {
    const auto [coords, res] = so3.lie_coordinates(g * so3.lie_element(z.col(0)) * g.transpose());
    CHECK(res < 1e-10);
    const auto conj = classify_subgroup(so3, coords, {g * flip_x() * g.transpose()}, tol);
    CHECK(classes_conjugate(base, conj));
    CHECK(conj.label == SubgroupLabel::O2);
  }
}

TEST_CASE("classes_conjugate is an equivalence on the label vocabulary") {
  const Tolerance tol;
  const auto so3 = GroupDescriptor::so3();
  Mat z(3, 1);
  z << 0, 0, 1;
  const std::vector<SubgroupClass> vocab = {
      finite_class(so3, {}),
      finite_class(so3, {flip_x()}),
      finite_class(so3, {rot_z(2 * kPi / 3), rot_z(4 * kPi / 3)}),
      classify_subgroup(so3, z, {}, tol),
      classify_subgroup(so3, z, {flip_x()}, tol),
      classify_subgroup(so3, Mat::Identity(3, 3), {}, tol),
  };
  for (const auto& a : vocab) {
    CHECK(classes_conjugate(a, a));
    for (const auto& b : vocab) {
      CHECK(classes_conjugate(a, b) == classes_conjugate(b, a));
      for (const auto& c : vocab)
        if (classes_conjugate(a, b) && classes_conjugate(b, c)) CHECK(classes_conjugate(a, c));
    }
  }
  CHECK_FALSE(classes_conjugate(vocab[3], vocab[4]));  // SO2 vs O2
  CHECK_FALSE(classes_conjugate(vocab[1], vocab[0]));  // Z2 vs Trivial
  CHECK(catalog_complete(vocab[3], vocab[4]));
}

TEST_CASE("generated groups and component representatives") {
  const Mat gen = oracle::plane_generator(4, 0, 1);
  Mat flip = Mat::Identity(4, 4);
  flip(2, 2) = flip(3, 3) = -1.0;
  const auto h = GroupDescriptor::generated({gen}, {flip});
  CHECK(h.kind() == GroupKind::Generated);
  CHECK(h.dim() == 1);
  CHECK(h.elements().size() == 2);
  CHECK_FALSE(h.connected());
  // A rotation in the first plane lies in the identity component.
  Mat in_identity = Mat::Identity(4, 4);
  in_identity.topLeftCorner(2, 2) = rot2(1.2);
  const auto reps = component_representatives(h, {Mat::Identity(4, 4), in_identity, flip},
                                              Mat::Identity(1, 1), 1e-8);
  CHECK(reps.size() == 2);
}
