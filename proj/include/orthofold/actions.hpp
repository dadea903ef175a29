#pragma once

// Manifold models with explicit representatives, and the catalog of linear
// compact group actions on them.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orthofold/groups.hpp"
#include "orthofold/numerics.hpp"

namespace orthofold {

enum class ManifoldKind { Sphere, ProductSpheres, RealProjective, ComplexProjective, Euclidean };

/// A manifold represented inside a coordinate space. Projective points are
/// carried as unit representatives: x ~ -x for RP(n), z ~ e^{i phi} z for
/// CP(n) with interleaved (re, im) coordinates.
class ManifoldModel {
 public:
  static ManifoldModel sphere(int n);
  static ManifoldModel product_spheres(int n1, int n2);
  static ManifoldModel real_projective(int n);
  static ManifoldModel complex_projective(int n);
  static ManifoldModel euclidean(int d);

  ManifoldKind kind() const { return kind_; }
  Index ambient_dim() const;
  Index intrinsic_dim() const;
  /// Coordinates taken by the first sphere of a product.
  Index first_factor_ambient() const { return n1_ + 1; }
  std::string name() const;
  /// Complex structure on the ambient space, present for CP(n).
  std::optional<Mat> complex_structure() const;

  /// Throws InputError unless x is a valid representative.
  void validate(const Vec& x) const;
  /// Rescales raw coordinates onto the representative set.
  Vec normalize(const Vec& x) const;
  /// The representative of [x] closest to y.
  Vec align(const Vec& x, const Vec& y) const;
  /// Ambient chordal distance minimised over representatives.
  double distance(const Vec& x, const Vec& y) const;

 private:
  ManifoldKind kind_ = ManifoldKind::Euclidean;
  int n1_ = 0;
  int n2_ = 0;
};

struct TangentFrame {
  Vec point;
  Mat basis;  // ambient vectors as orthonormal columns
};

/// A map realising the orbit space as an interval.
struct IntervalMap {
  double lo = 0.0;
  double hi = 1.0;
  std::function<double(const Vec&)> value;
};

/// A compact group acting linearly on the ambient coordinates of a model.
struct ActionModel {
  std::string name;
  GroupDescriptor group;
  ManifoldModel manifold;
  /// Group element (defining representation) to ambient matrix.
  std::function<Mat(const Mat&)> rep;
  /// Derivative of rep along each Lie basis element.
  std::vector<Mat> ambient_generators;
  /// Points on thin strata (fixed points, diagonals, coordinate loci).
  std::function<std::vector<Vec>(std::uint64_t)> special_points;
  std::map<std::string, Vec> named_points;
  std::optional<IntervalMap> interval;
  /// Point specs list complex entries (CP models and C^n).
  bool complex_coordinates = false;
  std::string note;

  Vec act(const Mat& g, const Vec& x) const { return rep(g) * x; }
};

/// The named catalog actions in their default parameterisation.
std::vector<ActionModel> catalog();
/// Stable identifiers of catalog(); parameterised ids accept other n.
std::vector<std::string> catalog_ids();
/// Looks up "s2xs2-so3", "rp2-so2", "cp2-so3", "cp2-u1", "s2-zn(n)",
/// "cn-tn(n)" and "trivial(d)". Throws UnknownActionError.
ActionModel lookup(const std::string& id);

std::vector<Vec> sample_points(const ManifoldModel& m, std::size_t count, std::uint64_t seed);

TangentFrame tangent_frame(const ManifoldModel& m, const Vec& x);

/// Columns are the frame coordinates of xi_i . x for the Lie basis xi_i.
Mat infinitesimal_action(const ActionModel& a, const Vec& x);

/// Linear map induced by a stabilizing element on the tangent frame at x,
/// after aligning the representative g.x back onto x.
Mat differential_of_element(const ActionModel& a, const Mat& g, const Vec& x,
                            const Tolerance& tol = {});

/// Same, reusing an already computed frame.
Mat differential_of_element(const ActionModel& a, const Mat& g, const TangentFrame& frame,
                            const Tolerance& tol = {});

/// Parses a comma-separated point ("a+bi" entries for complex models,
/// named points such as "k" or "P1") into a valid representative.
Vec parse_point(const ActionModel& a, const std::string& spec);

}  // namespace orthofold
