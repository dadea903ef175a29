#pragma once

// Compact matrix groups that occur in the catalog actions, together with
// Haar-type samplers and a subgroup classifier used for conjugacy decisions.

#include <cstdint>
#include <string>
#include <vector>

#include "orthofold/numerics.hpp"

namespace orthofold {

enum class GroupKind { Finite, Torus, SO2, O2, SO3, U1, Product, Generated };

std::string to_string(GroupKind kind);

/// A compact matrix group in its defining (orthogonal) representation.
///
/// Elements are plain rep_dim x rep_dim matrices. The Lie algebra is spanned
/// by antisymmetric generators; for tori and the Generated kind each
/// generator has period 2*pi under the exponential.
class GroupDescriptor {
 public:
  static GroupDescriptor finite(std::vector<Mat> elements, double eps = 1e-9);
  static GroupDescriptor torus(int rank);
  static GroupDescriptor so2();
  static GroupDescriptor o2();
  static GroupDescriptor so3();
  static GroupDescriptor u1();
  static GroupDescriptor product(const std::vector<GroupDescriptor>& factors);
  /// Closed group generated by commuting period-2*pi generators and a finite
  /// list of component representatives (identity included or not).
  static GroupDescriptor generated(std::vector<Mat> generators, std::vector<Mat> components);

  GroupKind kind() const { return kind_; }
  Index rep_dim() const { return rep_dim_; }
  Index dim() const { return static_cast<Index>(lie_basis_.size()); }
  const std::vector<Mat>& lie_basis() const { return lie_basis_; }
  /// Full element list (Finite) or component representatives (O2, Generated, Product).
  const std::vector<Mat>& elements() const { return elements_; }
  const std::vector<GroupDescriptor>& factors() const { return factors_; }
  bool unitary() const { return kind_ == GroupKind::U1 || kind_ == GroupKind::Torus; }
  bool connected() const;
  bool abelian() const;
  /// Generators integrate to closed circles of period 2*pi on an integer lattice.
  bool integral_lattice() const;
  std::string name() const;

  /// exp(sum_i coeffs_i * lie_basis_i).
  Mat exp(const Vec& coeffs) const;
  /// Matrix in the Lie algebra with the given coordinates.
  Mat lie_element(const Vec& coeffs) const;
  /// Coordinates of an algebra element; the second member is the residual
  /// norm of the projection (nonzero when xi is outside the algebra).
  std::pair<Vec, double> lie_coordinates(const Mat& xi) const;
  /// Coordinates of w xi w^-1 for xi given by coordinates.
  Vec adjoint(const Mat& w, const Vec& coeffs) const;

 private:
  GroupDescriptor() = default;
  void finish();

  GroupKind kind_ = GroupKind::Finite;
  Index rep_dim_ = 0;
  std::vector<Mat> lie_basis_;
  std::vector<Mat> elements_;
  std::vector<GroupDescriptor> factors_;
  Mat basis_pinv_;  // maps vectorised algebra elements to coordinates
  Mat basis_flat_;
};

/// Elements drawn from the Haar measure (uniform angles for tori). For
/// finite groups the full element list is returned and `count` is ignored.
std::vector<Mat> sample_elements(const GroupDescriptor& g, std::size_t count,
                                 std::uint64_t seed);

/// Canonical basis (columns of coordinates) for the subalgebra spanned by
/// `kernel`: row-echelon form, then scaled to primitive integer vectors on
/// integral lattices or to unit length otherwise. The exponential of each
/// returned generator closes up at 2*pi on the catalog groups.
Mat canonical_generators(const GroupDescriptor& g, const Mat& kernel, const Tolerance& tol);

/// Distance from h to the identity component exp(span(generators)) of a
/// subgroup; generators are canonical coordinates as above.
double identity_component_distance(const GroupDescriptor& g, const Mat& h,
                                   const Mat& generators);

enum class SubgroupLabel { Trivial, Zn, SO2, O2, U1, FullGroup, Other };
enum class ComponentHint { Connected, TwoComponents, Finite, Unknown };

std::string to_string(SubgroupLabel label);
std::string to_string(ComponentHint hint);

struct SubgroupClass {
  int lie_dim = 0;
  ComponentHint component_hint = ComponentHint::Finite;
  /// Number of elements for finite classes, number of components otherwise.
  int order = 1;
  SubgroupLabel label = SubgroupLabel::Trivial;
  /// Sorted traces of the component representatives, rounded to 1e-6.
  std::vector<double> traces;

  std::string to_string() const;
  bool operator==(const SubgroupClass&) const = default;
};

/// Labels the subgroup with Lie algebra span(stab_lie_basis) (coordinate
/// columns) and discrete part generated by `fixed_elements`.
SubgroupClass classify_subgroup(const GroupDescriptor& g, const Mat& stab_lie_basis,
                                const std::vector<Mat>& fixed_elements, const Tolerance& tol);

/// Orbit-type equality. Outside the catalog vocabulary (label Other) this
/// compares invariants only and can miss genuine conjugacies.
bool classes_conjugate(const SubgroupClass& a, const SubgroupClass& b);

/// False when the conjugacy decision for (a, b) rests on invariants alone.
bool catalog_complete(const SubgroupClass& a, const SubgroupClass& b);

/// Deduplicates elements modulo the identity component exp(span(generators)).
std::vector<Mat> component_representatives(const GroupDescriptor& g,
                                           const std::vector<Mat>& elements,
                                           const Mat& generators, double eps);

}  // namespace orthofold
