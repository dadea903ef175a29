#pragma once

// Stabilizers, normal slices and slice representations.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orthofold/actions.hpp"
#include "orthofold/groups.hpp"
#include "orthofold/numerics.hpp"

namespace orthofold {

struct StabilizerData {
  int lie_dim = 0;
  /// Orthonormal coordinate columns spanning the stabilizer algebra.
  Mat lie_kernel;
  /// Canonical generators of the same span (see canonical_generators).
  Mat generators;
  /// One element per component of the stabilizer found by the search;
  /// the identity comes first, the rest are sorted by entries.
  std::vector<Mat> discrete_witnesses;
  SubgroupClass subgroup_class;
  /// Candidates whose refinement did not converge (dropped).
  int dropped_candidates = 0;
};

struct NormalSlice {
  TangentFrame frame;
  /// Infinitesimal action in frame coordinates (intrinsic_dim x dim G).
  Mat infinitesimal;
  Index orbit_dim = 0;
  /// Slice basis in frame coordinates (intrinsic_dim x slice_dim).
  Mat basis;

  Index slice_dim() const { return basis.cols(); }
  Mat ambient_basis() const { return frame.basis * basis; }
};

NormalSlice normal_slice(const ActionModel& a, const Vec& x, const Tolerance& tol);

/// Stabilizer search with a fixed set of Haar samples, reusable across points.
class StabilizerSearch {
 public:
  explicit StabilizerSearch(const ActionModel& a, std::uint64_t seed, std::size_t samples = 512);

  StabilizerData operator()(const Vec& x, const Tolerance& tol) const;
  StabilizerData operator()(const NormalSlice& slice, const Tolerance& tol) const;

 private:
  std::vector<Mat> discrete_search(const Vec& x, const Mat& gens, const Tolerance& tol,
                                   int& dropped) const;

  const ActionModel* action_;
  std::vector<Mat> samples_;
  std::vector<Mat> sample_reps_;
};

StabilizerData stabilizer(const ActionModel& a, const Vec& x, std::uint64_t seed,
                          const Tolerance& tol);

/// True when both describe the same subgroup (not just conjugate ones).
bool same_stabilizer(const GroupDescriptor& g, const StabilizerData& s1, const StabilizerData& s2,
                     const Tolerance& tol);

enum class RepKind { FiniteCharacters, TorusWeights, SampledTraces };

std::string to_string(RepKind kind);

struct SliceRep {
  Index slice_dim = 0;
  /// Slice basis in tangent-frame coordinates.
  Mat slice_frame;
  RepKind kind = RepKind::FiniteCharacters;
  SubgroupClass group_class;
  /// TorusWeights: one integer vector per complex line (or real plane), with
  /// zero weights listed once per real dimension.
  std::vector<std::vector<int>> weights;
  /// FiniteCharacters: trace per witness; SampledTraces: trace per sample.
  std::vector<double> traces;
  /// Slice images of the canonical generators and of the witnesses.
  std::vector<Mat> generator_images;
  std::vector<Mat> element_images;
  /// Present when the slice is a complex subspace preserved by the action.
  std::optional<Mat> complex_structure;

  /// Invariant string used for caching and reports.
  std::string canonical_form() const;
};

SliceRep slice_representation(const ActionModel& a, const NormalSlice& slice,
                              const StabilizerData& stab, std::uint64_t seed,
                              const Tolerance& tol);

SliceRep slice_representation(const ActionModel& a, const Vec& x, const StabilizerData& stab,
                              std::uint64_t seed, const Tolerance& tol);

/// Integer weights of commuting antisymmetric generators. With a complex
/// structure commuting with all generators the weights are signed relative
/// to it; otherwise each weight vector is normalised to a positive leading
/// entry. Throws ExtractionError when rounding leaves a residual above
/// match_eps.
std::vector<std::vector<int>> extract_torus_weights(const std::vector<Mat>& generators,
                                                    const std::optional<Mat>& complex_structure,
                                                    const Tolerance& tol);

/// Flips each weight vector to a positive leading entry and sorts.
std::vector<std::vector<int>> sign_normalized(std::vector<std::vector<int>> weights);

/// Representation equivalence for reps of stabilizers with the same class.
/// On false, `reason` (when given) says why.
bool reps_equivalent(const SliceRep& r1, const SliceRep& r2, const Tolerance& tol,
                     std::string* reason = nullptr);

/// dim of the normalizer algebra of the stabilizer, minus dim of the
/// stabilizer, plus dim of the slice fixed by it: the local dimension of
/// the set of points with exactly this stabilizer.
int isostabilizer_local_dim(const GroupDescriptor& g, const StabilizerData& stab,
                            const SliceRep& rep, const Tolerance& tol);

}  // namespace orthofold
