#pragma once

// Sample clouds over M and the partitions built on them: orbit types,
// isostabilizer components, principal data and singularity labels.

#include <cstdint>
#include <string>
#include <vector>

#include "orthofold/actions.hpp"
#include "orthofold/isotropy.hpp"

namespace orthofold {

struct PointRecord {
  Vec point;
  /// Catalog special point rather than a uniform sample.
  bool injected = false;
  Index orbit_dim = 0;
  Index quotient_dim = 0;
  StabilizerData stab;
  SliceRep slice;
  /// Local dimension of the set of points with exactly this stabilizer.
  int iso_local_dim = 0;
};

struct SampleCloud {
  std::string action;
  std::uint64_t seed = 0;
  std::size_t uniform_count = 0;
  Tolerance tol;
  std::vector<PointRecord> records;

  std::size_t size() const { return records.size(); }
  int dropped_candidates() const;
};

/// Isotropy data for one point, reusing a prepared stabilizer search.
PointRecord analyze_point(const ActionModel& a, const Vec& x, const StabilizerSearch& search,
                          std::uint64_t seed, const Tolerance& tol);

/// `count` uniform samples followed by the catalog's special points.
SampleCloud build_cloud(const ActionModel& a, std::size_t count, std::uint64_t seed,
                        const Tolerance& tol);

/// intrinsic_dim(M) - dim(G.x).
Index quotient_dimension(const ActionModel& a, const Vec& x, const Tolerance& tol);

struct BlockLabel {
  SubgroupClass subgroup;
  std::string rep_fingerprint;
  /// Component number inside the exact-stabilizer group (isostabilizer only).
  int component = 0;
};

struct PartitionOfM {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<BlockLabel> labels;

  /// Block number of every index; throws InputError unless the blocks
  /// partition 0..n-1.
  std::vector<std::size_t> block_of(std::size_t n) const;
};

PartitionOfM orbit_type_partition(const SampleCloud& cloud);

/// Groups points with equal stabilizers, then splits each group into
/// connected components. Groups whose set of points is locally
/// zero-dimensional are split into single points.
PartitionOfM isostabilizer_decomposition(const ActionModel& a, const SampleCloud& cloud,
                                         const Tolerance& tol);

struct PrincipalData {
  Index d_pr = 0;
  SubgroupClass principal_class;
  /// Orbit-type block holding the most uniform samples.
  std::size_t principal_block = 0;
  /// The minimum quotient dimension is attained on the principal block.
  bool attained_on_principal = true;
  /// Singular points with quotient_dim == d_pr.
  std::vector<std::size_t> exceptional;
};

PrincipalData principal_dimension(const SampleCloud& cloud, const PartitionOfM& orbit_types);

enum class SingularityKind { ManifoldPoint, OrbifoldPoint, OrthofoldPoint };

struct SingularityLabel {
  SingularityKind kind = SingularityKind::ManifoldPoint;
  /// |K/K^0| for orbifold points.
  int order = 1;

  std::string to_string() const;
  bool operator==(const SingularityLabel&) const = default;
};

SingularityLabel classify_singularity(const PointRecord& record, Index d_pr,
                                      const SubgroupClass& principal_class);

struct ToricDepth {
  int depth = 0;
  int dim = 0;
};

/// Depth and dimension of a point t of the positive orthant (C^n/T^n).
ToricDepth toric_depth(const Vec& t, double eps);

/// quotient_dimension(z) == n + depth(|z_1|^2, ..., |z_n|^2) on "cn-tn(n)".
bool toric_consistency(const ActionModel& a, const Vec& z, const Tolerance& tol);

}  // namespace orthofold
