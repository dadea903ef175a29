#pragma once

// Quotient-side structures: local-model fingerprints, fingerprint-Klein
// partitions, the correspondence from isostabilizer blocks, partition
// comparison and stratified interval models.

#include <cstdint>
#include <string>
#include <vector>

#include "orthofold/strata.hpp"

namespace orthofold {

/// Computable invariants of the local model E/H at a point, where H is the
/// image of the stabilizer in O(E).
struct LocalModelFingerprint {
  Index slice_dim = 0;
  Index dim_at_origin = 0;
  SubgroupClass stab_class;
  /// SliceRep::canonical_form() of the slice representation.
  std::string rep_fingerprint;
  /// Effective classes of H_v acting on its own normal slice, for sampled
  /// nonzero v in E (sorted, without repetition).
  std::vector<std::string> slice_stab_profile;
  bool free_away_from_origin = true;
  /// "trivial", "finite(...)" with the traces of the effective image, or
  /// "continuous(...)" with the orbit dimensions of H on E \ 0.
  std::string effective_signature;

  /// Everything klein_equivalent compares, as one string.
  std::string klein_key() const;
};

LocalModelFingerprint local_model(const SliceRep& rep, std::uint64_t seed, const Tolerance& tol);

bool klein_equivalent(const LocalModelFingerprint& f1, const LocalModelFingerprint& f2,
                      const Tolerance& tol = {});

struct KleinPartition {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<LocalModelFingerprint> fingerprints;
  /// Quotient dimension per block; -1 if it was not constant on the block.
  std::vector<Index> dims;

  std::vector<std::size_t> block_of(std::size_t n) const;
};

/// Fingerprint-equivalence classes of the cloud points. Fingerprints are
/// memoised per slice-representation canonical form.
KleinPartition klein_partition(const SampleCloud& cloud, const Tolerance& tol);

struct MergeWitness {
  std::size_t iso_a = 0;
  std::size_t iso_b = 0;
  std::size_t klein = 0;
  std::string label_a;
  std::string label_b;
};

struct SplitWitness {
  /// Orbit type, numbered in order of first appearance.
  std::size_t orbit_type = 0;
  std::string label;
  std::vector<std::size_t> klein_blocks;
};

struct CorrespondenceReport {
  /// Klein block of every isostabilizer block.
  std::vector<std::size_t> map;
  bool surjective = false;
  bool injective = false;
  /// One witness per Klein block and pair of distinct stabilizer classes.
  std::vector<MergeWitness> merge_witnesses;
  std::vector<SplitWitness> split_witnesses;
};

/// Throws WellDefinednessError naming the first isostabilizer block whose
/// points fall into more than one Klein block.
CorrespondenceReport correspondence(const PartitionOfM& iso, const KleinPartition& klein,
                                    std::size_t point_count);

PartitionOfM inverse_klein(const KleinPartition& klein, const SampleCloud& cloud);

enum class PartitionOrder { Equal, PRefinesQ, QRefinesP, Incomparable };

std::string to_string(PartitionOrder order);

PartitionOrder compare_partitions(const PartitionOfM& p, const PartitionOfM& q, std::size_t n);

struct IntervalPiece {
  enum class Kind { Point, Open };
  Kind kind = Kind::Point;
  double a = 0.0;
  double b = 0.0;  // equal to a for points

  static IntervalPiece point(double v) { return {Kind::Point, v, v}; }
  static IntervalPiece open(double a, double b) { return {Kind::Open, a, b}; }
};

struct IntervalStratum {
  std::vector<IntervalPiece> pieces;
  /// Klein block the stratum came from (or the position in the list).
  std::size_t source = 0;
};

struct StratifiedInterval {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<IntervalStratum> strata;
};

/// Throws InputError unless the strata partition [lo, hi].
void check_interval_partition(const StratifiedInterval& model);

/// True iff the closure of every stratum is a union of strata.
bool frontier_check(const StratifiedInterval& model);

/// Pushes the cloud forward through the action's interval map; strata are
/// the images of the Klein blocks.
StratifiedInterval quotient_interval_model(const ActionModel& a, const SampleCloud& cloud,
                                           const KleinPartition& klein, const Tolerance& tol);

struct OrbifoldCriterion {
  bool constant_dimension = false;
  /// Every point is a manifold or orbifold point with finite effective H.
  bool finite_structure = false;

  bool orbifold() const { return constant_dimension && finite_structure; }
  bool consistent() const { return constant_dimension == finite_structure; }
};

OrbifoldCriterion orbifold_criterion(const SampleCloud& cloud, const KleinPartition& klein,
                                     const PrincipalData& principal);

}  // namespace orthofold
