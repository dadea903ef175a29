#include "orthofold/strata.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace orthofold {

namespace {

constexpr std::uint64_t kSearchSalt = 0x9e3779b97f4a7c15ULL;

std::uint64_t point_seed(std::uint64_t seed, std::size_t i) {
  return (seed + 1) * kSearchSalt ^ (static_cast<std::uint64_t>(i) * 0xbf58476d1ce4e5b9ULL);
}

/// Bucket key for exact-stabilizer grouping; equal keys are then compared
/// exactly with same_stabilizer.
std::string stabilizer_key(const StabilizerData& s) {
  std::ostringstream os;
  os << s.subgroup_class.to_string() << "|" << s.discrete_witnesses.size() << "|";
  auto put = [&](double v) { os << std::llround(v * 1e5) << ","; };
  for (Index i = 0; i < s.generators.size(); ++i) put(s.generators.data()[i]);
  if (s.lie_dim == 0)
    for (const auto& w : s.discrete_witnesses)
      for (Index i = 0; i < w.size(); ++i) put(w.data()[i]);
  return os.str();
}

}  // namespace

int SampleCloud::dropped_candidates() const {
  int total = 0;
  for (const auto& r : records) total += r.stab.dropped_candidates;
  return total;
}

PointRecord analyze_point(const ActionModel& a, const Vec& x, const StabilizerSearch& search,
                          std::uint64_t seed, const Tolerance& tol) {
  PointRecord r;
  r.point = x;
  const NormalSlice slice = normal_slice(a, x, tol);
  r.orbit_dim = slice.orbit_dim;
  r.quotient_dim = a.manifold.intrinsic_dim() - r.orbit_dim;
  r.stab = search(slice, tol);
  r.slice = slice_representation(a, slice, r.stab, seed, tol);
  r.iso_local_dim = isostabilizer_local_dim(a.group, r.stab, r.slice, tol);
  return r;
}

SampleCloud build_cloud(const ActionModel& a, std::size_t count, std::uint64_t seed,
                        const Tolerance& tol) {
  tol.validate();
  if (count < 1) throw InputError("build_cloud: count must be >= 1");
  SampleCloud cloud;
  cloud.action = a.name;
  cloud.seed = seed;
  cloud.uniform_count = count;
  cloud.tol = tol;
  const StabilizerSearch search(a, seed ^ kSearchSalt);
  std::vector<Vec> points = sample_points(a.manifold, count, seed);
  const std::vector<Vec> special = a.special_points ? a.special_points(seed) : std::vector<Vec>{};
  for (const auto& p : special) points.push_back(a.manifold.normalize(p));
  cloud.records.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    PointRecord r = analyze_point(a, points[i], search, point_seed(seed, i), tol);
    r.injected = i >= count;
    cloud.records.push_back(std::move(r));
  }
  return cloud;
}

Index quotient_dimension(const ActionModel& a, const Vec& x, const Tolerance& tol) {
  return normal_slice(a, x, tol).slice_dim();
}

std::vector<std::size_t> PartitionOfM::block_of(std::size_t n) const {
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> out(n, unset);
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t i : blocks[b]) {
      if (i >= n) throw InputError("partition index out of range");
      if (out[i] != unset) throw InputError("partition blocks overlap");
      out[i] = b;
    }
  if (std::find(out.begin(), out.end(), unset) != out.end())
    throw InputError("partition does not cover every index");
  return out;
}

PartitionOfM orbit_type_partition(const SampleCloud& cloud) {
  PartitionOfM p;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const SubgroupClass& c = cloud.records[i].stab.subgroup_class;
    std::size_t b = 0;
    while (b < p.blocks.size() && !classes_conjugate(p.labels[b].subgroup, c)) ++b;
    if (b == p.blocks.size()) {
      p.blocks.emplace_back();
      p.labels.push_back({c, "", 0});
    }
    p.blocks[b].push_back(i);
  }
  return p;
}

PartitionOfM isostabilizer_decomposition(const ActionModel& a, const SampleCloud& cloud,
                                         const Tolerance& tol) {
  // Exact-stabilizer groups, bucketed by a rounded key first.
  std::map<std::string, std::vector<std::size_t>> buckets;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::string key = stabilizer_key(cloud.records[i].stab);
    auto [it, inserted] = buckets.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(i);
  }
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& key : order) {
    std::vector<std::vector<std::size_t>> local;
    for (std::size_t i : buckets[key]) {
      auto match = std::find_if(local.begin(), local.end(), [&](const auto& grp) {
        return same_stabilizer(a.group, cloud.records[grp.front()].stab, cloud.records[i].stab,
                               tol);
      });
      if (match == local.end())
        local.push_back({i});
      else
        match->push_back(i);
    }
    groups.insert(groups.end(), local.begin(), local.end());
  }

  struct Block {
    std::vector<std::size_t> members;
    int component;
  };
  std::vector<Block> blocks;
  for (const auto& grp : groups) {
    const bool discrete = std::all_of(grp.begin(), grp.end(), [&](std::size_t i) {
      return cloud.records[i].iso_local_dim == 0;
    });
    if (discrete || grp.size() == 1) {
      int c = 0;
      for (std::size_t i : grp) blocks.push_back({{i}, c++});
      continue;
    }
    const auto comps = epsilon_components(
        grp.size(),
        [&](std::size_t u, std::size_t v) {
          return a.manifold.distance(cloud.records[grp[u]].point, cloud.records[grp[v]].point);
        },
        tol.cluster_eps_factor);
    int c = 0;
    for (const auto& comp : comps) {
      Block b{{}, c++};
      for (std::size_t u : comp) b.members.push_back(grp[u]);
      blocks.push_back(std::move(b));
    }
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const Block& x, const Block& y) { return x.members.front() < y.members.front(); });

  PartitionOfM p;
  for (auto& b : blocks) {
    const PointRecord& first = cloud.records[b.members.front()];
    p.labels.push_back({first.stab.subgroup_class, first.slice.canonical_form(), b.component});
    p.blocks.push_back(std::move(b.members));
  }
  return p;
}

PrincipalData principal_dimension(const SampleCloud& cloud, const PartitionOfM& orbit_types) {
  if (cloud.size() == 0) throw InputError("principal_dimension: empty cloud");
  PrincipalData d;
  std::size_t best = 0;
  for (std::size_t b = 0; b < orbit_types.blocks.size(); ++b) {
    const auto& blk = orbit_types.blocks[b];
    const auto uniform = static_cast<std::size_t>(std::count_if(
        blk.begin(), blk.end(), [&](std::size_t i) { return !cloud.records[i].injected; }));
    if (b == 0 || uniform > best) {
      best = uniform;
      d.principal_block = b;
    }
  }
  d.principal_class = orbit_types.labels[d.principal_block].subgroup;
  d.d_pr = cloud.records.front().quotient_dim;
  for (const auto& r : cloud.records) d.d_pr = std::min(d.d_pr, r.quotient_dim);
  for (std::size_t i : orbit_types.blocks[d.principal_block])
    if (cloud.records[i].quotient_dim != d.d_pr) d.attained_on_principal = false;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const PointRecord& r = cloud.records[i];
    if (!classes_conjugate(r.stab.subgroup_class, d.principal_class) && r.quotient_dim == d.d_pr)
      d.exceptional.push_back(i);
  }
  return d;
}

std::string SingularityLabel::to_string() const {
  switch (kind) {
    case SingularityKind::ManifoldPoint: return "ManifoldPoint";
    case SingularityKind::OrbifoldPoint: return "OrbifoldPoint(" + std::to_string(order) + ")";
    case SingularityKind::OrthofoldPoint: return "OrthofoldPoint";
  }
  return "?";
}

SingularityLabel classify_singularity(const PointRecord& record, Index /*d_pr*/,
                                      const SubgroupClass& principal_class) {
  const SubgroupClass& k = record.stab.subgroup_class;
  if (classes_conjugate(k, principal_class)) return {SingularityKind::ManifoldPoint, 1};
  const int gamma = static_cast<int>(record.stab.discrete_witnesses.size());
  // A same-dimensional but non-conjugate connected stabilizer has no finite
  // structure group; it falls through to the general label.
  if (k.lie_dim == principal_class.lie_dim && gamma >= 2)
    return {SingularityKind::OrbifoldPoint, gamma};
  return {SingularityKind::OrthofoldPoint, 1};
}

ToricDepth toric_depth(const Vec& t, double eps) {
  if (!t.allFinite()) throw InputError("toric_depth: non-finite coordinate");
  ToricDepth d;
  for (Index i = 0; i < t.size(); ++i) {
    if (t(i) < -eps) throw InputError("toric_depth: negative coordinate");
    if (t(i) < eps) ++d.depth;
  }
  d.dim = static_cast<int>(t.size()) + d.depth;
  return d;
}

bool toric_consistency(const ActionModel& a, const Vec& z, const Tolerance& tol) {
  if (a.group.kind() != GroupKind::Torus || a.manifold.kind() != ManifoldKind::Euclidean ||
      a.manifold.ambient_dim() != 2 * a.group.dim())
    throw InputError("toric_consistency needs a cn-tn(n) action");
  Vec t(a.group.dim());
  for (Index i = 0; i < t.size(); ++i) t(i) = z.segment(2 * i, 2).squaredNorm();
  return quotient_dimension(a, z, tol) == toric_depth(t, tol.match_eps).dim;
}

}  // namespace orthofold
