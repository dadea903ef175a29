#include "orthofold/quotient.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

namespace orthofold {

namespace {

constexpr double kIdentityEps = 1e-6;
constexpr std::size_t kSliceSearchSamples = 256;
constexpr int kGenericVectors = 3;

/// A maximal linearly independent subset of the nonzero matrices.
std::vector<Mat> independent(const std::vector<Mat>& mats, const Tolerance& tol) {
  std::vector<Mat> out;
  Mat flat;
  for (const auto& m : mats) {
    if (m.norm() < 1e-9) continue;
    Mat next(m.size(), flat.cols() + 1);
    if (flat.cols() > 0) next.leftCols(flat.cols()) = flat;
    next.col(flat.cols()) = Eigen::Map<const Vec>(m.data(), m.size());
    if (rank(next, tol) > flat.cols()) {
      flat = std::move(next);
      out.push_back(m);
    }
  }
  return out;
}

/// The closed group generated by `gens` and `comps`, or nothing when it is
/// trivial.
std::optional<GroupDescriptor> effective_image(const std::vector<Mat>& gens,
                                               const std::vector<Mat>& comps,
                                               const Tolerance& tol) {
  std::vector<Mat> g = independent(gens, tol);
  std::vector<Mat> nontrivial;
  for (const auto& c : comps)
    if ((c - Mat::Identity(c.rows(), c.cols())).norm() > kIdentityEps) nontrivial.push_back(c);
  if (g.empty() && nontrivial.empty()) return std::nullopt;
  GroupDescriptor h = GroupDescriptor::generated(std::move(g), std::move(nontrivial));
  if (h.dim() == 0 && h.elements().size() == 1) return std::nullopt;
  return h;
}

std::string effective_label(const std::vector<Mat>& gens, const std::vector<Mat>& comps,
                            const Tolerance& tol) {
  if (!gens.empty() && gens.front().rows() == 0) return "Trivial";
  if (gens.empty() && !comps.empty() && comps.front().rows() == 0) return "Trivial";
  const auto h = effective_image(gens, comps, tol);
  if (!h) return "Trivial";
  const std::vector<Mat> others(h->elements().begin() + 1, h->elements().end());
  return classify_subgroup(*h, Mat::Identity(h->dim(), h->dim()), others, tol).to_string();
}

std::string format_traces(std::vector<double> traces) {
  std::sort(traces.begin(), traces.end());
  std::ostringstream os;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const double v = std::abs(traces[i]) < 5e-7 ? 0.0 : traces[i];
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    os << (i ? "," : "") << buf;
  }
  return os.str();
}

/// Subspaces of E on which slice stabilizers change: sums of isotypic
/// planes of the identity component and fixed spaces of components.
std::vector<Mat> probe_subspaces(const GroupDescriptor& h, const Tolerance& tol) {
  const Index d = h.rep_dim();
  std::vector<Mat> planes;
  if (h.dim() > 0) {
    static const double coeffs[] = {1.0, 1.4142135623730951, 1.7320508075688772,
                                    2.23606797749979, 2.6457513110645907, 3.3166247903554};
    Mat m = Mat::Zero(d, d);
    for (Index j = 0; j < h.dim(); ++j) m += coeffs[j % 6] * h.lie_basis()[static_cast<std::size_t>(j)];
    Mat sq = -m * m;
    sq = 0.5 * (sq + sq.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sq);
    const double eps = 1e-6 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<Index> current;
    for (Index i = 0; i < d; ++i) {
      if (!current.empty() &&
          std::abs(eig.eigenvalues()(i) - eig.eigenvalues()(current.back())) > eps) {
        Mat b(d, static_cast<Index>(current.size()));
        for (std::size_t k = 0; k < current.size(); ++k)
          b.col(static_cast<Index>(k)) = eig.eigenvectors().col(current[k]);
        planes.push_back(b);
        current.clear();
      }
      current.push_back(i);
    }
    Mat b(d, static_cast<Index>(current.size()));
    for (std::size_t k = 0; k < current.size(); ++k)
      b.col(static_cast<Index>(k)) = eig.eigenvectors().col(current[k]);
    planes.push_back(b);
  } else {
    planes.push_back(Mat::Identity(d, d));
  }

  std::vector<Mat> out;
  const std::size_t p = std::min<std::size_t>(planes.size(), 6);
  for (std::size_t mask = 1; mask < (std::size_t{1} << p); ++mask) {
    Index cols = 0;
    for (std::size_t k = 0; k < p; ++k)
      if (mask & (std::size_t{1} << k)) cols += planes[k].cols();
    Mat b(d, cols);
    Index at = 0;
    for (std::size_t k = 0; k < p; ++k)
      if (mask & (std::size_t{1} << k)) {
        b.middleCols(at, planes[k].cols()) = planes[k];
        at += planes[k].cols();
      }
    out.push_back(b);
  }

  const auto& comps = h.elements();
  const Mat id = Mat::Identity(d, d);
  for (std::size_t i = 1; i < comps.size(); ++i) {
    out.push_back(kernel_basis(comps[i] - id, tol));
    for (std::size_t j = i + 1; j < comps.size() && j < 8; ++j) {
      Mat stacked(2 * d, d);
      stacked << comps[i] - id, comps[j] - id;
      out.push_back(kernel_basis(stacked, tol));
    }
  }
  return out;
}

}  // namespace

std::string LocalModelFingerprint::klein_key() const {
  std::ostringstream os;
  os << "slice_dim=" << slice_dim << ";dim_at_origin=" << dim_at_origin << ";profile={";
  for (std::size_t i = 0; i < slice_stab_profile.size(); ++i)
    os << (i ? "," : "") << slice_stab_profile[i];
  os << "};free=" << (free_away_from_origin ? "true" : "false") << ";" << effective_signature;
  return os.str();
}

LocalModelFingerprint local_model(const SliceRep& rep, std::uint64_t seed, const Tolerance& tol) {
  LocalModelFingerprint f;
  f.slice_dim = rep.slice_dim;
  f.dim_at_origin = rep.slice_dim;
  f.stab_class = rep.group_class;
  f.rep_fingerprint = rep.canonical_form();

  const auto h = rep.slice_dim > 0
                     ? effective_image(rep.generator_images, rep.element_images, tol)
                     : std::nullopt;
  if (!h) {
    f.effective_signature = "trivial";
    f.slice_stab_profile = {"Trivial"};
    f.free_away_from_origin = true;
    return f;
  }

  const Index d = rep.slice_dim;
  ActionModel linear{"slice",
                     *h,
                     ManifoldModel::euclidean(static_cast<int>(d)),
                     [](const Mat& g) { return g; },
                     h->lie_basis(),
                     {},
                     {},
                     {},
                     false,
                     {}};
  const StabilizerSearch search(linear, seed, kSliceSearchSamples);

  std::mt19937_64 rng(seed ^ 0x51ce5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> probes;
  for (const auto& basis : probe_subspaces(*h, tol)) {
    if (basis.cols() == 0) continue;
    Vec c(basis.cols());
    for (Index k = 0; k < c.size(); ++k) c(k) = normal(rng);
    const Vec v = basis * c;
    if (v.norm() > 1e-9) probes.push_back(v.normalized());
  }
  for (int k = 0; k < kGenericVectors; ++k) {
    Vec v(d);
    for (Index i = 0; i < d; ++i) v(i) = normal(rng);
    probes.push_back(v.normalized());
  }

  std::set<std::string> profile;
  std::set<Index> orbit_dims;
  for (const auto& v : probes) {
    const NormalSlice ns = normal_slice(linear, v, tol);
    orbit_dims.insert(ns.orbit_dim);
    const StabilizerData sv = search(ns, tol);
    const Mat& n = ns.basis;
    std::vector<Mat> gens, comps;
    for (Index c = 0; c < sv.generators.cols(); ++c)
      gens.push_back(n.transpose() * h->lie_element(sv.generators.col(c)) * n);
    for (const auto& w : sv.discrete_witnesses) comps.push_back(n.transpose() * w * n);
    profile.insert(n.cols() == 0 ? std::string("Trivial") : effective_label(gens, comps, tol));
  }
  f.slice_stab_profile.assign(profile.begin(), profile.end());
  f.free_away_from_origin = profile.size() == 1 && *profile.begin() == "Trivial";

  std::ostringstream sig;
  if (h->dim() == 0) {
    std::vector<double> traces;
    for (const auto& e : h->elements()) traces.push_back(e.trace());
    sig << "finite(order=" << h->elements().size() << ";traces=" << format_traces(traces) << ")";
  } else {
    sig << "continuous(orbit_dims={";
    bool first = true;
    for (Index k : orbit_dims) {
      sig << (first ? "" : ",") << k;
      first = false;
    }
    sig << "})";
  }
  f.effective_signature = sig.str();
  return f;
}

bool klein_equivalent(const LocalModelFingerprint& f1, const LocalModelFingerprint& f2,
                      const Tolerance&) {
  return f1.klein_key() == f2.klein_key();
}

std::vector<std::size_t> KleinPartition::block_of(std::size_t n) const {
  PartitionOfM p;
  p.blocks = blocks;
  return p.block_of(n);
}

KleinPartition klein_partition(const SampleCloud& cloud, const Tolerance& tol) {
  KleinPartition k;
  std::map<std::string, LocalModelFingerprint> cache;
  std::map<std::string, std::size_t> block_by_key;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const PointRecord& r = cloud.records[i];
    const std::string canon = r.slice.canonical_form();
    auto it = cache.find(canon);
    if (it == cache.end()) {
      const std::uint64_t seed = (cloud.seed + 0x6b1e) * 0x2545f4914f6cdd1dULL + cache.size();
      it = cache.emplace(canon, local_model(r.slice, seed, tol)).first;
    }
    const std::string key = it->second.klein_key();
    auto [pos, inserted] = block_by_key.try_emplace(key, k.blocks.size());
    if (inserted) {
      k.blocks.emplace_back();
      k.fingerprints.push_back(it->second);
      k.dims.push_back(r.quotient_dim);
    }
    const std::size_t b = pos->second;
    k.blocks[b].push_back(i);
    if (k.dims[b] != r.quotient_dim) k.dims[b] = -1;
  }
  return k;
}

CorrespondenceReport correspondence(const PartitionOfM& iso, const KleinPartition& klein,
                                    std::size_t point_count) {
  const auto klein_of = klein.block_of(point_count);
  iso.block_of(point_count);
  CorrespondenceReport rep;
  for (std::size_t b = 0; b < iso.blocks.size(); ++b) {
    const std::size_t target = klein_of[iso.blocks[b].front()];
    for (std::size_t i : iso.blocks[b])
      if (klein_of[i] != target)
        throw WellDefinednessError(
            b, "isostabilizer block " + std::to_string(b) + " (" +
                   iso.labels[b].subgroup.to_string() + ") meets Klein blocks " +
                   std::to_string(target) + " and " + std::to_string(klein_of[i]));
    rep.map.push_back(target);
  }

  std::vector<bool> hit(klein.blocks.size(), false);
  for (std::size_t t : rep.map) hit[t] = true;
  rep.surjective = std::all_of(hit.begin(), hit.end(), [](bool h) { return h; });
  std::vector<std::size_t> sorted = rep.map;
  std::sort(sorted.begin(), sorted.end());
  rep.injective = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();

  // Different stabilizers, same local model.
  std::set<std::tuple<std::size_t, std::string, std::string>> seen;
  for (std::size_t a = 0; a < iso.blocks.size(); ++a)
    for (std::size_t b = a + 1; b < iso.blocks.size(); ++b) {
      if (rep.map[a] != rep.map[b]) continue;
      const std::string la = iso.labels[a].subgroup.to_string();
      const std::string lb = iso.labels[b].subgroup.to_string();
      if (classes_conjugate(iso.labels[a].subgroup, iso.labels[b].subgroup)) continue;
      const auto key = std::make_tuple(rep.map[a], std::min(la, lb), std::max(la, lb));
      if (!seen.insert(key).second) continue;
      rep.merge_witnesses.push_back({a, b, rep.map[a], la, lb});
    }

  // Same stabilizer, different local models.
  std::vector<SubgroupClass> types;
  std::vector<std::set<std::size_t>> met;
  for (std::size_t b = 0; b < iso.blocks.size(); ++b) {
    const SubgroupClass& c = iso.labels[b].subgroup;
    std::size_t t = 0;
    while (t < types.size() && !classes_conjugate(types[t], c)) ++t;
    if (t == types.size()) {
      types.push_back(c);
      met.emplace_back();
    }
    met[t].insert(rep.map[b]);
  }
  for (std::size_t t = 0; t < types.size(); ++t)
    if (met[t].size() > 1)
      rep.split_witnesses.push_back(
          {t, types[t].to_string(), std::vector<std::size_t>(met[t].begin(), met[t].end())});
  return rep;
}

PartitionOfM inverse_klein(const KleinPartition& klein, const SampleCloud& cloud) {
  PartitionOfM p;
  for (std::size_t b = 0; b < klein.blocks.size(); ++b) {
    p.blocks.push_back(klein.blocks[b]);
    p.labels.push_back({cloud.records[klein.blocks[b].front()].stab.subgroup_class,
                        klein.fingerprints[b].klein_key(), 0});
  }
  return p;
}

std::string to_string(PartitionOrder order) {
  switch (order) {
    case PartitionOrder::Equal: return "Equal";
    case PartitionOrder::PRefinesQ: return "PRefinesQ";
    case PartitionOrder::QRefinesP: return "QRefinesP";
    case PartitionOrder::Incomparable: return "Incomparable";
  }
  return "?";
}

PartitionOrder compare_partitions(const PartitionOfM& p, const PartitionOfM& q, std::size_t n) {
  const auto bp = p.block_of(n);
  const auto bq = q.block_of(n);
  auto refines = [n](const std::vector<std::size_t>& fine, const std::vector<std::size_t>& coarse,
                     std::size_t fine_blocks) {
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> target(fine_blocks, unset);
    for (std::size_t i = 0; i < n; ++i) {
      if (target[fine[i]] == unset) target[fine[i]] = coarse[i];
      else if (target[fine[i]] != coarse[i]) return false;
    }
    return true;
  };
  const bool pq = refines(bp, bq, p.blocks.size());
  const bool qp = refines(bq, bp, q.blocks.size());
  if (pq && qp) return PartitionOrder::Equal;
  if (pq) return PartitionOrder::PRefinesQ;
  if (qp) return PartitionOrder::QRefinesP;
  return PartitionOrder::Incomparable;
}

namespace {

constexpr double kBreakEps = 1e-9;

/// Sorted distinct breakpoints of a model and, for every cell (even index:
/// breakpoint, odd index: open gap), the strata covering it.
struct Cells {
  std::vector<double> breaks;
  std::vector<std::vector<std::size_t>> owners;

  std::size_t index_of(double v) const {
    for (std::size_t k = 0; k < breaks.size(); ++k)
      if (std::abs(breaks[k] - v) <= kBreakEps) return k;
    throw InputError("interval model: unknown breakpoint");
  }
};

Cells cells_of(const StratifiedInterval& m) {
  if (!(m.lo < m.hi)) throw InputError("interval model: empty interval");
  Cells c;
  std::vector<double> all = {m.lo, m.hi};
  for (const auto& s : m.strata)
    for (const auto& p : s.pieces) {
      if (p.a < m.lo - kBreakEps || p.b > m.hi + kBreakEps)
        throw InputError("interval model: piece outside the interval");
      if (p.kind == IntervalPiece::Kind::Open && !(p.a < p.b))
        throw InputError("interval model: empty open piece");
      all.push_back(p.a);
      all.push_back(p.b);
    }
  std::sort(all.begin(), all.end());
  for (double v : all)
    if (c.breaks.empty() || v - c.breaks.back() > kBreakEps) c.breaks.push_back(v);
  c.owners.assign(2 * c.breaks.size() - 1, {});
  for (std::size_t s = 0; s < m.strata.size(); ++s)
    for (const auto& p : m.strata[s].pieces) {
      const std::size_t ia = c.index_of(p.a);
      if (p.kind == IntervalPiece::Kind::Point) {
        c.owners[2 * ia].push_back(s);
        continue;
      }
      const std::size_t ib = c.index_of(p.b);
      for (std::size_t cell = 2 * ia + 1; cell < 2 * ib; ++cell) c.owners[cell].push_back(s);
    }
  return c;
}

}  // namespace

void check_interval_partition(const StratifiedInterval& model) {
  const Cells c = cells_of(model);
  for (const auto& o : c.owners)
    if (o.size() != 1) throw InputError("interval strata do not partition the interval");
}

bool frontier_check(const StratifiedInterval& model) {
  check_interval_partition(model);
  const Cells c = cells_of(model);
  const std::size_t cells = c.owners.size();
  for (std::size_t s = 0; s < model.strata.size(); ++s) {
    std::vector<bool> closure(cells, false);
    for (std::size_t k = 0; k < cells; ++k)
      if (c.owners[k][0] == s) {
        closure[k] = true;
        if (k % 2 == 1) closure[k - 1] = closure[k + 1] = true;
      }
    for (std::size_t k = 0; k < cells; ++k) {
      if (!closure[k]) continue;
      const std::size_t t = c.owners[k][0];
      for (std::size_t j = 0; j < cells; ++j)
        if (c.owners[j][0] == t && !closure[j]) return false;
    }
  }
  return true;
}

StratifiedInterval quotient_interval_model(const ActionModel& a, const SampleCloud& cloud,
                                           const KleinPartition& klein, const Tolerance& tol) {
  if (!a.interval) throw InputError(a.name + " has no interval model");
  const IntervalMap& map = *a.interval;
  StratifiedInterval model;
  model.lo = map.lo;
  model.hi = map.hi;
  const double gap = std::max(tol.match_eps, 1e-9) * (map.hi - map.lo);

  auto snap = [&](double v) {
    if (std::abs(v - map.lo) <= gap) return map.lo;
    if (std::abs(v - map.hi) <= gap) return map.hi;
    return v;
  };

  struct Pending {
    std::size_t block;
    double lo, hi;
  };
  std::vector<Pending> open;
  std::vector<double> points;
  for (std::size_t b = 0; b < klein.blocks.size(); ++b) {
    std::vector<double> values;
    bool injected_only = true;
    for (std::size_t i : klein.blocks[b]) {
      values.push_back(snap(map.value(cloud.records[i].point)));
      injected_only = injected_only && cloud.records[i].injected;
    }
    std::sort(values.begin(), values.end());
    std::vector<std::vector<double>> clusters;
    for (double v : values)
      if (!clusters.empty() && v - clusters.back().back() <= gap)
        clusters.back().push_back(v);
      else
        clusters.push_back({v});
    if (injected_only && clusters.size() <= 2) {
      IntervalStratum s;
      s.source = b;
      for (const auto& cl : clusters) {
        const double v = snap(cl.front());
        s.pieces.push_back(IntervalPiece::point(v));
        points.push_back(v);
      }
      model.strata.push_back(std::move(s));
    } else {
      open.push_back({b, values.front(), values.back()});
    }
  }

  std::vector<double> breaks = points;
  breaks.push_back(map.lo);
  breaks.push_back(map.hi);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double x, double y) { return std::abs(x - y) <= kBreakEps; }),
               breaks.end());
  for (const auto& p : open) {
    IntervalStratum s;
    s.source = p.block;
    // Extend the sampled range to the neighbouring breakpoints.
    std::size_t ia = 0;
    while (ia + 1 < breaks.size() && breaks[ia + 1] < p.lo) ++ia;
    std::size_t ib = breaks.size() - 1;
    while (ib > 0 && breaks[ib - 1] > p.hi) --ib;
    for (std::size_t k = ia; k < ib; ++k)
      s.pieces.push_back(IntervalPiece::open(breaks[k], breaks[k + 1]));
    model.strata.push_back(std::move(s));
  }
  std::sort(model.strata.begin(), model.strata.end(),
            [](const IntervalStratum& x, const IntervalStratum& y) { return x.source < y.source; });
  return model;
}

OrbifoldCriterion orbifold_criterion(const SampleCloud& cloud, const KleinPartition& klein,
                                     const PrincipalData& principal) {
  OrbifoldCriterion c;
  c.constant_dimension = std::all_of(cloud.records.begin(), cloud.records.end(),
                                     [&](const PointRecord& r) {
                                       return r.quotient_dim == cloud.records.front().quotient_dim;
                                     });
  const auto block = klein.block_of(cloud.size());
  c.finite_structure = true;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto label =
        classify_singularity(cloud.records[i], principal.d_pr, principal.principal_class);
    const bool finite_h =
        klein.fingerprints[block[i]].effective_signature.rfind("continuous", 0) != 0;
    if (label.kind == SingularityKind::OrthofoldPoint || !finite_h) c.finite_structure = false;
  }
  return c;
}

}  // namespace orthofold
