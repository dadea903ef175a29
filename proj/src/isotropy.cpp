#include "orthofold/isotropy.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace orthofold {

namespace {

constexpr double kScreenRadius = 1.0;     // residual below which a sample is refined
constexpr double kBasinRadius = 0.7;      // group distance treated as "same basin"
constexpr double kCosetEps = 1e-4;        // identity-component distance for equal cosets
constexpr double kConverged = 1e-12;      // squared residual accepted as a witness
constexpr int kMaxRefinements = 48;
constexpr std::size_t kMaxWitnesses = 64;

/// Zeroes entries that are rounding noise relative to `scale`.
Mat cleaned(const Mat& m, double scale) {
  return (m.array().abs() < 1e-12 * std::max(scale, 1.0)).select(0.0, m);
}

/// Rank of a tall stack of constraints (reduced to a square factor first).
Index stacked_rank(const Mat& m, const Tolerance& tol) {
  if (m.rows() <= m.cols()) return rank(cleaned(m, 1.0), tol);
  const Mat r = m.householderQr().matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  return rank(cleaned(r, 1.0), tol);
}

double fix_eps(const Tolerance& tol) { return std::max(tol.match_eps, 1e-9); }

bool lexicographic_less(const Mat& a, const Mat& b) {
  for (Index i = 0; i < a.size(); ++i) {
    const double x = std::round(a.data()[i] * 1e9), y = std::round(b.data()[i] * 1e9);
    if (x != y) return x < y;
  }
  return false;
}

/// Removes the vertical directions at x from v (projective models).
Vec horizontal(const ManifoldModel& m, const Vec& x, const Vec& v) {
  Vec out = v;
  switch (m.kind()) {
    case ManifoldKind::RealProjective: out -= x.dot(v) * x; break;
    case ManifoldKind::ComplexProjective: {
      const Vec jx = *m.complex_structure() * x;
      out -= x.dot(v) * x + jx.dot(v) * jx;
      break;
    }
    default: break;
  }
  return out;
}

/// The unitary scalar (as a real matrix) that aligns y onto x.
Mat alignment(const ManifoldModel& m, const Vec& y, const Vec& x) {
  const Index n = x.size();
  switch (m.kind()) {
    case ManifoldKind::RealProjective:
      return y.dot(x) < 0.0 ? Mat(-Mat::Identity(n, n)) : Mat(Mat::Identity(n, n));
    case ManifoldKind::ComplexProjective: {
      const Mat j = *m.complex_structure();
      const double re = y.dot(x), im = (j * y).dot(x);
      const double r = std::hypot(re, im);
      if (r < 1e-300) return Mat::Identity(n, n);
      return (re / r) * Mat::Identity(n, n) + (im / r) * j;
    }
    default: return Mat::Identity(n, n);
  }
}

std::vector<double> generic_coefficients(std::size_t count) {
  static const double primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  std::vector<double> c;
  for (std::size_t i = 0; i < count; ++i)
    c.push_back(i == 0 ? 1.0 : std::sqrt(primes[(i - 1) % 8]) + static_cast<double>(i / 8));
  return c;
}

std::vector<std::vector<Index>> eigen_clusters(const Vec& values, double eps) {
  std::vector<std::vector<Index>> clusters;
  for (Index i = 0; i < values.size(); ++i) {
    if (!clusters.empty() && std::abs(values(i) - values(clusters.back().back())) <= eps)
      clusters.back().push_back(i);
    else
      clusters.push_back({i});
  }
  return clusters;
}

Mat columns(const Mat& m, const std::vector<Index>& idx) {
  Mat out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = m.col(idx[k]);
  return out;
}

std::vector<int> rounded_weight(const Vec& w, const Tolerance& tol) {
  std::vector<int> out;
  for (Index j = 0; j < w.size(); ++j) {
    const double r = std::round(w(j));
    if (std::abs(w(j) - r) > tol.match_eps) {
      std::ostringstream os;
      os << "weight coordinate " << w(j) << " is not an integer within " << tol.match_eps;
      throw ExtractionError(os.str());
    }
    out.push_back(static_cast<int>(r));
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", std::abs(v) < 5e-7 ? 0.0 : v);
  return buf;
}

}  // namespace

NormalSlice normal_slice(const ActionModel& a, const Vec& x, const Tolerance& tol) {
  NormalSlice s;
  s.frame = tangent_frame(a.manifold, x);
  const Index intrinsic = s.frame.basis.cols();
  Mat inf(intrinsic, static_cast<Index>(a.ambient_generators.size()));
  double scale = 0.0;
  for (std::size_t i = 0; i < a.ambient_generators.size(); ++i) {
    const Vec v = a.ambient_generators[i] * x;
    scale = std::max(scale, v.norm());
    inf.col(static_cast<Index>(i)) = s.frame.basis.transpose() * v;
  }
  s.infinitesimal = cleaned(inf, scale);
  s.orbit_dim = rank(s.infinitesimal, tol);
  s.basis = s.orbit_dim == 0 ? Mat(Mat::Identity(intrinsic, intrinsic))
                             : orthogonal_complement(s.infinitesimal, intrinsic, tol);
  return s;
}

// ---------------------------------------------------------------------------
// Stabilizers

StabilizerSearch::StabilizerSearch(const ActionModel& a, std::uint64_t seed, std::size_t samples)
    : action_(&a) {
  samples_ = a.group.dim() == 0 ? a.group.elements() : sample_elements(a.group, samples, seed);
  sample_reps_.reserve(samples_.size());
  for (const auto& g : samples_) sample_reps_.push_back(a.rep(g));
}

StabilizerData StabilizerSearch::operator()(const Vec& x, const Tolerance& tol) const {
  return (*this)(normal_slice(*action_, x, tol), tol);
}

StabilizerData StabilizerSearch::operator()(const NormalSlice& slice, const Tolerance& tol) const {
  const ActionModel& a = *action_;
  const GroupDescriptor& g = a.group;
  const Vec& x = slice.frame.point;
  StabilizerData s;
  if (g.dim() > 0) {
    s.lie_kernel = kernel_basis(slice.infinitesimal, tol);
  } else {
    s.lie_kernel = Mat(0, 0);
  }
  s.lie_dim = static_cast<int>(s.lie_kernel.cols());
  s.generators = canonical_generators(g, s.lie_kernel, tol);

  const Index n = g.rep_dim();
  if (g.dim() == 0) {
    s.discrete_witnesses = {Mat::Identity(n, n)};
    for (std::size_t i = 0; i < samples_.size(); ++i)
      if (a.manifold.distance(sample_reps_[i] * x, x) <= fix_eps(tol) &&
          (samples_[i] - Mat::Identity(n, n)).norm() > fix_eps(tol))
        s.discrete_witnesses.push_back(samples_[i]);
  } else if (s.lie_dim == g.dim() && g.connected()) {
    s.discrete_witnesses = {Mat::Identity(n, n)};
  } else {
    s.discrete_witnesses = discrete_search(x, s.generators, tol, s.dropped_candidates);
  }
  std::sort(s.discrete_witnesses.begin() + 1, s.discrete_witnesses.end(), lexicographic_less);
  s.subgroup_class = classify_subgroup(g, s.lie_kernel, s.discrete_witnesses, tol);
  return s;
}

std::vector<Mat> StabilizerSearch::discrete_search(const Vec& x, const Mat& gens,
                                                   const Tolerance&, int& dropped) const {
  const ActionModel& a = *action_;
  const GroupDescriptor& g = a.group;
  const Index n = g.rep_dim();
  const bool numeric_cosets = g.kind() == GroupKind::Generated;

  std::vector<Vec> moved;  // xi_j . x
  for (const auto& gen : a.ambient_generators) moved.push_back(gen * x);

  auto residual = [&](const Mat& r) {
    const Vec y = r * x;
    return Vec(a.manifold.align(y, x) - x);
  };
  auto same_coset = [&](const Mat& w, const Mat& h) {
    return identity_component_distance(g, w.transpose() * h, gens) <= kCosetEps;
  };
  auto stabilizes = [&](const Mat& h) {
    return residual(a.rep(h)).squaredNorm() < kConverged;
  };

  auto refine = [&](Mat h) -> std::optional<Mat> {
    for (int it = 0; it < 40; ++it) {
      const Mat r = a.rep(h);
      const Vec y = r * x;
      const Mat align = alignment(a.manifold, y, x);
      const Vec res = align * y - x;
      if (res.squaredNorm() < 1e-26) break;
      Mat jac(x.size(), static_cast<Index>(moved.size()));
      for (std::size_t j = 0; j < moved.size(); ++j)
        jac.col(static_cast<Index>(j)) = horizontal(a.manifold, x, align * (r * moved[j]));
      const Vec step = jac.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-res);
      h = h * g.exp(step);
      if (step.norm() < 1e-15) break;
    }
    if (!stabilizes(h)) return std::nullopt;
    return h;
  };

  std::vector<std::pair<double, std::size_t>> candidates;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double d = a.manifold.distance(sample_reps_[i] * x, x);
    if (d < kScreenRadius) candidates.emplace_back(d, i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& p, const auto& q) { return p.first < q.first; });

  std::vector<Mat> witnesses = {Mat::Identity(n, n)};
  int refinements = 0;
  for (const auto& [d, i] : candidates) {
    if (refinements >= kMaxRefinements || witnesses.size() >= kMaxWitnesses) break;
    const Mat& h = samples_[i];
    const bool in_basin = std::any_of(witnesses.begin(), witnesses.end(), [&](const Mat& w) {
      return numeric_cosets ? (h - w).norm() < kBasinRadius
                            : identity_component_distance(g, w.transpose() * h, gens) <
                                  kBasinRadius;
    });
    if (in_basin) continue;
    ++refinements;
    const auto refined = refine(h);
    if (!refined) {
      ++dropped;
      continue;
    }
    if (std::none_of(witnesses.begin(), witnesses.end(),
                     [&](const Mat& w) { return same_coset(w, *refined); }))
      witnesses.push_back(*refined);
  }

  // Close up under products; catches components the samples missed.
  for (bool grew = true; grew && witnesses.size() < kMaxWitnesses;) {
    grew = false;
    const std::size_t count = witnesses.size();
    for (std::size_t i = 1; i < count && !grew; ++i)
      for (std::size_t j = 1; j < count && !grew; ++j) {
        const Mat p = witnesses[i] * witnesses[j];
        if (!stabilizes(p)) continue;
        if (std::none_of(witnesses.begin(), witnesses.end(),
                         [&](const Mat& w) { return same_coset(w, p); })) {
          witnesses.push_back(p);
          grew = true;
        }
      }
  }
  return witnesses;
}

StabilizerData stabilizer(const ActionModel& a, const Vec& x, std::uint64_t seed,
                          const Tolerance& tol) {
  return StabilizerSearch(a, seed)(x, tol);
}

bool same_stabilizer(const GroupDescriptor& g, const StabilizerData& s1, const StabilizerData& s2,
                     const Tolerance& tol) {
  if (!(s1.subgroup_class == s2.subgroup_class)) return false;
  if (s1.lie_dim != s2.lie_dim) return false;
  if (s1.lie_dim > 0 && !same_subspace(s1.lie_kernel, s2.lie_kernel, tol)) return false;
  if (s1.discrete_witnesses.size() != s2.discrete_witnesses.size()) return false;
  for (const auto& w : s1.discrete_witnesses) {
    const bool found = std::any_of(
        s2.discrete_witnesses.begin(), s2.discrete_witnesses.end(), [&](const Mat& v) {
          return identity_component_distance(g, v.transpose() * w, s1.generators) <= kCosetEps;
        });
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Slice representations

std::string to_string(RepKind kind) {
  switch (kind) {
    case RepKind::FiniteCharacters: return "FiniteCharacters";
    case RepKind::TorusWeights: return "TorusWeights";
    case RepKind::SampledTraces: return "SampledTraces";
  }
  return "?";
}

std::vector<std::vector<int>> sign_normalized(std::vector<std::vector<int>> weights) {
  for (auto& w : weights) {
    const auto lead = std::find_if(w.begin(), w.end(), [](int v) { return v != 0; });
    if (lead != w.end() && *lead < 0)
      for (auto& v : w) v = -v;
  }
  std::sort(weights.begin(), weights.end());
  return weights;
}

std::vector<std::vector<int>> extract_torus_weights(const std::vector<Mat>& generators,
                                                    const std::optional<Mat>& complex_structure,
                                                    const Tolerance& tol) {
  if (generators.empty()) return {};
  const Index d = generators.front().rows();
  const std::size_t r = generators.size();
  for (const auto& a : generators) {
    check_matrix(a);
    if (a.rows() != d || a.cols() != d) throw InputError("weight extraction: size mismatch");
  }
  if (d == 0) return {};
  const auto c = generic_coefficients(r);
  Mat m = Mat::Zero(d, d);
  for (std::size_t j = 0; j < r; ++j) m += c[j] * generators[j];

  bool complex = complex_structure.has_value();
  if (complex) {
    const Mat& j = *complex_structure;
    for (const auto& a : generators)
      if ((j * a - a * j).norm() > 1e-8 * std::max(1.0, a.norm())) complex = false;
  }

  double scale = 1.0;
  for (const auto& a : generators) scale = std::max(scale, a.norm());
  const double cluster_eps = 1e-6 * scale;

  std::vector<std::vector<int>> weights;
  auto push_zero = [&](Index count) {
    for (Index k = 0; k < count; ++k) weights.emplace_back(r, 0);
  };

  if (complex) {
    const Mat& j = *complex_structure;
    Mat h = -j * m;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(h);
    for (const auto& cluster : eigen_clusters(eig.eigenvalues(), cluster_eps)) {
      const Mat v = columns(eig.eigenvectors(), cluster);
      const Index dim = v.cols();
      if (std::abs(eig.eigenvalues()(cluster.front())) <= cluster_eps) {
        push_zero(dim);
        continue;
      }
      if (dim % 2 != 0) throw ExtractionError("weight space of odd real dimension");
      Vec w(static_cast<Index>(r));
      for (std::size_t k = 0; k < r; ++k)
        w(static_cast<Index>(k)) = (v.transpose() * (-j * generators[k]) * v).trace() / dim;
      const auto rounded = rounded_weight(w, tol);
      for (Index k = 0; k < dim / 2; ++k) weights.push_back(rounded);
    }
    std::sort(weights.begin(), weights.end());
    return weights;
  }

  Mat sq = -m * m;
  sq = 0.5 * (sq + sq.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sq);
  for (const auto& cluster : eigen_clusters(eig.eigenvalues(), cluster_eps)) {
    const Mat v = columns(eig.eigenvectors(), cluster);
    const Index dim = v.cols();
    const double mean = eig.eigenvalues()(cluster.front());
    if (std::abs(mean) <= cluster_eps) {
      push_zero(dim);
      continue;
    }
    if (dim % 2 != 0) throw ExtractionError("rotation plane of odd real dimension");
    const double omega = std::sqrt(mean);
    Vec w(static_cast<Index>(r));
    for (std::size_t k = 0; k < r; ++k)
      w(static_cast<Index>(k)) =
          (v.transpose() * generators[k].transpose() * m * v).trace() / (omega * dim);
    const auto rounded = rounded_weight(w, tol);
    for (Index k = 0; k < dim / 2; ++k) weights.push_back(rounded);
  }
  return sign_normalized(weights);
}

std::string SliceRep::canonical_form() const {
  std::ostringstream os;
  os << to_string(kind) << ";" << group_class.to_string() << ";dim=" << slice_dim << ";";
  if (kind == RepKind::TorusWeights) {
    os << "weights=";
    for (const auto& w : sign_normalized(weights)) {
      os << "(";
      for (std::size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
      os << ")";
    }
  } else {
    std::vector<double> sorted = traces;
    std::sort(sorted.begin(), sorted.end());
    os << "traces=";
    for (std::size_t i = 0; i < sorted.size(); ++i) os << (i ? "," : "") << format_number(sorted[i]);
  }
  return os.str();
}

SliceRep slice_representation(const ActionModel& a, const Vec& x, const StabilizerData& stab,
                              std::uint64_t seed, const Tolerance& tol) {
  return slice_representation(a, normal_slice(a, x, tol), stab, seed, tol);
}

SliceRep slice_representation(const ActionModel& a, const NormalSlice& slice,
                              const StabilizerData& stab, std::uint64_t seed,
                              const Tolerance& tol) {
  const GroupDescriptor& g = a.group;
  const Vec& x = slice.frame.point;
  const Mat fs = slice.ambient_basis();
  SliceRep rep;
  rep.slice_dim = slice.slice_dim();
  rep.slice_frame = slice.basis;
  rep.group_class = stab.subgroup_class;

  std::optional<Mat> ambient_j;
  if (a.complex_coordinates) ambient_j = complex_structure(a.manifold.ambient_dim() / 2);
  if (ambient_j && rep.slice_dim > 0) {
    const Mat js = fs.transpose() * *ambient_j * fs;
    if ((js * js + Mat::Identity(rep.slice_dim, rep.slice_dim)).norm() < 1e-8)
      rep.complex_structure = js;
  }
  const bool projective_phase = a.manifold.kind() == ManifoldKind::ComplexProjective;

  for (Index c = 0; c < stab.generators.cols(); ++c) {
    Mat xi = Mat::Zero(x.size(), x.size());
    for (Index j = 0; j < g.dim(); ++j)
      xi += stab.generators(j, c) * a.ambient_generators[static_cast<std::size_t>(j)];
    if (projective_phase) {
      const Mat& j = *ambient_j;
      xi -= (j * x).dot(xi * x) * j;
    }
    rep.generator_images.push_back(fs.transpose() * xi * fs);
  }

  auto image_of = [&](const Mat& h) {
    return Mat(slice.basis.transpose() * differential_of_element(a, h, slice.frame, tol) *
               slice.basis);
  };
  for (const auto& w : stab.discrete_witnesses) rep.element_images.push_back(image_of(w));

  bool commuting = true;
  for (const auto& p : rep.generator_images)
    for (const auto& q : rep.generator_images)
      if ((p * q - q * p).norm() > 1e-8 * std::max(1.0, p.norm() * q.norm())) commuting = false;

  if (stab.lie_dim == 0) {
    rep.kind = RepKind::FiniteCharacters;
    for (const auto& e : rep.element_images) rep.traces.push_back(e.trace());
    return rep;
  }

  if (stab.discrete_witnesses.size() == 1 && commuting) {
    rep.kind = RepKind::TorusWeights;
    rep.weights = extract_torus_weights(rep.generator_images, rep.complex_structure, tol);
    // Cross-check against actual group elements of the identity component.
    std::mt19937_64 rng(seed ^ 0x77e1a7ULL);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int trial = 0; trial < 4; ++trial) {
      Vec t(stab.generators.cols());
      for (Index k = 0; k < t.size(); ++k) t(k) = angle(rng);
      const Mat h = g.exp(stab.generators * t);
      double predicted = 0.0;
      for (const auto& w : rep.weights) {
        double phase = 0.0;
        bool zero = true;
        for (std::size_t k = 0; k < w.size(); ++k) {
          phase += w[k] * t(static_cast<Index>(k));
          zero = zero && w[k] == 0;
        }
        predicted += zero ? 1.0 : 2.0 * std::cos(phase);
      }
      const double actual = image_of(h).trace();
      if (std::abs(actual - predicted) > 1e-6 * std::max<double>(1.0, rep.slice_dim))
        throw ExtractionError("extracted weights do not reproduce sampled slice traces");
    }
    return rep;
  }

  rep.kind = RepKind::SampledTraces;
  for (const auto& w : stab.discrete_witnesses)
    for (int m = 0; m < 8; ++m) {
      Vec t(stab.generators.cols());
      for (Index k = 0; k < t.size(); ++k)
        t(k) = 2.0 * std::numbers::pi * m * static_cast<double>(k + 1) / 8.0;
      rep.traces.push_back(image_of(w * g.exp(stab.generators * t)).trace());
    }
  return rep;
}

bool reps_equivalent(const SliceRep& r1, const SliceRep& r2, const Tolerance& tol,
                     std::string* reason) {
  auto fail = [&](const char* why) {
    if (reason) *reason = why;
    return false;
  };
  if (!classes_conjugate(r1.group_class, r2.group_class)) return fail("different groups");
  if (r1.slice_dim != r2.slice_dim) return fail("different slice dimensions");
  if (r1.kind != r2.kind) return fail("incomparable representation kinds");
  if (r1.kind == RepKind::TorusWeights) {
    if (sign_normalized(r1.weights) != sign_normalized(r2.weights))
      return fail("weight multisets differ");
    return true;
  }
  std::vector<double> a = r1.traces, b = r2.traces;
  if (a.size() != b.size()) return fail("different numbers of sampled traces");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol.match_eps) return fail("trace multisets differ");
  return true;
}

int isostabilizer_local_dim(const GroupDescriptor& g, const StabilizerData& stab,
                            const SliceRep& rep, const Tolerance& tol) {
  const Index dim_g = g.dim();
  const Index k = stab.lie_dim;
  Index normalizer = 0;
  if (dim_g > 0) {
    const Mat q = k > 0 ? orthonormal_span(stab.lie_kernel, tol) : Mat(dim_g, 0);
    const Mat perp = Mat::Identity(dim_g, dim_g) - q * q.transpose();
    Mat constraints(0, dim_g);
    auto append = [&](const Mat& block) {
      Mat next(constraints.rows() + block.rows(), dim_g);
      next << constraints, block;
      constraints = std::move(next);
    };
    for (Index c = 0; c < k; ++c) {
      const Mat kappa = g.lie_element(q.col(c));
      Mat block(dim_g, dim_g);
      for (Index i = 0; i < dim_g; ++i) {
        const Mat& e = g.lie_basis()[static_cast<std::size_t>(i)];
        block.col(i) = perp * g.lie_coordinates(e * kappa - kappa * e).first;
      }
      append(block);
    }
    for (const auto& w : stab.discrete_witnesses) {
      Mat block(dim_g, dim_g);
      for (Index i = 0; i < dim_g; ++i) {
        const Vec e = Vec::Unit(dim_g, i);
        block.col(i) = perp * (e - g.adjoint(w, e));
      }
      append(block);
    }
    normalizer = dim_g - stacked_rank(constraints, tol);
  }

  Index fixed = rep.slice_dim;
  if (rep.slice_dim > 0) {
    Mat stacked(0, rep.slice_dim);
    auto append = [&](const Mat& block) {
      Mat next(stacked.rows() + block.rows(), rep.slice_dim);
      next << stacked, block;
      stacked = std::move(next);
    };
    for (const auto& a : rep.generator_images) append(a);
    for (const auto& e : rep.element_images)
      append(e - Mat::Identity(rep.slice_dim, rep.slice_dim));
    if (stacked.rows() > 0) fixed = rep.slice_dim - stacked_rank(stacked, tol);
  }
  return static_cast<int>(normalizer - k + fixed);
}

}  // namespace orthofold
