#include "orthofold/groups.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace orthofold {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Mat rotation2(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

Mat so2_generator() {
  Mat e = Mat::Zero(2, 2);
  e(1, 0) = 1.0;
  e(0, 1) = -1.0;
  return e;
}

Mat block_diagonal(const std::vector<Mat>& blocks) {
  Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  Mat out = Mat::Zero(n, n);
  Index at = 0;
  for (const auto& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

Mat rodrigues(const Vec& w) {
  const double theta = w.norm();
  Mat k(3, 3);
  k << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
  if (theta < 1e-12) return Mat::Identity(3, 3) + k;
  return Mat::Identity(3, 3) + (std::sin(theta) / theta) * k +
         ((1.0 - std::cos(theta)) / (theta * theta)) * k * k;
}

bool near(const Mat& a, const Mat& b, double eps) { return (a - b).norm() <= eps; }

double round6(double v) { return std::round(v * 1e6) / 1e6 + 0.0; }

}  // namespace

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Finite: return "Finite";
    case GroupKind::Torus: return "Torus";
    case GroupKind::SO2: return "SO2";
    case GroupKind::O2: return "O2";
    case GroupKind::SO3: return "SO3";
    case GroupKind::U1: return "U1";
    case GroupKind::Product: return "Product";
    case GroupKind::Generated: return "Generated";
  }
  return "?";
}

GroupDescriptor GroupDescriptor::finite(std::vector<Mat> elements, double eps) {
  if (elements.empty()) throw InputError("finite group needs at least one element");
  const Index n = elements.front().rows();
  for (const auto& e : elements) {
    check_matrix(e);
    if (e.rows() != n || e.cols() != n) throw InputError("finite group: mixed matrix sizes");
    if (!near(e.transpose() * e, Mat::Identity(n, n), eps))
      throw InputError("finite group: element is not orthogonal");
  }
  auto contains = [&](const Mat& m) {
    return std::any_of(elements.begin(), elements.end(),
                       [&](const Mat& e) { return near(e, m, eps); });
  };
  if (!contains(Mat::Identity(n, n))) throw InputError("finite group: identity missing");
  for (const auto& a : elements) {
    if (!contains(a.transpose())) throw InputError("finite group: not closed under inverse");
    for (const auto& b : elements)
      if (!contains(a * b)) throw InputError("finite group: not closed under product");
  }
  GroupDescriptor g;
  g.kind_ = GroupKind::Finite;
  g.rep_dim_ = n;
  g.elements_ = std::move(elements);
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::torus(int rank) {
  if (rank < 1 || 2 * rank > kMaxDim) throw InputError("torus rank out of range");
  GroupDescriptor g;
  g.kind_ = GroupKind::Torus;
  g.rep_dim_ = 2 * rank;
  for (int i = 0; i < rank; ++i) {
    Mat e = Mat::Zero(2 * rank, 2 * rank);
    e.block(2 * i, 2 * i, 2, 2) = so2_generator();
    g.lie_basis_.push_back(e);
  }
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::so2() {
  GroupDescriptor g;
  g.kind_ = GroupKind::SO2;
  g.rep_dim_ = 2;
  g.lie_basis_ = {so2_generator()};
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::u1() {
  GroupDescriptor g = so2();
  g.kind_ = GroupKind::U1;
  return g;
}

GroupDescriptor GroupDescriptor::o2() {
  GroupDescriptor g = so2();
  g.kind_ = GroupKind::O2;
  Mat reflection = Mat::Identity(2, 2);
  reflection(1, 1) = -1.0;
  g.elements_ = {Mat::Identity(2, 2), reflection};
  return g;
}

GroupDescriptor GroupDescriptor::so3() {
  GroupDescriptor g;
  g.kind_ = GroupKind::SO3;
  g.rep_dim_ = 3;
  for (int axis = 0; axis < 3; ++axis) {
    Vec w = Vec::Zero(3);
    w(axis) = 1.0;
    Mat l(3, 3);
    l << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
    g.lie_basis_.push_back(l);
  }
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::product(const std::vector<GroupDescriptor>& factors) {
  if (factors.empty()) throw InputError("product of no groups");
  GroupDescriptor g;
  g.kind_ = GroupKind::Product;
  g.factors_ = factors;
  for (const auto& f : factors) g.rep_dim_ += f.rep_dim();
  if (g.rep_dim_ > kMaxDim) throw InputError("product group too large");
  Index at = 0;
  for (const auto& f : factors) {
    for (const auto& l : f.lie_basis()) {
      Mat e = Mat::Zero(g.rep_dim_, g.rep_dim_);
      e.block(at, at, l.rows(), l.cols()) = l;
      g.lie_basis_.push_back(e);
    }
    at += f.rep_dim();
  }
  // Component representatives: products of the factors' representatives.
  std::vector<Mat> reps = {Mat::Identity(g.rep_dim_, g.rep_dim_)};
  at = 0;
  for (const auto& f : factors) {
    std::vector<Mat> fr = f.kind() == GroupKind::Finite || f.kind() == GroupKind::O2 ||
                                  f.kind() == GroupKind::Product ||
                                  f.kind() == GroupKind::Generated
                              ? f.elements()
                              : std::vector<Mat>{};
    if (!fr.empty()) {
      std::vector<Mat> next;
      for (const auto& r : reps)
        for (const auto& e : fr) {
          Mat m = r;
          m.block(at, at, e.rows(), e.cols()) = e;
          next.push_back(m);
        }
      reps = std::move(next);
    }
    at += f.rep_dim();
  }
  g.elements_ = std::move(reps);
  g.finish();
  return g;
}

GroupDescriptor GroupDescriptor::generated(std::vector<Mat> generators,
                                           std::vector<Mat> components) {
  GroupDescriptor g;
  g.kind_ = GroupKind::Generated;
  Index n = 0;
  if (!generators.empty()) n = generators.front().rows();
  else if (!components.empty()) n = components.front().rows();
  else throw InputError("generated group needs generators or elements");
  for (const auto& m : generators) {
    check_matrix(m);
    if (m.rows() != n || m.cols() != n) throw InputError("generated group: size mismatch");
  }
  g.rep_dim_ = n;
  g.lie_basis_ = std::move(generators);
  g.finish();
  components.insert(components.begin(), Mat::Identity(n, n));
  const Mat all = Mat::Identity(g.dim(), g.dim());
  g.elements_ = component_representatives(g, components, all, 1e-6);
  return g;
}

void GroupDescriptor::finish() {
  const Index d = dim();
  basis_flat_.resize(rep_dim_ * rep_dim_, d);
  for (Index i = 0; i < d; ++i)
    basis_flat_.col(i) = Eigen::Map<const Vec>(lie_basis_[i].data(), rep_dim_ * rep_dim_);
  if (d > 0)
    basis_pinv_ = basis_flat_.completeOrthogonalDecomposition().pseudoInverse();
  else
    basis_pinv_.resize(0, rep_dim_ * rep_dim_);
}

bool GroupDescriptor::connected() const {
  switch (kind_) {
    case GroupKind::Finite: return elements_.size() == 1;
    case GroupKind::O2: return false;
    case GroupKind::Product:
    case GroupKind::Generated: return elements_.size() <= 1;
    default: return true;
  }
}

bool GroupDescriptor::abelian() const {
  switch (kind_) {
    case GroupKind::Torus:
    case GroupKind::SO2:
    case GroupKind::U1: return true;
    case GroupKind::O2:
    case GroupKind::SO3: return false;
    case GroupKind::Product:
      return std::all_of(factors_.begin(), factors_.end(),
                         [](const GroupDescriptor& f) { return f.abelian(); });
    default: break;
  }
  std::vector<Mat> all = elements_;
  all.insert(all.end(), lie_basis_.begin(), lie_basis_.end());
  for (const auto& a : all)
    for (const auto& b : all)
      if (!near(a * b, b * a, 1e-9)) return false;
  return true;
}

bool GroupDescriptor::integral_lattice() const {
  if (kind_ == GroupKind::SO3) return false;
  if (kind_ == GroupKind::Product)
    return std::all_of(factors_.begin(), factors_.end(),
                       [](const GroupDescriptor& f) { return f.integral_lattice(); });
  return true;
}

std::string GroupDescriptor::name() const {
  switch (kind_) {
    case GroupKind::Finite: return "Finite(" + std::to_string(elements_.size()) + ")";
    case GroupKind::Torus: return "Torus(" + std::to_string(dim()) + ")";
    case GroupKind::Product: {
      std::string s = "Product(";
      for (std::size_t i = 0; i < factors_.size(); ++i)
        s += (i ? "," : "") + factors_[i].name();
      return s + ")";
    }
    case GroupKind::Generated:
      return "Generated(dim=" + std::to_string(dim()) +
             ",components=" + std::to_string(elements_.size()) + ")";
    default: return to_string(kind_);
  }
}

Mat GroupDescriptor::lie_element(const Vec& coeffs) const {
  Mat m = Mat::Zero(rep_dim_, rep_dim_);
  for (Index i = 0; i < dim(); ++i) m += coeffs(i) * lie_basis_[i];
  return m;
}

Mat GroupDescriptor::exp(const Vec& coeffs) const {
  if (coeffs.size() != dim()) throw InputError("exp: coefficient count mismatch");
  switch (kind_) {
    case GroupKind::Finite: return Mat::Identity(rep_dim_, rep_dim_);
    case GroupKind::SO2:
    case GroupKind::U1:
    case GroupKind::O2: return rotation2(coeffs(0));
    case GroupKind::Torus: {
      Mat m = Mat::Zero(rep_dim_, rep_dim_);
      for (Index i = 0; i < dim(); ++i) m.block(2 * i, 2 * i, 2, 2) = rotation2(coeffs(i));
      return m;
    }
    case GroupKind::SO3: return rodrigues(coeffs);
    case GroupKind::Product: {
      std::vector<Mat> blocks;
      Index at = 0;
      for (const auto& f : factors_) {
        blocks.push_back(f.exp(coeffs.segment(at, f.dim())));
        at += f.dim();
      }
      return block_diagonal(blocks);
    }
    case GroupKind::Generated: return lie_element(coeffs).exp();
  }
  return Mat::Identity(rep_dim_, rep_dim_);
}

std::pair<Vec, double> GroupDescriptor::lie_coordinates(const Mat& xi) const {
  const Eigen::Map<const Vec> flat(xi.data(), xi.size());
  if (dim() == 0) return {Vec(0), flat.norm()};
  Vec c = basis_pinv_ * flat;
  return {c, (basis_flat_ * c - flat).norm()};
}

Vec GroupDescriptor::adjoint(const Mat& w, const Vec& coeffs) const {
  return lie_coordinates(w * lie_element(coeffs) * w.transpose()).first;
}

std::vector<Mat> sample_elements(const GroupDescriptor& g, std::size_t count,
                                 std::uint64_t seed) {
  if (count < 1) throw InputError("sample_elements: count must be >= 1");
  if (g.kind() == GroupKind::Finite) return g.elements();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Mat> out;
  out.reserve(count);
  switch (g.kind()) {
    case GroupKind::SO3:
      for (std::size_t i = 0; i < count; ++i) {
        Eigen::Vector4d q(normal(rng), normal(rng), normal(rng), normal(rng));
        q.normalize();
        Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
        out.emplace_back(quat.toRotationMatrix());
      }
      return out;
    case GroupKind::O2: {
      std::uniform_int_distribution<int> coin(0, 1);
      for (std::size_t i = 0; i < count; ++i) {
        const double a = angle(rng);
        const int flip = coin(rng);
        out.push_back(g.elements()[static_cast<std::size_t>(flip)] * rotation2(a));
      }
      return out;
    }
    case GroupKind::Product: {
      std::vector<std::vector<Mat>> per_factor;
      std::uint64_t s = seed;
      for (const auto& f : g.factors()) {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        per_factor.push_back(sample_elements(f, count, s));
      }
      for (std::size_t i = 0; i < count; ++i) {
        std::vector<Mat> blocks;
        for (const auto& samples : per_factor) blocks.push_back(samples[i % samples.size()]);
        out.push_back(block_diagonal(blocks));
      }
      return out;
    }
    case GroupKind::Generated: {
      std::uniform_int_distribution<std::size_t> pick(0, g.elements().size() - 1);
      for (std::size_t i = 0; i < count; ++i) {
        Vec t(g.dim());
        for (Index j = 0; j < g.dim(); ++j) t(j) = angle(rng);
        const Mat& c = g.elements()[pick(rng)];
        out.push_back(c * g.exp(t));
      }
      return out;
    }
    default:
      for (std::size_t i = 0; i < count; ++i) {
        Vec t(g.dim());
        for (Index j = 0; j < g.dim(); ++j) t(j) = angle(rng);
        out.push_back(g.exp(t));
      }
      return out;
  }
}

Mat canonical_generators(const GroupDescriptor& g, const Mat& kernel, const Tolerance& tol) {
  if (kernel.cols() == 0) return Mat(g.dim(), 0);
  const Mat rows = reduced_row_echelon(orthonormal_span(kernel, tol).transpose(), 1e-9);
  Mat out(g.dim(), rows.rows());
  for (Index r = 0; r < rows.rows(); ++r) {
    Vec v = rows.row(r).transpose();
    if (g.integral_lattice()) {
      for (int m = 1; m <= 60; ++m) {
        const Vec scaled = m * v;
        if ((scaled - scaled.array().round().matrix()).cwiseAbs().maxCoeff() < 1e-6) {
          v = scaled.array().round().matrix();
          long gcd = 0;
          for (Index i = 0; i < v.size(); ++i) gcd = std::gcd(gcd, std::lround(std::abs(v(i))));
          if (gcd > 1) v /= static_cast<double>(gcd);
          break;
        }
      }
    } else {
      v.normalize();
    }
    out.col(r) = v;
  }
  return out;
}

namespace {

double numeric_component_distance(const GroupDescriptor& g, const Mat& h, const Mat& gens) {
  const Index k = gens.cols();
  std::vector<Mat> algebra;
  for (Index j = 0; j < k; ++j) algebra.push_back(g.lie_element(gens.col(j)));
  const int per_axis = k == 1 ? 12 : k == 2 ? 8 : k == 3 ? 4 : 3;
  Index total = 1;
  for (Index j = 0; j < k; ++j) total *= per_axis;
  double best = std::numeric_limits<double>::infinity();
  for (Index start = 0; start < total; ++start) {
    Vec t(k);
    Index code = start;
    for (Index j = 0; j < k; ++j) {
      t(j) = kTwoPi * static_cast<double>(code % per_axis) / per_axis;
      code /= per_axis;
    }
    double res = 0.0;
    for (int it = 0; it < 25; ++it) {
      Mat x = Mat::Zero(h.rows(), h.cols());
      for (Index j = 0; j < k; ++j) x += t(j) * algebra[static_cast<std::size_t>(j)];
      const Mat e = x.exp();
      const Mat r = e - h;
      res = r.norm();
      if (res < 1e-13) break;
      Mat jac(h.size(), k);
      for (Index j = 0; j < k; ++j) {
        const Mat d = e * algebra[static_cast<std::size_t>(j)];
        jac.col(j) = Eigen::Map<const Vec>(d.data(), d.size());
      }
      const Vec step = jac.completeOrthogonalDecomposition().solve(
          -Eigen::Map<const Vec>(r.data(), r.size()));
      t += step;
      if (step.norm() < 1e-14) break;
    }
    best = std::min(best, res);
    if (best < 1e-10) break;
  }
  return best;
}

double torus_component_distance(const Mat& h, const Mat& gens) {
  const Index r = h.rows() / 2;
  Vec theta(r);
  for (Index i = 0; i < r; ++i) theta(i) = std::atan2(h(2 * i + 1, 2 * i), h(2 * i, 2 * i));
  Mat proj = Mat::Identity(r, r);
  if (gens.cols() > 0) {
    const Mat q = orthonormal_span(gens, Tolerance{});
    proj -= q * q.transpose();
  }
  const int span = r <= 4 ? 2 : 1;
  const int width = 2 * span + 1;
  Index total = 1;
  for (Index i = 0; i < r; ++i) total *= width;
  double best = std::numeric_limits<double>::infinity();
  for (Index code = 0; code < total; ++code) {
    Vec shift(r);
    Index c = code;
    for (Index i = 0; i < r; ++i) {
      shift(i) = static_cast<double>(c % width - span);
      c /= width;
    }
    best = std::min(best, (proj * (theta + kTwoPi * shift)).norm());
  }
  return best;
}

}  // namespace

double identity_component_distance(const GroupDescriptor& g, const Mat& h, const Mat& gens) {
  const Index k = gens.cols();
  const Index n = h.rows();
  if (k == 0) return (h - Mat::Identity(n, n)).norm();
  switch (g.kind()) {
    case GroupKind::SO2:
    case GroupKind::U1: return 0.0;
    case GroupKind::O2: return h.determinant() > 0.0 ? 0.0 : 2.0;
    case GroupKind::SO3:
      if (k == 3) return 0.0;
      if (k == 1) {
        const Vec axis = gens.col(0).normalized();
        return (h * axis - axis).norm();
      }
      return numeric_component_distance(g, h, gens);
    case GroupKind::Torus: return torus_component_distance(h, gens);
    default: return numeric_component_distance(g, h, gens);
  }
}

std::vector<Mat> component_representatives(const GroupDescriptor& g,
                                           const std::vector<Mat>& elements,
                                           const Mat& gens, double eps) {
  std::vector<Mat> reps;
  for (const auto& e : elements) {
    const bool seen = std::any_of(reps.begin(), reps.end(), [&](const Mat& r) {
      return identity_component_distance(g, r.transpose() * e, gens) <= eps;
    });
    if (!seen) reps.push_back(e);
  }
  return reps;
}

std::string to_string(SubgroupLabel label) {
  switch (label) {
    case SubgroupLabel::Trivial: return "Trivial";
    case SubgroupLabel::Zn: return "Zn";
    case SubgroupLabel::SO2: return "SO2";
    case SubgroupLabel::O2: return "O2";
    case SubgroupLabel::U1: return "U1";
    case SubgroupLabel::FullGroup: return "FullGroup";
    case SubgroupLabel::Other: return "Other";
  }
  return "?";
}

std::string to_string(ComponentHint hint) {
  switch (hint) {
    case ComponentHint::Connected: return "connected";
    case ComponentHint::TwoComponents: return "two_components";
    case ComponentHint::Finite: return "finite";
    case ComponentHint::Unknown: return "unknown";
  }
  return "?";
}

std::string SubgroupClass::to_string() const {
  switch (label) {
    case SubgroupLabel::Zn: return "Z" + std::to_string(order);
    case SubgroupLabel::Other: {
      std::ostringstream os;
      os << "Other(lie_dim=" << lie_dim << "," << orthofold::to_string(component_hint)
         << ",order=" << order << ")";
      return os.str();
    }
    default: return orthofold::to_string(label);
  }
}

SubgroupClass classify_subgroup(const GroupDescriptor& g, const Mat& stab_lie_basis,
                                const std::vector<Mat>& fixed_elements, const Tolerance& tol) {
  const Index n = g.rep_dim();
  const Index k = stab_lie_basis.cols();
  if (k > 0 && stab_lie_basis.rows() != g.dim())
    throw ClassificationError("stabilizer algebra has the wrong coordinate dimension");
  const Mat gens = canonical_generators(g, stab_lie_basis, tol);
  const double eps = std::max(100.0 * tol.match_eps, 1e-8);

  // Every witness must normalise the Lie span.
  const Mat q = orthonormal_span(stab_lie_basis, tol);
  for (const auto& w : fixed_elements) {
    if (w.rows() != n || w.cols() != n)
      throw ClassificationError("witness is not an element of the group");
    for (Index j = 0; j < k; ++j) {
      const Vec ad = g.adjoint(w, gens.col(j));
      const Vec off = ad - q * (q.transpose() * ad);
      if (off.norm() > eps * std::max(1.0, gens.col(j).norm()))
        throw ClassificationError("witness does not normalise the stabilizer algebra");
    }
  }

  std::vector<Mat> all = {Mat::Identity(n, n)};
  all.insert(all.end(), fixed_elements.begin(), fixed_elements.end());
  const std::vector<Mat> reps = component_representatives(g, all, gens, eps);

  SubgroupClass c;
  c.lie_dim = static_cast<int>(k);
  c.order = static_cast<int>(reps.size());
  for (const auto& r : reps) c.traces.push_back(round6(r.trace()));
  std::sort(c.traces.begin(), c.traces.end());

  const int components = c.order;
  if (k == 0) {
    c.component_hint = ComponentHint::Finite;
    if (components == 1) {
      c.label = SubgroupLabel::Trivial;
      return c;
    }
    const bool cyclic = std::any_of(reps.begin(), reps.end(), [&](const Mat& r) {
      Mat p = r;
      for (int m = 1; m < components; ++m) {
        if (near(p, Mat::Identity(n, n), eps)) return false;
        p = p * r;
      }
      return near(p, Mat::Identity(n, n), eps);
    });
    c.label = cyclic ? SubgroupLabel::Zn : SubgroupLabel::Other;
    return c;
  }

  c.component_hint = components == 1   ? ComponentHint::Connected
                     : components == 2 ? ComponentHint::TwoComponents
                                       : ComponentHint::Unknown;
  if (k == 1 && components == 1) {
    c.label = g.unitary() ? SubgroupLabel::U1 : SubgroupLabel::SO2;
    return c;
  }
  if (k == 1 && components == 2) {
    const Vec ad = g.adjoint(reps[1], gens.col(0));
    if ((ad + gens.col(0)).norm() <= eps * std::max(1.0, gens.col(0).norm())) {
      c.label = SubgroupLabel::O2;
      return c;
    }
  }
  if (k == g.dim() && components == 1) {
    c.label = SubgroupLabel::FullGroup;
    return c;
  }
  c.label = SubgroupLabel::Other;
  return c;
}

bool classes_conjugate(const SubgroupClass& a, const SubgroupClass& b) {
  if (a.label != b.label) return false;
  switch (a.label) {
    case SubgroupLabel::Zn: return a.order == b.order;
    case SubgroupLabel::Other:
      if (a.lie_dim != b.lie_dim || a.component_hint != b.component_hint ||
          a.order != b.order || a.traces.size() != b.traces.size())
        return false;
      for (std::size_t i = 0; i < a.traces.size(); ++i)
        if (std::abs(a.traces[i] - b.traces[i]) > 1e-6) return false;
      return true;
    default: return true;
  }
}

bool catalog_complete(const SubgroupClass& a, const SubgroupClass& b) {
  return !(a.label == SubgroupLabel::Other && b.label == SubgroupLabel::Other);
}

}  // namespace orthofold
