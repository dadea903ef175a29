#include "orthofold/actions.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <regex>

namespace orthofold {

namespace {

constexpr double kRepresentativeEps = 1e-8;

Mat block_diagonal(std::initializer_list<Mat> blocks) {
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

/// kron(g, I_2): the complexification of a real matrix in interleaved coordinates.
Mat complexify(const Mat& g) {
  Mat out = Mat::Zero(2 * g.rows(), 2 * g.cols());
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j) {
      out(2 * i, 2 * j) = g(i, j);
      out(2 * i + 1, 2 * j + 1) = g(i, j);
    }
  return out;
}

Vec unit(Index n, Index i) {
  Vec v = Vec::Zero(n);
  v(i) = 1.0;
  return v;
}

Vec random_unit(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  do {
    for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-6);
  return v.normalized();
}

ActionModel make_action(std::string name, GroupDescriptor group, ManifoldModel manifold) {
  return ActionModel{std::move(name), std::move(group), std::move(manifold), {}, {}, {}, {}, {},
                     false, {}};
}

std::vector<Mat> generators_through(const GroupDescriptor& g,
                                    const std::function<Mat(const Mat&)>& drep) {
  std::vector<Mat> out;
  for (const auto& xi : g.lie_basis()) out.push_back(drep(xi));
  return out;
}

ActionModel s2xs2_so3() {
  ActionModel a = make_action("s2xs2-so3", GroupDescriptor::so3(),
                              ManifoldModel::product_spheres(2, 2));
  a.rep = [](const Mat& g) { return block_diagonal({g, g}); };
  a.ambient_generators = generators_through(a.group, a.rep);
  a.special_points = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5eed0001ULL);
    std::vector<Vec> pts;
    auto pair = [](const Vec& x, const Vec& y) {
      Vec p(6);
      p << x, y;
      return p;
    };
    pts.push_back(pair(unit(3, 0), unit(3, 0)));
    pts.push_back(pair(unit(3, 0), -unit(3, 0)));
    for (int i = 0; i < 24; ++i) {
      const Vec x = random_unit(rng, 3);
      pts.push_back(pair(x, x));
      pts.push_back(pair(x, -x));
    }
    return pts;
  };
  a.interval = IntervalMap{-1.0, 1.0, [](const Vec& x) { return x.head(3).dot(x.tail(3)); }};
  return a;
}

ActionModel rp2_so2() {
  ActionModel a = make_action("rp2-so2", GroupDescriptor::so2(),
                              ManifoldModel::real_projective(2));
  // Rotations about k = e3.
  a.rep = [](const Mat& g) { return block_diagonal({g, Mat::Zero(1, 1)}); };
  a.ambient_generators = generators_through(a.group, a.rep);
  a.rep = [](const Mat& g) { return block_diagonal({g, Mat::Identity(1, 1)}); };
  a.special_points = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5eed0002ULL);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<Vec> pts = {unit(3, 2)};
    // Evenly spaced on the equator, random phase.
    const double phase = angle(rng);
    for (int i = 0; i < 32; ++i) {
      const double t = phase + std::numbers::pi * i / 32.0;
      Vec x(3);
      x << std::cos(t), std::sin(t), 0.0;
      pts.push_back(x);
    }
    return pts;
  };
  a.named_points["k"] = unit(3, 2);
  a.interval = IntervalMap{0.0, 1.0, [](const Vec& x) { return x(2) * x(2); }};
  return a;
}

ActionModel cp2_so3() {
  ActionModel a = make_action("cp2-so3", GroupDescriptor::so3(),
                              ManifoldModel::complex_projective(2));
  a.rep = complexify;
  a.ambient_generators = generators_through(a.group, a.rep);
  a.complex_coordinates = true;
  a.special_points = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5eed0003ULL);
    std::vector<Vec> pts;
    for (int i = 0; i < 24; ++i) {
      // Real point [X]: stabilizer O(2).
      const Vec x = random_unit(rng, 3);
      Vec z = Vec::Zero(6);
      for (int k = 0; k < 3; ++k) z(2 * k) = x(k);
      pts.push_back(z);
    }
    for (int i = 0; i < 24; ++i) {
      // Isotropic point [u + i v] with u, v orthonormal: stabilizer SO(2).
      const Vec u = random_unit(rng, 3);
      Vec v = random_unit(rng, 3);
      v = (v - v.dot(u) * u).normalized();
      Vec z(6);
      for (int k = 0; k < 3; ++k) {
        z(2 * k) = u(k) / std::sqrt(2.0);
        z(2 * k + 1) = v(k) / std::sqrt(2.0);
      }
      pts.push_back(z);
    }
    return pts;
  };
  a.interval = IntervalMap{0.0, 1.0, [](const Vec& z) {
                             Eigen::Vector3d re(z(0), z(2), z(4)), im(z(1), z(3), z(5));
                             const double n2 = z.squaredNorm();
                             const double wedge = re.squaredNorm() * im.squaredNorm() -
                                                  std::pow(re.dot(im), 2);
                             return 1.0 - 4.0 * wedge / (n2 * n2);
                           }};
  a.note = "complexified standard representation g.(X+iY) = gX + i gY";
  return a;
}

ActionModel cp2_u1() {
  ActionModel a = make_action("cp2-u1", GroupDescriptor::u1(),
                              ManifoldModel::complex_projective(2));
  // tau.[z1:z2:z3] = [z1 : tau z2 : tau^2 z3]
  a.rep = [](const Mat& g) { return block_diagonal({Mat::Identity(2, 2), g, g * g}); };
  a.ambient_generators = {block_diagonal(
      {Mat::Zero(2, 2), a.group.lie_basis()[0], 2.0 * a.group.lie_basis()[0]})};
  a.complex_coordinates = true;
  a.special_points = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5eed0004ULL);
    std::vector<Vec> pts = {unit(6, 0), unit(6, 2), unit(6, 4)};
    for (int i = 0; i < 48; ++i) {
      // The {+-1} locus z2 = 0.
      Vec z = random_unit(rng, 6);
      z(2) = z(3) = 0.0;
      pts.push_back(z.normalized());
    }
    return pts;
  };
  a.named_points = {{"P0", unit(6, 0)}, {"P1", unit(6, 2)}, {"P2", unit(6, 4)}};
  return a;
}

ActionModel s2_zn(int n) {
  if (n < 2 || n > 24) throw UnknownActionError("s2-zn(n) needs 2 <= n <= 24");
  std::vector<Mat> elements;
  for (int j = 0; j < n; ++j) {
    const double t = 2.0 * std::numbers::pi * j / n;
    Mat r = Mat::Identity(3, 3);
    r(0, 0) = r(1, 1) = std::cos(t);
    r(1, 0) = std::sin(t);
    r(0, 1) = -std::sin(t);
    elements.push_back(r);
  }
  ActionModel a = make_action("s2-zn(" + std::to_string(n) + ")", GroupDescriptor::finite(std::move(elements)),
                              ManifoldModel::sphere(2));
  a.rep = [](const Mat& g) { return g; };
  a.special_points = [](std::uint64_t) {
    return std::vector<Vec>{unit(3, 2), -unit(3, 2)};
  };
  a.named_points = {{"north", unit(3, 2)}, {"south", -unit(3, 2)}};
  return a;
}

ActionModel cn_tn(int n) {
  if (n < 1 || n > 6) throw UnknownActionError("cn-tn(n) needs 1 <= n <= 6");
  ActionModel a = make_action("cn-tn(" + std::to_string(n) + ")", GroupDescriptor::torus(n),
                              ManifoldModel::euclidean(2 * n));
  a.rep = [](const Mat& g) { return g; };
  a.ambient_generators = a.group.lie_basis();
  a.complex_coordinates = true;
  a.special_points = [n](std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5eed0005ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Vec> pts;
    for (int mask = 1; mask < (1 << n); ++mask) {
      const bool all_zero = mask == (1 << n) - 1;
      const int free_dim = 2 * (n - std::popcount(static_cast<unsigned>(mask)));
      for (int rep = 0; rep < (all_zero ? 1 : 16); ++rep) {
        // Uniform in the unit ball of the coordinate subspace, like the samples.
        Vec z(2 * n);
        for (Index i = 0; i < 2 * n; ++i) z(i) = normal(rng);
        for (int k = 0; k < n; ++k)
          if (mask & (1 << k)) z(2 * k) = z(2 * k + 1) = 0.0;
        if (!all_zero) z *= std::pow(unif(rng), 1.0 / free_dim) / z.norm();
        pts.push_back(z);
      }
    }
    return pts;
  };
  a.named_points["origin"] = Vec::Zero(2 * n);
  return a;
}

ActionModel trivial(int d) {
  if (d < 1 || d > kMaxDim) throw UnknownActionError("trivial(d) needs 1 <= d <= 64");
  ActionModel a = make_action("trivial(" + std::to_string(d) + ")", GroupDescriptor::finite({Mat::Identity(d, d)}),
                              ManifoldModel::euclidean(d));
  a.rep = [](const Mat& g) { return g; };
  a.special_points = [](std::uint64_t) { return std::vector<Vec>{}; };
  return a;
}

std::optional<int> parameter(const std::string& id, const std::string& prefix) {
  const std::regex re("^" + prefix + R"(\((\d{1,2})\)$)");
  std::smatch m;
  if (std::regex_match(id, m, re)) return std::stoi(m[1]);
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// ManifoldModel

ManifoldModel ManifoldModel::sphere(int n) {
  if (n < 1 || n + 1 > kMaxDim) throw InputError("sphere dimension out of range");
  ManifoldModel m;
  m.kind_ = ManifoldKind::Sphere;
  m.n1_ = n;
  return m;
}

ManifoldModel ManifoldModel::product_spheres(int n1, int n2) {
  if (n1 < 1 || n2 < 1 || n1 + n2 + 2 > kMaxDim) throw InputError("sphere dimensions out of range");
  ManifoldModel m;
  m.kind_ = ManifoldKind::ProductSpheres;
  m.n1_ = n1;
  m.n2_ = n2;
  return m;
}

ManifoldModel ManifoldModel::real_projective(int n) {
  ManifoldModel m = sphere(n);
  m.kind_ = ManifoldKind::RealProjective;
  return m;
}

ManifoldModel ManifoldModel::complex_projective(int n) {
  if (n < 1 || 2 * n + 2 > kMaxDim) throw InputError("projective dimension out of range");
  ManifoldModel m;
  m.kind_ = ManifoldKind::ComplexProjective;
  m.n1_ = n;
  return m;
}

ManifoldModel ManifoldModel::euclidean(int d) {
  if (d < 1 || d > kMaxDim) throw InputError("euclidean dimension out of range");
  ManifoldModel m;
  m.kind_ = ManifoldKind::Euclidean;
  m.n1_ = d;
  return m;
}

Index ManifoldModel::ambient_dim() const {
  switch (kind_) {
    case ManifoldKind::Sphere:
    case ManifoldKind::RealProjective: return n1_ + 1;
    case ManifoldKind::ProductSpheres: return n1_ + n2_ + 2;
    case ManifoldKind::ComplexProjective: return 2 * n1_ + 2;
    case ManifoldKind::Euclidean: return n1_;
  }
  return 0;
}

Index ManifoldModel::intrinsic_dim() const {
  switch (kind_) {
    case ManifoldKind::Sphere:
    case ManifoldKind::RealProjective:
    case ManifoldKind::Euclidean: return n1_;
    case ManifoldKind::ProductSpheres: return n1_ + n2_;
    case ManifoldKind::ComplexProjective: return 2 * n1_;
  }
  return 0;
}

std::string ManifoldModel::name() const {
  switch (kind_) {
    case ManifoldKind::Sphere: return "S" + std::to_string(n1_);
    case ManifoldKind::ProductSpheres: return "S" + std::to_string(n1_) + "xS" + std::to_string(n2_);
    case ManifoldKind::RealProjective: return "RP" + std::to_string(n1_);
    case ManifoldKind::ComplexProjective: return "CP" + std::to_string(n1_);
    case ManifoldKind::Euclidean: return "R" + std::to_string(n1_);
  }
  return "?";
}

std::optional<Mat> ManifoldModel::complex_structure() const {
  if (kind_ == ManifoldKind::ComplexProjective) return orthofold::complex_structure(n1_ + 1);
  return std::nullopt;
}

void ManifoldModel::validate(const Vec& x) const {
  if (x.size() != ambient_dim())
    throw InputError(name() + ": representative has dimension " + std::to_string(x.size()) +
                     ", expected " + std::to_string(ambient_dim()));
  if (!x.allFinite()) throw InputError(name() + ": representative has non-finite entries");
  switch (kind_) {
    case ManifoldKind::ProductSpheres:
      if (std::abs(x.head(n1_ + 1).norm() - 1.0) > kRepresentativeEps ||
          std::abs(x.tail(n2_ + 1).norm() - 1.0) > kRepresentativeEps)
        throw InputError(name() + ": factors must be unit vectors");
      break;
    case ManifoldKind::Euclidean: break;
    default:
      if (std::abs(x.norm() - 1.0) > kRepresentativeEps)
        throw InputError(name() + ": representative must be a unit vector");
  }
}

Vec ManifoldModel::normalize(const Vec& x) const {
  if (x.size() != ambient_dim())
    throw InputError(name() + ": expected " + std::to_string(ambient_dim()) + " coordinates");
  if (!x.allFinite()) throw InputError(name() + ": non-finite coordinates");
  switch (kind_) {
    case ManifoldKind::Euclidean: return x;
    case ManifoldKind::ProductSpheres: {
      if (x.head(n1_ + 1).norm() < 1e-12 || x.tail(n2_ + 1).norm() < 1e-12)
        throw InputError(name() + ": zero factor");
      Vec out(x.size());
      out << x.head(n1_ + 1).normalized(), x.tail(n2_ + 1).normalized();
      return out;
    }
    default:
      if (x.norm() < 1e-12) throw InputError(name() + ": zero vector is not a point");
      return x.normalized();
  }
}

Vec ManifoldModel::align(const Vec& x, const Vec& y) const {
  switch (kind_) {
    case ManifoldKind::RealProjective: return x.dot(y) < 0.0 ? Vec(-x) : x;
    case ManifoldKind::ComplexProjective: {
      const Mat j = orthofold::complex_structure(n1_ + 1);
      const Vec jx = j * x;
      const double re = x.dot(y), im = jx.dot(y);
      const double r = std::hypot(re, im);
      if (r < 1e-300) return x;
      return (re / r) * x + (im / r) * jx;
    }
    default: return x;
  }
}

double ManifoldModel::distance(const Vec& x, const Vec& y) const {
  switch (kind_) {
    case ManifoldKind::RealProjective: return std::min((x - y).norm(), (x + y).norm());
    case ManifoldKind::ComplexProjective: {
      // |x - c y| with the phase c aligning y to x; avoids cancellation near 0.
      const Mat j = orthofold::complex_structure(n1_ + 1);
      const Vec jy = j * y;
      const double re = x.dot(y), im = x.dot(jy);
      const double n = std::hypot(re, im);
      if (n == 0.0) return std::sqrt(x.squaredNorm() + y.squaredNorm());
      return (x - (re / n) * y - (im / n) * jy).norm();
    }
    default: return (x - y).norm();
  }
}

// ---------------------------------------------------------------------------
// Catalog

std::vector<std::string> catalog_ids() {
  return {"s2xs2-so3", "rp2-so2", "cp2-so3", "cp2-u1", "s2-zn(5)", "cn-tn(2)"};
}

std::vector<ActionModel> catalog() {
  std::vector<ActionModel> out;
  for (const auto& id : catalog_ids()) out.push_back(lookup(id));
  return out;
}

ActionModel lookup(const std::string& id) {
  if (id == "s2xs2-so3") return s2xs2_so3();
  if (id == "rp2-so2") return rp2_so2();
  if (id == "cp2-so3") return cp2_so3();
  if (id == "cp2-u1") return cp2_u1();
  if (auto n = parameter(id, "s2-zn")) return s2_zn(*n);
  if (auto n = parameter(id, "cn-tn")) return cn_tn(*n);
  if (auto n = parameter(id, "trivial")) return trivial(*n);
  throw UnknownActionError("unknown action '" + id + "'");
}

// ---------------------------------------------------------------------------
// Points, frames, derivatives

std::vector<Vec> sample_points(const ManifoldModel& m, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw InputError("sample_points: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec x(m.ambient_dim());
    for (Index k = 0; k < x.size(); ++k) x(k) = normal(rng);
    if (m.kind() == ManifoldKind::Euclidean) {
      // Uniform in the unit ball; Gaussian tails leave isolated points in epsilon graphs.
      const double n = x.norm();
      if (n > 0.0) x *= std::pow(unif(rng), 1.0 / static_cast<double>(x.size())) / n;
    } else {
      x = m.normalize(x);
    }
    out.push_back(x);
  }
  return out;
}

TangentFrame tangent_frame(const ManifoldModel& m, const Vec& x) {
  m.validate(x);
  const Tolerance tol;
  const Index n = m.ambient_dim();
  TangentFrame f{x, Mat()};
  switch (m.kind()) {
    case ManifoldKind::Euclidean: f.basis = Mat::Identity(n, n); break;
    case ManifoldKind::Sphere:
    case ManifoldKind::RealProjective: f.basis = orthogonal_complement(x, n, tol); break;
    case ManifoldKind::ProductSpheres: {
      const Index split = m.first_factor_ambient();
      Mat normals = Mat::Zero(n, 2);
      normals.col(0).head(split) = x.head(split);
      normals.col(1).tail(n - split) = x.tail(n - split);
      f.basis = orthogonal_complement(normals, n, tol);
      break;
    }
    case ManifoldKind::ComplexProjective: {
      Mat vertical(n, 2);
      vertical.col(0) = x;
      vertical.col(1) = *m.complex_structure() * x;
      f.basis = orthogonal_complement(vertical, n, tol);
      break;
    }
  }
  return f;
}

Mat infinitesimal_action(const ActionModel& a, const Vec& x) {
  const TangentFrame f = tangent_frame(a.manifold, x);
  Mat out(f.basis.cols(), static_cast<Index>(a.ambient_generators.size()));
  for (std::size_t i = 0; i < a.ambient_generators.size(); ++i)
    out.col(static_cast<Index>(i)) = f.basis.transpose() * (a.ambient_generators[i] * x);
  return out;
}

Mat differential_of_element(const ActionModel& a, const Mat& g, const TangentFrame& frame,
                            const Tolerance& tol) {
  const Vec& x = frame.point;
  const Mat r = a.rep(g);
  const Vec y = r * x;
  if (a.manifold.distance(x, y) > std::max(100.0 * tol.match_eps, 1e-8))
    throw InputError("differential_of_element: element does not stabilize the point");
  Mat aligned = r;
  switch (a.manifold.kind()) {
    case ManifoldKind::RealProjective:
      if (x.dot(y) < 0.0) aligned = -r;
      break;
    case ManifoldKind::ComplexProjective: {
      // y = c x with |c| = 1; multiply the pushed-forward vectors by conj(c).
      const Mat j = *a.manifold.complex_structure();
      const double re = x.dot(y), im = (j * x).dot(y);
      const double n = std::hypot(re, im);
      aligned = (re / n) * r - (im / n) * (j * r);
      break;
    }
    default: break;
  }
  return frame.basis.transpose() * aligned * frame.basis;
}

Mat differential_of_element(const ActionModel& a, const Mat& g, const Vec& x,
                            const Tolerance& tol) {
  return differential_of_element(a, g, tangent_frame(a.manifold, x), tol);
}

namespace {

std::string strip(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != '[' &&
        c != ']')
      out += c;
  return out;
}

double parse_real(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("malformed number '" + s + "'");
  }
  if (used != s.size()) throw InputError("malformed number '" + s + "'");
  return v;
}

std::pair<double, double> parse_complex(const std::string& s) {
  if (s.empty()) throw InputError("empty coordinate");
  if (s.back() != 'i') return {parse_real(s), 0.0};
  const std::string body = s.substr(0, s.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t p = body.size(); p-- > 1;)
    if ((body[p] == '+' || body[p] == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
      split = p;
      break;
    }
  auto imag = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_real(t);
  };
  if (split == std::string::npos) return {0.0, imag(body)};
  return {parse_real(body.substr(0, split)), imag(body.substr(split))};
}

}  // namespace

Vec parse_point(const ActionModel& a, const std::string& spec) {
  const std::string s = strip(spec);
  if (auto it = a.named_points.find(s); it != a.named_points.end()) return it->second;
  if (s.empty()) throw InputError("empty point spec");
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    tokens.push_back(s.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  const Index n = a.manifold.ambient_dim();
  Vec x(n);
  if (a.complex_coordinates && static_cast<Index>(tokens.size()) * 2 == n) {
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      const auto [re, im] = parse_complex(tokens[k]);
      x(static_cast<Index>(2 * k)) = re;
      x(static_cast<Index>(2 * k + 1)) = im;
    }
  } else if (static_cast<Index>(tokens.size()) == n) {
    for (std::size_t k = 0; k < tokens.size(); ++k)
      x(static_cast<Index>(k)) = parse_real(tokens[k]);
  } else {
    throw InputError("point '" + spec + "' has " + std::to_string(tokens.size()) +
                     " coordinates; " + a.name + " expects " +
                     (a.complex_coordinates ? std::to_string(n / 2) + " complex or " : "") +
                     std::to_string(n) + " real");
  }
  return a.manifold.normalize(x);
}

}  // namespace orthofold
