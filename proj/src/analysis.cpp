#include "orthofold/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace orthofold {

namespace {

constexpr std::uint64_t kClassifySalt = 0xc1a55f1edULL;

std::string base_name(const std::string& id) { return id.substr(0, id.find('(')); }

Json class_json(const SubgroupClass& c) { return c.to_string(); }

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

std::string flat_weights(const std::vector<std::vector<int>>& weights) {
  std::vector<int> flat;
  for (const auto& w : weights) flat.insert(flat.end(), w.begin(), w.end());
  std::sort(flat.begin(), flat.end());
  std::string out = "{";
  for (std::size_t i = 0; i < flat.size(); ++i) out += (i ? "," : "") + std::to_string(flat[i]);
  return out + "}";
}

Json fingerprint_json(const LocalModelFingerprint& f) {
  Json j;
  j["slice_dim"] = f.slice_dim;
  j["dim_at_origin"] = f.dim_at_origin;
  j["stab_class"] = class_json(f.stab_class);
  j["rep_fingerprint"] = f.rep_fingerprint;
  j["slice_stab_profile"] = f.slice_stab_profile;
  j["free_away_from_origin"] = f.free_away_from_origin;
  j["effective_signature"] = f.effective_signature;
  return j;
}

Json vec_json(const Vec& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(round12(v(i)));
  return j;
}

/// Index of the cloud point closest to x, if within tolerance.
std::optional<std::size_t> find_point(const Analysis& an, const Vec& x) {
  for (std::size_t i = 0; i < an.cloud.size(); ++i)
    if (an.action.manifold.distance(an.cloud.records[i].point, x) < 1e-9) return i;
  return std::nullopt;
}

struct Checker {
  const Analysis& an;
  std::vector<CheckResult> out;

  void add(const std::string& name, bool ok, const std::string& detail) {
    out.push_back({an.action.name, name, ok, detail});
  }
};

void generic_checks(Checker& c) {
  const Analysis& an = c.an;
  const Index dim_m = an.action.manifold.intrinsic_dim();
  const std::size_t n = an.cloud.size();

  int violations = 0;
  for (const auto& r : an.cloud.records)
    if (r.quotient_dim + r.orbit_dim != dim_m) ++violations;
  c.add("dimension_identity", violations == 0,
        std::to_string(violations) + " violations over " + std::to_string(n) + " points");

  const auto& pr = an.principal;
  const bool minimal = std::all_of(an.cloud.records.begin(), an.cloud.records.end(),
                                   [&](const PointRecord& r) { return r.quotient_dim >= pr.d_pr; });
  c.add("principal_dimension", minimal && pr.attained_on_principal,
        "d_pr=" + std::to_string(pr.d_pr) + " principal=" + pr.principal_class.to_string());

  const Index principal_orbit = dim_m - pr.d_pr;
  int mismatched = 0;
  for (const auto& r : an.cloud.records) {
    if (classes_conjugate(r.stab.subgroup_class, pr.principal_class)) continue;
    if ((r.quotient_dim == pr.d_pr) != (r.orbit_dim == principal_orbit)) ++mismatched;
  }
  c.add("exceptional_orbits", mismatched == 0,
        std::to_string(pr.exceptional.size()) + " exceptional points");

  const auto iso_ot = compare_partitions(an.iso, an.orbit_types, n);
  c.add("iso_refines_orbit_type",
        iso_ot == PartitionOrder::PRefinesQ || iso_ot == PartitionOrder::Equal, to_string(iso_ot));
  const auto iso_inv = compare_partitions(an.iso, an.inverse, n);
  c.add("iso_refines_inverse_klein",
        iso_inv == PartitionOrder::PRefinesQ || iso_inv == PartitionOrder::Equal,
        to_string(iso_inv));

  int inconsistent = 0;
  for (const auto& blk : an.iso.blocks)
    for (std::size_t i : blk)
      if (!(an.labels[i] == an.labels[blk.front()])) {
        ++inconsistent;
        break;
      }
  c.add("singularity_constant_on_iso", inconsistent == 0,
        std::to_string(inconsistent) + " mixed blocks");

  const bool constant = std::none_of(an.klein.dims.begin(), an.klein.dims.end(),
                                     [](Index d) { return d < 0; });
  c.add("klein_dimension_constant", constant,
        std::to_string(an.klein.blocks.size()) + " blocks");

  int bad_fp = 0;
  for (const auto& f : an.klein.fingerprints) {
    const bool trivial_profile =
        f.slice_stab_profile == std::vector<std::string>{"Trivial"};
    if (f.dim_at_origin != f.slice_dim || f.free_away_from_origin != trivial_profile) ++bad_fp;
  }
  c.add("fingerprint_invariants", bad_fp == 0, std::to_string(bad_fp) + " violations");

  c.add("correspondence_well_defined", an.corr.has_value(),
        an.corr ? "ok" : an.correspondence_error);
  c.add("correspondence_surjective", an.corr && an.corr->surjective,
        an.corr ? (an.corr->injective ? "bijective" : "non-injective") : "undefined");

  if (an.interval) {
    const IntervalMap& map = *an.action.interval;
    const auto elems = sample_elements(an.action.group, 4, an.options.seed + 0x51);
    double worst = 0.0;
    for (const auto& r : an.cloud.records)
      for (const auto& g : elems)
        worst = std::max(worst, std::abs(map.value(an.action.act(g, r.point)) - map.value(r.point)));
    std::ostringstream os;
    os << "max deviation " << worst;
    c.add("interval_pi_invariant", worst <= an.options.tol.match_eps, os.str());
    c.add("interval_frontier", frontier_check(*an.interval),
          std::to_string(an.interval->strata.size()) + " strata");
  }

  c.add("orbifold_criterion", an.orbifold.consistent(),
        std::string("constant_dimension=") + (an.orbifold.constant_dimension ? "true" : "false") +
            " finite_structure=" + (an.orbifold.finite_structure ? "true" : "false"));
}

std::multiset<Index> klein_dims(const Analysis& an) {
  return {an.klein.dims.begin(), an.klein.dims.end()};
}

std::string dims_string(const Analysis& an) {
  std::string s = "{";
  bool first = true;
  for (Index d : klein_dims(an)) {
    s += (first ? "" : ",") + std::to_string(d);
    first = false;
  }
  return s + "}";
}

void interval_point_check(Checker& c, const std::vector<double>& expected) {
  const Analysis& an = c.an;
  if (!an.interval) {
    c.add("interval_points", false, "no interval model");
    return;
  }
  std::vector<double> pts;
  for (const auto& s : an.interval->strata)
    for (const auto& p : s.pieces)
      if (p.kind == IntervalPiece::Kind::Point) pts.push_back(p.a);
  std::sort(pts.begin(), pts.end());
  bool ok = pts.size() == expected.size();
  for (std::size_t i = 0; ok && i < pts.size(); ++i)
    ok = std::abs(pts[i] - expected[i]) <= an.options.tol.match_eps;
  std::ostringstream os;
  os << "singular values {";
  for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? "," : "") << pts[i];
  os << "}";
  c.add("interval_points", ok, os.str());
}

std::optional<PointRecord> named_record(const Analysis& an, const std::string& name) {
  const auto it = an.action.named_points.find(name);
  if (it == an.action.named_points.end()) return std::nullopt;
  const StabilizerSearch search(an.action, an.options.seed ^ kClassifySalt);
  return analyze_point(an.action, it->second, search, an.options.seed, an.options.tol);
}

void expectation_checks(Checker& c) {
  const Analysis& an = c.an;
  const std::string base = base_name(an.action.name);
  const std::size_t n = an.cloud.size();

  if (base == "s2xs2-so3") {
    c.add("klein_blocks", an.klein.blocks.size() == 2 && klein_dims(an) == std::multiset<Index>{1, 2},
          std::to_string(an.klein.blocks.size()) + " blocks, dims " + dims_string(an));
    interval_point_check(c, {-1.0, 1.0});
  } else if (base == "rp2-so2") {
    c.add("klein_blocks",
          an.klein.blocks.size() == 3 && klein_dims(an) == std::multiset<Index>{1, 1, 2},
          std::to_string(an.klein.blocks.size()) + " blocks, dims " + dims_string(an));
    const bool has_exc = !an.principal.exceptional.empty();
    const SingularityLabel exc =
        has_exc ? an.labels[an.principal.exceptional.front()] : SingularityLabel{};
    c.add("exceptional_label", has_exc && exc == SingularityLabel{SingularityKind::OrbifoldPoint, 2},
          has_exc ? exc.to_string() : "no exceptional point");
    const auto k = named_record(an, "k");
    const SingularityLabel lk =
        k ? classify_singularity(*k, an.principal.d_pr, an.principal.principal_class)
          : SingularityLabel{};
    c.add("fixed_point_label", k && lk.kind == SingularityKind::OrthofoldPoint, lk.to_string());
    c.add("not_orbifold", !an.orbifold.orbifold(), "dimension map takes values " + dims_string(an));
    interval_point_check(c, {0.0, 1.0});
  } else if (base == "cp2-so3") {
    std::vector<std::string> ot;
    for (const auto& l : an.orbit_types.labels) ot.push_back(l.subgroup.to_string());
    std::sort(ot.begin(), ot.end());
    c.add("orbit_types", ot == std::vector<std::string>{"O2", "SO2", "Z2"}, join(ot));
    c.add("klein_blocks", an.klein.blocks.size() == 2,
          std::to_string(an.klein.blocks.size()) + " blocks");
    bool merged = false;
    if (an.corr)
      for (const auto& m : an.corr->merge_witnesses) {
        const std::set<std::string> pair{m.label_a, m.label_b};
        merged = merged || pair == std::set<std::string>{"SO2", "O2"};
      }
    c.add("merge_so2_o2", an.corr && !an.corr->injective && merged,
          an.corr ? std::to_string(an.corr->merge_witnesses.size()) + " merge witnesses"
                  : "undefined");
    const auto order = compare_partitions(an.inverse, an.orbit_types, n);
    c.add("inverse_klein_coarser", order == PartitionOrder::QRefinesP, to_string(order));
    interval_point_check(c, {0.0, 1.0});
  } else if (base == "cp2-u1") {
    const auto p0 = named_record(an, "P0");
    const auto p1 = named_record(an, "P1");
    const auto p2 = named_record(an, "P2");
    if (!p0 || !p1 || !p2) {
      c.add("slice_weights", false, "missing named points");
      return;
    }
    const std::string w0 = flat_weights(p0->slice.weights);
    const std::string w1 = flat_weights(p1->slice.weights);
    const std::string w2 = flat_weights(p2->slice.weights);
    c.add("slice_weights", w0 == "{1,2}" && w1 == "{-1,1}" && w2 == "{-2,-1}",
          "P0 " + w0 + " P1 " + w1 + " P2 " + w2);
    std::string why;
    const bool eq02 = reps_equivalent(p0->slice, p2->slice, an.options.tol);
    const bool eq01 = reps_equivalent(p0->slice, p1->slice, an.options.tol, &why);
    c.add("rep_equivalence", eq02 && !eq01,
          std::string("rho0~rho2 ") + (eq02 ? "true" : "false") + ", rho0~rho1 " +
              (eq01 ? "true" : "false"));
    const auto i0 = find_point(an, p0->point);
    const auto i1 = find_point(an, p1->point);
    const auto i2 = find_point(an, p2->point);
    bool placed = false;
    if (i0 && i1 && i2) {
      const auto block = an.klein.block_of(n);
      placed = block[*i0] == block[*i2] && block[*i0] != block[*i1];
    }
    c.add("klein_placement", placed, placed ? "P0~P2, P1 apart" : "unexpected blocks");
    c.add("split_witness", an.corr && !an.corr->split_witnesses.empty(),
          an.corr ? std::to_string(an.corr->split_witnesses.size()) + " split witnesses"
                  : "undefined");
    const auto order = compare_partitions(an.inverse, an.orbit_types, n);
    c.add("inverse_klein_finer", order == PartitionOrder::PRefinesQ, to_string(order));
  } else if (base == "s2-zn") {
    const auto order = compare_partitions(an.inverse, an.orbit_types, n);
    c.add("klein_equals_orbit_type", order == PartitionOrder::Equal, to_string(order));
    c.add("constant_dimension",
          an.orbifold.constant_dimension && an.cloud.records.front().quotient_dim == 2,
          "dims " + dims_string(an));
    c.add("orbifold", an.orbifold.orbifold(), an.orbifold.orbifold() ? "true" : "false");
  } else if (base == "cn-tn") {
    int bad = 0;
    for (const auto& r : an.cloud.records)
      if (!toric_consistency(an.action, r.point, an.options.tol)) ++bad;
    c.add("toric_depth", bad == 0, std::to_string(bad) + " violations");
  }
}

}  // namespace

std::string tool_version() { return ORTHOFOLD_VERSION; }

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

Analysis analyze(const ActionModel& a, const AnalysisOptions& options) {
  options.tol.validate();
  Analysis an{a, options, {}, {}, {}, {}, {}, std::nullopt, {}, {}, {}, std::nullopt, {}};
  an.cloud = build_cloud(a, options.samples, options.seed, options.tol);
  an.orbit_types = orbit_type_partition(an.cloud);
  an.iso = isostabilizer_decomposition(a, an.cloud, options.tol);
  an.klein = klein_partition(an.cloud, options.tol);
  an.inverse = inverse_klein(an.klein, an.cloud);
  try {
    an.corr = correspondence(an.iso, an.klein, an.cloud.size());
  } catch (const WellDefinednessError& e) {
    an.correspondence_error = e.what();
  }
  an.principal = principal_dimension(an.cloud, an.orbit_types);
  for (const auto& r : an.cloud.records)
    an.labels.push_back(classify_singularity(r, an.principal.d_pr, an.principal.principal_class));
  if (a.interval) an.interval = quotient_interval_model(a, an.cloud, an.klein, options.tol);
  an.orbifold = orbifold_criterion(an.cloud, an.klein, an.principal);
  return an;
}

std::vector<CheckResult> run_checks(const Analysis& an) {
  Checker c{an, {}};
  generic_checks(c);
  expectation_checks(c);
  return c.out;
}

bool VerifyRun::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerifyRun verify_actions(const std::vector<std::string>& ids, const AnalysisOptions& options) {
  std::vector<std::string> list;
  for (const auto& id : ids) {
    if (id == "all") {
      const auto all = catalog_ids();
      list.insert(list.end(), all.begin(), all.end());
    } else {
      list.push_back(id);
    }
  }
  VerifyRun run;
  run.payload["samples"] = options.samples;
  run.payload["seed"] = options.seed;
  run.payload["tolerances"] = to_json(options.tol);
  Json actions = Json::array();
  for (const auto& id : list) {
    const ActionModel a = lookup(id);
    std::vector<CheckResult> checks;
    Json entry;
    try {
      const Analysis an = analyze(a, options);
      checks = run_checks(an);
      entry["analysis"] = to_json(an);
    } catch (const Error& e) {
      checks.push_back({a.name, "pipeline", false, e.what()});
      entry["analysis"] = nullptr;
    }
    entry["checks"] = to_json(checks);
    actions.push_back(std::move(entry));
    run.checks.insert(run.checks.end(), checks.begin(), checks.end());
  }
  run.payload["actions"] = std::move(actions);
  run.payload["passed"] = run.passed();
  return run;
}

PointReport classify_point(const ActionModel& a, const Vec& x, const AnalysisOptions& options) {
  options.tol.validate();
  a.manifold.validate(x);
  const SampleCloud cloud = build_cloud(a, options.samples, options.seed, options.tol);
  const PrincipalData pr = principal_dimension(cloud, orbit_type_partition(cloud));
  PointReport p;
  p.action = a.name;
  p.point = x;
  const StabilizerSearch search(a, options.seed ^ kClassifySalt);
  p.record = analyze_point(a, x, search, options.seed, options.tol);
  p.fingerprint = local_model(p.record.slice, options.seed, options.tol);
  p.label = classify_singularity(p.record, pr.d_pr, pr.principal_class);
  p.d_pr = pr.d_pr;
  p.principal_class = pr.principal_class;
  return p;
}

Json to_json(const Tolerance& tol) {
  Json j;
  j["rank_eps"] = round12(tol.rank_eps);
  j["match_eps"] = round12(tol.match_eps);
  j["cluster_eps_factor"] = round12(tol.cluster_eps_factor);
  return j;
}

Json to_json(const Analysis& an) {
  const std::size_t n = an.cloud.size();
  Json j;
  j["action"] = an.action.name;
  j["manifold"] = an.action.manifold.name();
  j["group"] = an.action.group.name();
  j["samples"] = an.options.samples;
  j["seed"] = an.options.seed;
  j["tolerances"] = to_json(an.options.tol);
  j["cloud"] = {{"points", n},
                {"injected", n - an.cloud.uniform_count},
                {"dropped_candidates", an.cloud.dropped_candidates()}};

  Json ot = Json::array();
  for (std::size_t b = 0; b < an.orbit_types.blocks.size(); ++b) {
    std::set<Index> dims;
    for (std::size_t i : an.orbit_types.blocks[b]) dims.insert(an.cloud.records[i].quotient_dim);
    ot.push_back({{"label", class_json(an.orbit_types.labels[b].subgroup)},
                  {"points", an.orbit_types.blocks[b].size()},
                  {"dims", dims}});
  }
  j["orbit_types"] = {{"block_count", an.orbit_types.blocks.size()}, {"blocks", ot}};

  // Isostabilizer blocks can be numerous; they are summarised per class.
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_class;
  for (std::size_t b = 0; b < an.iso.blocks.size(); ++b) {
    auto& e = per_class[an.iso.labels[b].subgroup.to_string()];
    ++e.first;
    e.second += an.iso.blocks[b].size();
  }
  Json iso = Json::array();
  for (const auto& [label, e] : per_class)
    iso.push_back({{"label", label}, {"blocks", e.first}, {"points", e.second}});
  j["isostabilizer"] = {{"block_count", an.iso.blocks.size()},
                        {"by_class", iso},
                        {"vs_orbit_type", to_string(compare_partitions(an.iso, an.orbit_types, n))}};

  Json kl = Json::array();
  for (std::size_t b = 0; b < an.klein.blocks.size(); ++b)
    kl.push_back({{"points", an.klein.blocks[b].size()},
                  {"dim", an.klein.dims[b]},
                  {"fingerprint", fingerprint_json(an.klein.fingerprints[b])}});
  j["klein"] = {{"label", "fingerprint-Klein"},
                {"block_count", an.klein.blocks.size()},
                {"blocks", kl}};
  j["inverse_klein"] = {{"block_count", an.inverse.blocks.size()},
                        {"vs_orbit_type",
                         to_string(compare_partitions(an.inverse, an.orbit_types, n))}};

  Json corr;
  corr["well_defined"] = an.corr.has_value();
  if (an.corr) {
    corr["map"] = an.corr->map;
    corr["surjective"] = an.corr->surjective;
    corr["injective"] = an.corr->injective;
    Json merges = Json::array();
    for (const auto& m : an.corr->merge_witnesses)
      merges.push_back({{"iso_blocks", {m.iso_a, m.iso_b}},
                        {"labels", {m.label_a, m.label_b}},
                        {"klein_block", m.klein}});
    corr["merge_witnesses"] = merges;
    Json splits = Json::array();
    for (const auto& s : an.corr->split_witnesses)
      splits.push_back({{"orbit_type", s.orbit_type},
                        {"label", s.label},
                        {"klein_blocks", s.klein_blocks}});
    corr["split_witnesses"] = splits;
  } else {
    corr["error"] = an.correspondence_error;
  }
  j["correspondence"] = corr;

  j["principal"] = {{"d_pr", an.principal.d_pr},
                    {"class", class_json(an.principal.principal_class)},
                    {"attained_on_principal", an.principal.attained_on_principal},
                    {"exceptional_points", an.principal.exceptional.size()}};

  std::map<std::string, std::size_t> table;
  for (const auto& l : an.labels) ++table[l.to_string()];
  Json sing = Json::array();
  for (const auto& [label, count] : table) sing.push_back({{"label", label}, {"points", count}});
  j["singularities"] = sing;

  if (an.interval) {
    Json strata = Json::array();
    for (const auto& s : an.interval->strata) {
      Json pieces = Json::array();
      for (const auto& p : s.pieces) {
        if (p.kind == IntervalPiece::Kind::Point)
          pieces.push_back({{"point", round12(p.a)}});
        else
          pieces.push_back({{"open", {round12(p.a), round12(p.b)}}});
      }
      strata.push_back({{"klein_block", s.source}, {"pieces", pieces}});
    }
    j["interval"] = {{"lo", round12(an.interval->lo)},
                     {"hi", round12(an.interval->hi)},
                     {"strata", strata},
                     {"frontier", frontier_check(*an.interval)}};
  } else {
    j["interval"] = nullptr;
  }
  j["orbifold"] = {{"constant_dimension", an.orbifold.constant_dimension},
                   {"finite_structure", an.orbifold.finite_structure},
                   {"orbifold", an.orbifold.orbifold()}};
  return j;
}

Json to_json(const PointReport& p) {
  Json j;
  j["action"] = p.action;
  j["point"] = vec_json(p.point);
  j["stabilizer"] = class_json(p.record.stab.subgroup_class);
  j["stabilizer_components"] = p.record.stab.discrete_witnesses.size();
  j["orbit_dim"] = p.record.orbit_dim;
  j["quotient_dim"] = p.record.quotient_dim;
  j["d_pr"] = p.d_pr;
  j["principal_class"] = class_json(p.principal_class);
  j["singularity"] = p.label.to_string();
  j["slice_rep"] = {{"kind", to_string(p.record.slice.kind)},
                    {"canonical_form", p.record.slice.canonical_form()}};
  j["local_model"] = fingerprint_json(p.fingerprint);
  return j;
}

Json to_json(const std::vector<CheckResult>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks)
    arr.push_back({{"action", c.action}, {"check", c.name}, {"passed", c.passed},
                   {"detail", c.detail}});
  return arr;
}

std::string payload_hash(const Json& payload) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : payload.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json envelope(const std::string& kind, Json payload, const std::string& generated_at) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = tool_version();
  j["report"] = kind;
  j["generated_at"] = generated_at;
  j["payload_hash"] = "fnv1a64:" + payload_hash(payload);
  j["payload"] = std::move(payload);
  return j;
}

}  // namespace orthofold
