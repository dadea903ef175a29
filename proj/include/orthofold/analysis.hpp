#pragma once

// End-to-end pipeline over one catalog action, the executable check battery
// and JSON reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "orthofold/quotient.hpp"

namespace orthofold {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

std::string tool_version();

struct AnalysisOptions {
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  Tolerance tol;
};

struct Analysis {
  ActionModel action;
  AnalysisOptions options;
  SampleCloud cloud;
  PartitionOfM orbit_types;
  PartitionOfM iso;
  KleinPartition klein;
  PartitionOfM inverse;
  /// Empty when the correspondence was not well defined; see correspondence_error.
  std::optional<CorrespondenceReport> corr;
  std::string correspondence_error;
  PrincipalData principal;
  std::vector<SingularityLabel> labels;
  std::optional<StratifiedInterval> interval;
  OrbifoldCriterion orbifold;
};

Analysis analyze(const ActionModel& a, const AnalysisOptions& options);

struct CheckResult {
  std::string action;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Every invariant of the pipeline as a named check, plus the expectations
/// attached to the catalog action.
std::vector<CheckResult> run_checks(const Analysis& an);

struct VerifyRun {
  std::vector<CheckResult> checks;
  /// Per action: analysis summary and checks.
  Json payload;

  bool passed() const;
};

/// Analyses and checks every listed action ("all" expands to the catalog).
/// Pipeline errors are recorded as failed "pipeline" checks.
VerifyRun verify_actions(const std::vector<std::string>& ids, const AnalysisOptions& options);

struct PointReport {
  std::string action;
  Vec point;
  PointRecord record;
  LocalModelFingerprint fingerprint;
  SingularityLabel label;
  Index d_pr = 0;
  SubgroupClass principal_class;
};

/// Single-point record; principal data comes from a cloud of options.samples points.
PointReport classify_point(const ActionModel& a, const Vec& x, const AnalysisOptions& options);

/// Rounds to 12 significant digits.
double round12(double v);

Json to_json(const Analysis& an);
Json to_json(const PointReport& p);
Json to_json(const std::vector<CheckResult>& checks);
Json to_json(const Tolerance& tol);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string payload_hash(const Json& payload);

/// {"schema_version", "tool_version", "report", "generated_at", "payload_hash",
/// "payload"}.
/// Only "payload" enters the hash.
Json envelope(const std::string& kind, Json payload, const std::string& generated_at);

}  // namespace orthofold
