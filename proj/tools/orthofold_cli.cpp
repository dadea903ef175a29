// orthofold: analyze | verify | classify | catalog

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "orthofold/analysis.hpp"

using namespace orthofold;

namespace {

enum Exit { kOk = 0, kFailed = 1, kBadInput = 2, kPipeline = 3 };

struct CommonFlags {
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  Tolerance tol;
  std::string out;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_out) {
  cmd->add_option("--samples", f.samples, "Uniform samples per action")->capture_default_str();
  f.seed_opt = cmd->add_option("--seed", f.seed, "RNG seed (default $ORTHOFOLD_SEED or 0)");
  cmd->add_option("--rank-eps", f.tol.rank_eps, "Relative singular-value cutoff")
      ->capture_default_str();
  cmd->add_option("--match-eps", f.tol.match_eps, "Element and weight matching tolerance")
      ->capture_default_str();
  cmd->add_option("--cluster-eps-factor", f.tol.cluster_eps_factor,
                  "Epsilon-graph radius in median nearest-neighbour distances")
      ->capture_default_str();
  if (with_out) cmd->add_option("--out", f.out, "Write the report to this file");
}

AnalysisOptions options_from(const CommonFlags& f) {
  AnalysisOptions o;
  o.samples = f.samples;
  o.seed = f.seed;
  if (f.seed_opt->count() == 0)
    if (const char* env = std::getenv("ORTHOFOLD_SEED")) {
      try {
        o.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw InputError("ORTHOFOLD_SEED is not an unsigned integer: " + std::string(env));
      }
    }
  o.tol = f.tol;
  o.tol.validate();
  if (o.samples < 1) throw InputError("--samples must be at least 1");
  return o;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const Json& doc, const std::string& out) {
  const std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw InputError("cannot write " + out);
  f << text;
}

int cmd_analyze(const std::string& id, const CommonFlags& flags) {
  const AnalysisOptions o = options_from(flags);
  const ActionModel a = lookup(id);
  const Analysis an = analyze(a, o);
  emit(envelope("analyze", to_json(an), utc_now()), flags.out);
  if (!an.corr) {
    std::cerr << "orthofold: " << an.correspondence_error << "\n";
    return kPipeline;
  }
  return kOk;
}

int cmd_verify(const std::vector<std::string>& ids, const CommonFlags& flags) {
  const AnalysisOptions o = options_from(flags);
  for (const auto& id : ids)
    if (id != "all") lookup(id);
  const VerifyRun run = verify_actions(ids, o);
  std::size_t failed = 0;
  for (const auto& c : run.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.action << " " << c.name << ": " << c.detail
              << "\n";
    if (!c.passed) ++failed;
  }
  std::cout << (failed == 0 ? "verify: all " : "verify: ")
            << (failed == 0 ? std::to_string(run.checks.size()) + " checks passed"
                            : std::to_string(failed) + " of " +
                                  std::to_string(run.checks.size()) + " checks failed")
            << "\n";
  if (!flags.out.empty()) emit(envelope("verify", run.payload, utc_now()), flags.out);
  return failed == 0 ? kOk : kFailed;
}

int cmd_classify(const std::string& id, const std::string& point, const CommonFlags& flags) {
  const AnalysisOptions o = options_from(flags);
  const ActionModel a = lookup(id);
  Vec x;
  try {
    x = parse_point(a, point);
  } catch (const InputError& e) {
    std::cerr << "orthofold: " << e.what() << "\n";
    return kBadInput;
  }
  emit(envelope("classify", to_json(classify_point(a, x, o)), utc_now()), flags.out);
  return kOk;
}

int cmd_catalog() {
  for (const auto& a : catalog())
    std::cout << a.name << "\t" << a.group.name() << " on " << a.manifold.name()
              << (a.interval ? "\tinterval quotient" : "") << "\n";
  std::cout << "parameterised: s2-zn(n), cn-tn(n), trivial(d)\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orbit-space stratifications of compact linear group actions"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  CommonFlags analyze_flags, verify_flags, classify_flags;
  std::string analyze_id, classify_id, classify_point_spec;
  std::vector<std::string> verify_ids{"all"};

  auto* analyze = app.add_subcommand("analyze", "Run the full pipeline on one action");
  analyze->add_option("action", analyze_id, "Catalog action id")->required();
  add_common(analyze, analyze_flags, true);

  auto* verify = app.add_subcommand("verify", "Run the check battery");
  verify->add_option("actions", verify_ids, "Action ids or \"all\"")->capture_default_str();
  add_common(verify, verify_flags, true);

  auto* classify = app.add_subcommand("classify", "Classify one point");
  classify->add_option("action", classify_id, "Catalog action id")->required();
  classify->add_option("point", classify_point_spec, "Point spec, e.g. 1,0,0 or 0,1+2i or P1")
      ->required();
  add_common(classify, classify_flags, true);

  app.add_subcommand("catalog", "List catalog action ids");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return cmd_analyze(analyze_id, analyze_flags);
    if (*verify) return cmd_verify(verify_ids, verify_flags);
    if (*classify) return cmd_classify(classify_id, classify_point_spec, classify_flags);
    return cmd_catalog();
  } catch (const UnknownActionError& e) {
    std::cerr << "orthofold: " << e.what() << "\n";
    return kBadInput;
  } catch (const InputError& e) {
    std::cerr << "orthofold: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    std::cerr << "orthofold: pipeline failure: " << e.what() << "\n";
    return kPipeline;
  }
}
