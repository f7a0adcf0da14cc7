// walletprobe: offline analysis of recorded wallet-site visits.
//
//   walletprobe analyze --corpus DIR --secrets FILE --psl FILE [...]
//   walletprobe validate --trace FILE
//   walletprobe manifest --file MANIFEST [--extension-id ID]
//   walletprobe blocklist-check --url URL --blocklist PATH,FORMAT [--psl FILE]
//
// Exit codes: 0 success, 1 usage error, 2 corpus empty/unreadable or invalid
// trace, 3 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "walletprobe/error.h"
#include "walletprobe/filterlist.h"
#include "walletprobe/pipeline.h"
#include "walletprobe/report.h"
#include "walletprobe/trace_model.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCorpus = 2;
constexpr int kExitInternal = 3;

namespace fs = std::filesystem;
using namespace walletprobe;

// Thrown for problems with the corpus itself rather than with the options.
struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::pair<std::string, FilterListFormat> SplitPathFormat(const std::string& spec) {
  const auto comma = spec.rfind(',');
  if (comma == std::string::npos) {
    throw ValidationError("--blocklist", "expected PATH,FORMAT, got \"" + spec + "\"");
  }
  return {spec.substr(0, comma), ParseFilterListFormat(spec.substr(comma + 1))};
}

FilterList LoadBlocklistSpec(const std::string& spec) {
  std::string name;
  std::string rest = spec;
  if (const auto eq = spec.find('='); eq != std::string::npos) {
    name = spec.substr(0, eq);
    rest = spec.substr(eq + 1);
  }
  const auto [path, format] = SplitPathFormat(rest);
  if (name.empty()) name = fs::path(path).stem().string();
  return LoadFilterList(path, format, name);
}

struct AnalyzeArgs {
  std::string corpus;
  std::string secrets;
  std::string psl;
  std::string patterns;
  std::string wallet_apis;
  std::vector<std::string> blocklists;
  std::string exclusions;
  std::string site_categories;
  std::string tp_categories;
  std::string out;
  std::string format = "json";
  int workers = 1;
};

int RunAnalyze(const AnalyzeArgs& args) {
  const auto psl = PublicSuffixTable::LoadFile(args.psl);
  const auto profiles = LoadSecretProfiles(args.secrets);
  PipelineOptions options;
  if (!args.patterns.empty()) {
    options.classifier = ClassifierConfig::LoadPatternFile(args.patterns);
  }
  if (!args.wallet_apis.empty()) {
    options.wallet_table = WalletApiTable::LoadFile(args.wallet_apis);
  }
  for (const auto& spec : args.blocklists) {
    options.blocklists.push_back(LoadBlocklistSpec(spec));
  }
  if (!args.exclusions.empty()) options.exclusions = LoadExclusions(args.exclusions);
  if (!args.site_categories.empty()) {
    options.site_categories = LoadCategoryCsv(args.site_categories);
  }
  if (!args.tp_categories.empty()) {
    options.tp_categories = LoadCategoryCsv(args.tp_categories);
  }
  options.workers = args.workers;

  CorpusReport report;
  try {
    report = RunPipeline(args.corpus, profiles, psl, options);
  } catch (const ParseError& e) {
    throw CorpusError(e.what());
  }

  const ReportFormat format = args.format == "csv"    ? ReportFormat::kCsv
                              : args.format == "both" ? ReportFormat::kBoth
                                                      : ReportFormat::kJson;
  const auto files = RenderReport(report, format, profiles);
  if (args.out.empty()) {
    if (format != ReportFormat::kJson) {
      throw ValidationError("--out", "CSV output needs an output directory");
    }
    std::cout << files.at("report.json");
  } else {
    fs::create_directories(args.out);
    for (const auto& [name, content] : files) {
      std::ofstream out(fs::path(args.out) / name, std::ios::binary);
      out << content;
      if (!out) throw std::runtime_error("cannot write " + name);
    }
  }
  std::cerr << "analyzed " << report.bundles_analyzed << " of " << report.bundles_input
            << " bundles, " << report.leak_findings.size() << " leak findings\n";
  if (report.bundles_analyzed == 0) {
    throw CorpusError("empty corpus: no bundle could be analyzed");
  }
  return kExitOk;
}

int RunValidate(const std::string& path) {
  try {
    const auto bundle = ReadTraceBundleFile(path);
    std::cout << "ok " << bundle.visit_id << ": " << bundle.api_calls.size()
              << " api_calls, " << bundle.requests.size() << " requests, "
              << bundle.cookies.size() << " cookies, " << bundle.scripts.size()
              << " scripts\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return kExitCorpus;
  }
}

int RunManifest(const std::string& path, std::string extension_id) {
  if (extension_id.empty()) extension_id = fs::path(path).stem().string();
  const auto finding = AnalyzeManifest(ReadText(path), extension_id);
  const nlohmann::json out = {{"extension_id", finding.extension_id},
                              {"injects_everywhere", finding.injects_everywhere},
                              {"sensitive_permissions", finding.sensitive_permissions}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int RunBlocklistCheck(const std::string& url, const std::string& spec,
                      const std::string& psl_path) {
  const auto psl = PublicSuffixTable::LoadFile(psl_path);
  const auto list = LoadBlocklistSpec(spec);
  std::cout << (IsBlocked(url, list, psl) ? "blocked" : "not blocked") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline analysis of recorded wallet-site visits"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a corpus of trace bundles");
  analyze_cmd->add_option("--corpus", analyze.corpus, "Directory of *.jsonl traces")
      ->required();
  analyze_cmd->add_option("--secrets", analyze.secrets, "Secret profiles JSON")
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--psl", analyze.psl, "public_suffix_list.dat")
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--patterns", analyze.patterns, "Fingerprint pattern TSV")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--wallet-apis", analyze.wallet_apis, "Wallet API table JSON")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--blocklist", analyze.blocklists,
                          "NAME=PATH,FORMAT (adblock|domain_json); repeatable");
  analyze_cmd->add_option("--exclusions", analyze.exclusions, "Benign domains, one per line")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--site-categories", analyze.site_categories, "site,category CSV")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--tp-categories", analyze.tp_categories, "domain,category CSV")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--out", analyze.out, "Output directory (default: stdout)");
  analyze_cmd->add_option("--format", analyze.format, "json, csv or both")
      ->check(CLI::IsMember({"json", "csv", "both"}));
  analyze_cmd->add_option("--workers", analyze.workers, "Parallel bundle workers")
      ->check(CLI::Range(1, 256));

  std::string trace_path;
  auto* validate_cmd = app.add_subcommand("validate", "Validate one trace bundle");
  validate_cmd->add_option("--trace", trace_path, "Trace JSONL file")->required();

  std::string manifest_path;
  std::string extension_id;
  auto* manifest_cmd = app.add_subcommand("manifest", "Analyze an extension manifest");
  manifest_cmd->add_option("--file", manifest_path, "manifest.json")
      ->required()
      ->check(CLI::ExistingFile);
  manifest_cmd->add_option("--extension-id", extension_id, "Defaults to the file stem");

  std::string check_url;
  std::string check_list;
  std::string check_psl = WALLETPROBE_DEFAULT_PSL;
  auto* check_cmd =
      app.add_subcommand("blocklist-check", "Test one URL against a blocklist");
  check_cmd->add_option("--url", check_url, "Absolute URL")->required();
  check_cmd->add_option("--blocklist", check_list, "PATH,FORMAT")->required();
  check_cmd->add_option("--psl", check_psl, "public_suffix_list.dat")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*analyze_cmd) return RunAnalyze(analyze);
    if (*validate_cmd) return RunValidate(trace_path);
    if (*manifest_cmd) return RunManifest(manifest_path, extension_id);
    if (*check_cmd) return RunBlocklistCheck(check_url, check_list, check_psl);
  } catch (const CorpusError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCorpus;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
