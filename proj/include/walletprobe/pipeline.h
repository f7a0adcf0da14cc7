#ifndef WALLETPROBE_PIPELINE_H_
#define WALLETPROBE_PIPELINE_H_

// Corpus pipeline: parse every trace bundle, attribute origins, detect wallet
// API use, classify fingerprinting, scan for leaks, cluster scripts and score
// blocklists, then aggregate into one deterministic report.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "walletprobe/filterlist.h"
#include "walletprobe/fingerprint.h"
#include "walletprobe/leak_detector.h"
#include "walletprobe/origin.h"
#include "walletprobe/report.h"
#include "walletprobe/wallet_api.h"

namespace walletprobe {

// Path fragment of Cloudflare bot-challenge scripts; they are kept out of
// code clustering because every challenge page ships identical code.
inline constexpr std::string_view kChallengePlatformPath = "/cdn-cgi/challenge-platform/";

struct PipelineOptions {
  ClassifierConfig classifier = ClassifierConfig::Default();
  WalletApiTable wallet_table = WalletApiTable::Default();
  TransformSet transforms;
  std::vector<FilterList> blocklists;  // efficacy is computed when non-empty
  std::set<std::string> exclusions;
  std::map<std::string, std::string> site_categories;  // site domain -> category
  std::map<std::string, std::string> tp_categories;    // domain -> class
  int workers = 1;
};

// Reads a two-column CSV (RFC 4180 quoting). A first row whose second cell
// is "category" is treated as a header. Keys are lowercased.
std::map<std::string, std::string> ParseCategoryCsv(std::string_view text);
std::map<std::string, std::string> LoadCategoryCsv(const std::string& path);

// Category of `domain`, trying the domain and then each parent suffix;
// "unknown" when none is mapped.
std::string LookupCategory(const std::map<std::string, std::string>& mapping,
                           std::string_view domain);

struct BundleSource {
  std::string name;  // file name, used in diagnostics
  std::string text;
};

struct WalletCallSite {
  std::string site;
  std::optional<std::int64_t> rank;
  std::string script_domain;
  std::vector<std::string> roots;  // distinct, first-access order
  std::string mode;                // "explicit" when any access is explicit
  bool third_party = false;
  std::size_t calls = 0;
};

struct CombinationRow {
  std::vector<std::string> roots;
  std::size_t scripts = 0;
};

struct CategoryRow {
  std::string category;
  std::size_t sites = 0;              // sites with wallet calls
  std::size_t third_party_sites = 0;  // ... of which some call is third-party
  std::size_t calls = 0;
  std::size_t third_party_calls = 0;
  std::string top_site;         // most wallet calls
  std::string top_third_party;  // present on most sites
};

struct ThirdPartyRow {
  std::string domain;
  bool explicit_calls = false;
  bool implicit_calls = false;
  std::size_t site_count = 0;
  std::optional<std::int64_t> min_rank;
  bool fingerprinting = false;
  std::string category;
};

// Distinct leaking records per channel group, third-party receivers only.
struct LeakCounts {
  std::size_t get = 0;
  std::size_t post = 0;
  std::size_t ws = 0;
  std::size_t cookies = 0;

  bool operator==(const LeakCounts&) const = default;
};

struct SiteLeakRow {
  std::string site;
  std::optional<std::int64_t> rank;
  LeakCounts counts;
  std::vector<std::string> receivers;  // third-party receivers, sorted
  std::size_t first_party_findings = 0;
};

struct ReceiverLeakRow {
  std::string receiver;
  std::string category;
  std::size_t sites = 0;
  LeakCounts counts;
};

struct Diagnostic {
  std::string source;
  std::string reason;
};

struct CorpusReport {
  std::vector<WalletCallSite> wallet_call_sites;
  std::vector<CombinationRow> combination_histogram;
  std::vector<CategoryRow> category_rollup;
  std::vector<ThirdPartyRow> third_party_rollup;
  std::vector<SiteLeakRow> leak_rollup;
  std::vector<ReceiverLeakRow> receiver_rollup;
  std::vector<LeakFinding> leak_findings;
  FingerprintStats fingerprint_all;
  FingerprintStats fingerprint_wallet;
  std::vector<FingerprintVerdict> fingerprinting_scripts;  // flagged only
  std::optional<EfficacyReport> efficacy;
  std::vector<ScriptCluster> clusters;
  std::vector<std::string> challenge_platform_scripts;
  std::vector<ManifestFinding> manifest_findings;
  std::size_t bundles_input = 0;
  std::size_t bundles_analyzed = 0;
  std::vector<Diagnostic> diagnostics;  // one per skipped bundle or file
};

// Analyzes in-memory bundles. `manifests` maps extension id -> manifest
// JSON text. Per-bundle failures become diagnostics.
CorpusReport AnalyzeBundles(std::span<const BundleSource> bundles,
                            std::span<const SecretProfile> profiles,
                            const PublicSuffixTable& psl, const PipelineOptions& options,
                            const std::map<std::string, std::string>& manifests = {});

// Reads every *.jsonl file of `corpus_dir` (sorted by name) plus
// `corpus_dir`/manifests/<extension id>.json. Throws ParseError("empty
// corpus") when the directory is missing or holds no trace files.
CorpusReport RunPipeline(const std::string& corpus_dir,
                         std::span<const SecretProfile> profiles,
                         const PublicSuffixTable& psl, const PipelineOptions& options);

nlohmann::json ReportToJson(const CorpusReport& report);

// Serialized report files, name -> content. "report.json" for json; one CSV
// per section for csv. Every secret value of `profiles` is scrubbed from the
// output as a last line of defence.
enum class ReportFormat { kJson, kCsv, kBoth };
std::map<std::string, std::string> RenderReport(const CorpusReport& report,
                                                ReportFormat format,
                                                std::span<const SecretProfile> profiles);

// RFC 4180 field quoting.
std::string CsvField(std::string_view value);

}  // namespace walletprobe

#endif  // WALLETPROBE_PIPELINE_H_
