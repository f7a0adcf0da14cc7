#ifndef WALLETPROBE_REPORT_H_
#define WALLETPROBE_REPORT_H_

// Corpus-level analyses: exact-code script clustering, URL path flagging and
// extension manifest capability analysis.

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "walletprobe/trace_model.h"

namespace walletprobe {

struct ManifestFinding {
  std::string extension_id;
  bool injects_everywhere = false;
  std::set<std::string> sensitive_permissions;  // subset of history/tabs/activeTab

  bool operator==(const ManifestFinding&) const = default;
};

// Content-script match patterns that cover every website.
inline constexpr std::string_view kEverywherePatterns[] = {
    "http://*/*", "https://*/*", "<all_urls>", "*://*/*"};
inline constexpr std::string_view kSensitivePermissions[] = {"history", "tabs",
                                                             "activeTab"};

// Scans content_scripts[].matches, permissions and optional_permissions.
// Throws ParseError naming the byte offset for malformed JSON.
ManifestFinding AnalyzeManifest(std::string_view manifest_json,
                                std::string extension_id = "");

// A script observed on a site.
struct ObservedScript {
  std::string script_url;
  std::string body_hash;
  std::string site;  // registrable domain or extension id; may be empty
};

struct ScriptCluster {
  std::string body_hash;
  std::vector<std::string> members;  // distinct script URLs, sorted
  std::size_t site_count = 0;        // distinct non-empty sites

  bool operator==(const ScriptCluster&) const = default;
};

// Groups scripts by body hash; groups with fewer than two distinct URLs are
// dropped. Ordered by member count (descending), then body hash.
std::vector<ScriptCluster> ClusterScripts(std::span<const ObservedScript> scripts);
std::vector<ScriptCluster> ClusterScripts(std::span<const ScriptRecord> scripts);

// URLs (in input order, duplicates kept once) whose path component contains
// `needle`. Throws std::invalid_argument for an empty needle.
std::vector<std::string> FlagPathPattern(std::span<const std::string> urls,
                                         std::string_view needle);

}  // namespace walletprobe

#endif  // WALLETPROBE_REPORT_H_
