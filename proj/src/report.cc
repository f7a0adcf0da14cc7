#include "walletprobe/report.h"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "walletprobe/error.h"
#include "walletprobe/url.h"

namespace walletprobe {

using nlohmann::json;

ManifestFinding AnalyzeManifest(std::string_view manifest_json,
                                std::string extension_id) {
  json doc;
  try {
    doc = json::parse(manifest_json);
  } catch (const json::parse_error& e) {
    throw ParseError("manifest is not valid JSON at byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw ValidationError("manifest", "must be a JSON object");

  ManifestFinding finding;
  finding.extension_id = std::move(extension_id);
  if (const auto it = doc.find("content_scripts");
      it != doc.end() && it->is_array()) {
    for (const auto& script : *it) {
      if (!script.is_object()) continue;
      const auto matches = script.find("matches");
      if (matches == script.end() || !matches->is_array()) continue;
      for (const auto& m : *matches) {
        if (!m.is_string()) continue;
        const auto pattern = m.get<std::string>();
        for (const auto everywhere : kEverywherePatterns) {
          if (pattern == everywhere) finding.injects_everywhere = true;
        }
      }
    }
  }
  for (const char* key : {"permissions", "optional_permissions"}) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_array()) continue;
    for (const auto& p : *it) {
      if (!p.is_string()) continue;
      const auto permission = p.get<std::string>();
      for (const auto sensitive : kSensitivePermissions) {
        if (permission == sensitive) finding.sensitive_permissions.insert(permission);
      }
    }
  }
  return finding;
}

std::vector<ScriptCluster> ClusterScripts(std::span<const ObservedScript> scripts) {
  struct Group {
    std::set<std::string> urls;
    std::set<std::string> sites;
  };
  std::map<std::string, Group> groups;
  for (const auto& s : scripts) {
    if (s.body_hash.empty()) continue;
    auto& g = groups[s.body_hash];
    g.urls.insert(s.script_url);
    if (!s.site.empty()) g.sites.insert(s.site);
  }
  std::vector<ScriptCluster> clusters;
  for (auto& [hash, g] : groups) {
    if (g.urls.size() < 2) continue;
    clusters.push_back({hash, {g.urls.begin(), g.urls.end()}, g.sites.size()});
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const ScriptCluster& a, const ScriptCluster& b) {
                     return a.members.size() > b.members.size();
                   });
  return clusters;
}

std::vector<ScriptCluster> ClusterScripts(std::span<const ScriptRecord> scripts) {
  std::vector<ObservedScript> observed;
  observed.reserve(scripts.size());
  for (const auto& s : scripts) observed.push_back({s.script_url, s.body_hash, ""});
  return ClusterScripts(observed);
}

std::vector<std::string> FlagPathPattern(std::span<const std::string> urls,
                                         std::string_view needle) {
  if (needle.empty()) throw std::invalid_argument("FlagPathPattern: empty needle");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& url : urls) {
    const auto parsed = ParseUrl(url);
    if (!parsed || parsed->path.find(needle) == std::string::npos) continue;
    if (seen.insert(url).second) out.push_back(url);
  }
  return out;
}

}  // namespace walletprobe
