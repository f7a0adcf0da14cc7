#include "walletprobe/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "walletprobe/error.h"
#include "walletprobe/url.h"

namespace walletprobe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Rank order: ranked sites ascending, unranked last.
bool RankLess(const std::optional<std::int64_t>& a, const std::optional<std::int64_t>& b) {
  if (a.has_value() != b.has_value()) return a.has_value();
  return a.has_value() && *a < *b;
}

void MergeRank(std::optional<std::int64_t>& into, const std::optional<std::int64_t>& r) {
  if (r && (!into || *r < *into)) into = r;
}

json RankJson(const std::optional<std::int64_t>& rank) {
  return rank ? json(*rank) : json(nullptr);
}

double Ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string Join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::vector<std::string>> ParseCsvRows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      row_has_content = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      row_has_content = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string Trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return std::string(s);
}

struct BundleResult {
  bool ok = false;
  std::string reason;
  TraceBundle bundle;
  std::string site;
  std::vector<WalletApiAccess> accesses;
  std::vector<LeakFinding> findings;
};

BundleResult AnalyzeOne(const BundleSource& source,
                        const std::map<std::string, TermIndex>& indexes,
                        const PublicSuffixTable& psl, const PipelineOptions& options) {
  BundleResult result;
  try {
    result.bundle = ParseTraceBundle(source.text);
    const auto& target = result.bundle.target;
    result.site = target.kind == TargetKind::kExtension
                      ? target.url
                      : RegistrableDomain(target.url, psl);
    result.accesses = DetectWalletCalls(result.bundle, options.wallet_table);
    const auto& profile_id = result.bundle.capture_meta.wallet_profile_id;
    if (!profile_id.empty()) {
      const auto it = indexes.find(profile_id);
      if (it == indexes.end()) {
        result.reason = "unknown wallet_profile_id \"" + profile_id + "\"";
        return result;
      }
      result.findings = ScanBundle(result.bundle, it->second, options.transforms, psl);
    }
    result.ok = true;
  } catch (const std::exception& e) {
    result.reason = e.what();
  }
  return result;
}

// Script identity used for corpus aggregation. "inline"/"unknown" markers
// are scoped to their site so unrelated inline code is not merged.
std::string ScriptKey(const std::string& script_url, const std::string& site) {
  return IsUrlMarker(script_url) ? script_url + "@" + site : script_url;
}

struct ScriptOrigin {
  std::string domain;
  bool third_party = false;
};

ScriptOrigin OriginOf(const std::string& script_url, const std::string& site,
                      const PublicSuffixTable& psl) {
  if (script_url == "inline") return {site, false};
  if (IsUrlMarker(script_url)) return {"unknown", false};
  const auto parsed = ParseUrl(script_url);
  if (!parsed) return {"unknown", false};
  const std::string domain = RegistrableDomainForHost(parsed->host, psl);
  return {domain, domain != site};
}

std::size_t& CountFor(LeakCounts& counts, LeakChannel channel) {
  switch (channel) {
    case LeakChannel::kGetParam: return counts.get;
    case LeakChannel::kPostBody: return counts.post;
    case LeakChannel::kWsPayload: return counts.ws;
    case LeakChannel::kCookieName:
    case LeakChannel::kCookieValue: return counts.cookies;
  }
  return counts.get;
}

json CountsJson(const LeakCounts& c) {
  return {{"get", c.get}, {"post", c.post}, {"ws", c.ws}, {"cookies", c.cookies}};
}

json StatsJson(const FingerprintStats& s) {
  return {{"scripts", s.scripts},
          {"flagged", s.flagged},
          {"mean_categories_flagged", s.mean_categories_flagged},
          {"max_categories_flagged", s.max_categories_flagged}};
}

json FractionJson(const Fraction& f) {
  return {{"blocked", f.blocked}, {"total", f.total}, {"fraction", f.value()}};
}

}  // namespace

std::map<std::string, std::string> ParseCategoryCsv(std::string_view text) {
  std::map<std::string, std::string> out;
  const auto rows = ParseCsvRows(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() < 2) {
      throw ParseError("expected two CSV columns", i + 1);
    }
    const std::string key = Lower(Trimmed(row[0]));
    const std::string value = Trimmed(row[1]);
    if (i == 0 && Lower(value) == "category") continue;
    if (key.empty() || key.front() == '#') continue;
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> LoadCategoryCsv(const std::string& path) {
  return ParseCategoryCsv(ReadFile(path));
}

std::string LookupCategory(const std::map<std::string, std::string>& mapping,
                           std::string_view domain) {
  std::string host = Lower(domain);
  for (std::size_t p = 0;;) {
    if (const auto it = mapping.find(host.substr(p)); it != mapping.end()) {
      return it->second;
    }
    const auto dot = host.find('.', p);
    if (dot == std::string::npos) break;
    p = dot + 1;
  }
  return "unknown";
}

CorpusReport AnalyzeBundles(std::span<const BundleSource> bundles,
                            std::span<const SecretProfile> profiles,
                            const PublicSuffixTable& psl, const PipelineOptions& options,
                            const std::map<std::string, std::string>& manifests) {
  std::map<std::string, TermIndex> indexes;
  for (const auto& profile : profiles) {
    indexes.emplace(profile.profile_id, TermIndex::Build(profile, options.transforms));
  }

  // Fan out: results land at their input index, so completion order never
  // affects the report.
  std::vector<BundleResult> results(bundles.size());
  const std::size_t workers = std::clamp<std::size_t>(
      options.workers < 1 ? 1 : static_cast<std::size_t>(options.workers), 1,
      std::max<std::size_t>(1, bundles.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < bundles.size(); i = next++) {
      results[i] = AnalyzeOne(bundles[i], indexes, psl, options);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  CorpusReport report;
  report.bundles_input = bundles.size();

  struct SiteInfo {
    std::optional<std::int64_t> rank;
    std::string category;
    std::size_t calls = 0;
    std::size_t third_party_calls = 0;
    std::set<std::string> third_parties;
    LeakCounts leaks;
    std::set<std::string> receivers;
    std::size_t first_party_findings = 0;
  };
  struct ThirdPartyInfo {
    bool explicit_calls = false;
    bool implicit_calls = false;
    std::set<std::string> sites;
    std::optional<std::int64_t> min_rank;
    std::set<std::string> scripts;
  };
  struct ReceiverInfo {
    std::set<std::string> sites;
    LeakCounts counts;
  };

  std::set<std::string> visit_ids;
  std::map<std::string, SiteInfo> sites;
  std::map<std::pair<std::string, std::string>, WalletCallSite> call_sites;
  std::map<std::string, ThirdPartyInfo> third_parties;
  std::map<std::string, ReceiverInfo> receivers;
  std::vector<WalletApiAccess> all_accesses;
  std::map<std::string, std::set<std::string>> symbols_by_script;
  std::map<std::string, ScriptOrigin> origin_by_script;
  std::set<std::string> wallet_scripts;
  std::vector<ObservedScript> observed;
  std::vector<bool> observed_third_party;
  std::set<std::string> extension_ids;

  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    if (!r.ok) {
      report.diagnostics.push_back({bundles[i].name, r.reason});
      continue;
    }
    if (!visit_ids.insert(r.bundle.visit_id).second) {
      report.diagnostics.push_back(
          {bundles[i].name, "duplicate visit_id \"" + r.bundle.visit_id + "\""});
      continue;
    }
    ++report.bundles_analyzed;
    const auto& bundle = r.bundle;
    const std::string& site = r.site;
    if (bundle.target.kind == TargetKind::kExtension) extension_ids.insert(site);

    SiteInfo& info = sites[site];
    MergeRank(info.rank, bundle.target.rank);
    if (info.category.empty()) {
      if (const auto it = options.site_categories.find(Lower(site));
          it != options.site_categories.end()) {
        info.category = it->second;
      } else if (bundle.target.category && !bundle.target.category->empty()) {
        info.category = *bundle.target.category;
      } else {
        info.category = "uncategorized";
      }
    }

    auto origin_for = [&](const std::string& script_url) {
      const std::string key = ScriptKey(script_url, site);
      auto it = origin_by_script.find(key);
      if (it == origin_by_script.end()) {
        it = origin_by_script.emplace(key, OriginOf(script_url, site, psl)).first;
      }
      return std::pair<std::string, ScriptOrigin>(key, it->second);
    };

    for (const auto& call : bundle.api_calls) {
      const auto [key, origin] = origin_for(call.script_url);
      symbols_by_script[key].insert(call.symbol);
    }
    for (const auto& script : bundle.scripts) {
      const auto [key, origin] = origin_for(script.script_url);
      symbols_by_script[key];
      observed.push_back({key, script.body_hash, site});
      observed_third_party.push_back(origin.third_party);
    }

    for (auto access : r.accesses) {
      const auto [key, origin] = origin_for(access.script_url);
      symbols_by_script[key].insert(access.root_symbol);
      wallet_scripts.insert(key);
      const bool is_explicit = access.mode == WalletAccessMode::kExplicit;

      auto& row = call_sites[{site, origin.domain}];
      if (row.site.empty()) {
        row.site = site;
        row.script_domain = origin.domain;
        row.third_party = origin.third_party;
        row.mode = "implicit";
      }
      MergeRank(row.rank, bundle.target.rank);
      if (std::find(row.roots.begin(), row.roots.end(), access.root_symbol) ==
          row.roots.end()) {
        row.roots.push_back(access.root_symbol);
      }
      if (is_explicit) row.mode = "explicit";
      ++row.calls;

      ++info.calls;
      if (origin.third_party) {
        ++info.third_party_calls;
        info.third_parties.insert(origin.domain);
        auto& tp = third_parties[origin.domain];
        (is_explicit ? tp.explicit_calls : tp.implicit_calls) = true;
        tp.sites.insert(site);
        MergeRank(tp.min_rank, bundle.target.rank);
        tp.scripts.insert(key);
      }
      access.script_url = key;
      all_accesses.push_back(std::move(access));
    }

    std::set<std::tuple<std::string, int, std::size_t>> counted;
    for (auto& f : r.findings) {
      if (f.receiver == site) {
        ++info.first_party_findings;
      } else {
        const int group = f.channel == LeakChannel::kCookieName
                              ? static_cast<int>(LeakChannel::kCookieValue)
                              : static_cast<int>(f.channel);
        if (counted.insert({f.receiver, group, f.record_index}).second) {
          auto& rec = receivers[f.receiver];
          rec.sites.insert(site);
          ++CountFor(rec.counts, f.channel);
        }
        if (counted.insert({"", group, f.record_index}).second) {
          ++CountFor(info.leaks, f.channel);
        }
        info.receivers.insert(f.receiver);
      }
      report.leak_findings.push_back(std::move(f));
    }
  }

  // Wallet-call sites, one row per (site, script domain).
  for (auto& [key, row] : call_sites) report.wallet_call_sites.push_back(std::move(row));
  std::stable_sort(report.wallet_call_sites.begin(), report.wallet_call_sites.end(),
                   [](const WalletCallSite& a, const WalletCallSite& b) {
                     if (a.rank != b.rank) return RankLess(a.rank, b.rank);
                     return std::tie(a.site, a.script_domain) <
                            std::tie(b.site, b.script_domain);
                   });

  // Root-object combination histogram.
  const auto summaries = SummarizeScripts(all_accesses, psl);
  for (const auto& [roots, count] : BuildCombinationHistogram(summaries)) {
    report.combination_histogram.push_back({roots, count});
  }
  std::stable_sort(report.combination_histogram.begin(),
                   report.combination_histogram.end(),
                   [](const CombinationRow& a, const CombinationRow& b) {
                     return a.scripts > b.scripts;
                   });

  // Fingerprinting.
  std::vector<FingerprintVerdict> verdicts;
  std::vector<FingerprintVerdict> wallet_verdicts;
  std::set<std::string> flagged_scripts;
  for (const auto& [key, symbols] : symbols_by_script) {
    const std::vector<std::string> list(symbols.begin(), symbols.end());
    auto verdict = ClassifyScript(key, list, options.classifier);
    if (verdict.flagged) {
      flagged_scripts.insert(key);
      report.fingerprinting_scripts.push_back(verdict);
    }
    if (wallet_scripts.count(key)) wallet_verdicts.push_back(verdict);
    verdicts.push_back(std::move(verdict));
  }
  report.fingerprint_all = CorpusFingerprintStats(verdicts);
  report.fingerprint_wallet = CorpusFingerprintStats(wallet_verdicts);

  // Per-category rollup.
  std::map<std::string, CategoryRow> categories;
  std::map<std::string, std::map<std::string, std::size_t>> category_tp_sites;
  std::map<std::string, std::pair<std::string, SiteInfo*>> category_top;
  for (auto& [site, info] : sites) {
    if (info.calls == 0) continue;
    auto& row = categories[info.category];
    row.category = info.category;
    ++row.sites;
    if (!info.third_parties.empty()) ++row.third_party_sites;
    row.calls += info.calls;
    row.third_party_calls += info.third_party_calls;
    for (const auto& tp : info.third_parties) ++category_tp_sites[info.category][tp];
    auto& top = category_top[info.category];
    if (!top.second || info.calls > top.second->calls ||
        (info.calls == top.second->calls && RankLess(info.rank, top.second->rank))) {
      top = {site, &info};
    }
  }
  for (auto& [name, row] : categories) {
    row.top_site = category_top[name].first;
    std::size_t best = 0;
    for (const auto& [tp, count] : category_tp_sites[name]) {
      if (count > best) {
        best = count;
        row.top_third_party = tp;
      }
    }
    report.category_rollup.push_back(std::move(row));
  }
  std::stable_sort(report.category_rollup.begin(), report.category_rollup.end(),
                   [](const CategoryRow& a, const CategoryRow& b) {
                     return a.sites > b.sites;
                   });

  // Third-party script domains.
  std::vector<std::string> tp_wallet_urls;
  for (auto& [domain, tp] : third_parties) {
    ThirdPartyRow row;
    row.domain = domain;
    row.explicit_calls = tp.explicit_calls;
    row.implicit_calls = tp.implicit_calls;
    row.site_count = tp.sites.size();
    row.min_rank = tp.min_rank;
    row.category = LookupCategory(options.tp_categories, domain);
    for (const auto& s : tp.scripts) {
      if (flagged_scripts.count(s)) row.fingerprinting = true;
      tp_wallet_urls.push_back(s);
    }
    report.third_party_rollup.push_back(std::move(row));
  }
  std::stable_sort(report.third_party_rollup.begin(), report.third_party_rollup.end(),
                   [](const ThirdPartyRow& a, const ThirdPartyRow& b) {
                     return a.site_count > b.site_count;
                   });

  // Tables 7, 10, 11 shape.
  for (auto& [site, info] : sites) {
    if (info.leaks == LeakCounts{} && info.first_party_findings == 0) continue;
    report.leak_rollup.push_back({site, info.rank, info.leaks,
                                  {info.receivers.begin(), info.receivers.end()},
                                  info.first_party_findings});
  }
  std::stable_sort(report.leak_rollup.begin(), report.leak_rollup.end(),
                   [](const SiteLeakRow& a, const SiteLeakRow& b) {
                     if (a.rank != b.rank) return RankLess(a.rank, b.rank);
                     return a.site < b.site;
                   });
  for (auto& [receiver, rec] : receivers) {
    report.receiver_rollup.push_back({receiver,
                                      LookupCategory(options.tp_categories, receiver),
                                      rec.sites.size(), rec.counts});
  }
  std::stable_sort(report.receiver_rollup.begin(), report.receiver_rollup.end(),
                   [](const ReceiverLeakRow& a, const ReceiverLeakRow& b) {
                     return a.sites > b.sites;
                   });
  std::stable_sort(report.leak_findings.begin(), report.leak_findings.end(),
                   [](const LeakFinding& a, const LeakFinding& b) {
                     return std::tie(a.visit_id, a.record_index, a.channel, a.offset,
                                     a.secret_id) <
                            std::tie(b.visit_id, b.record_index, b.channel, b.offset,
                                     b.secret_id);
                   });

  // Exact-code clusters over third-party wallet-calling scripts.
  report.challenge_platform_scripts = FlagPathPattern(tp_wallet_urls, kChallengePlatformPath);
  const std::set<std::string> challenge(report.challenge_platform_scripts.begin(),
                                        report.challenge_platform_scripts.end());
  std::vector<ObservedScript> cluster_input;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const auto& s = observed[i];
    if (observed_third_party[i] && wallet_scripts.count(s.script_url) &&
        !challenge.count(s.script_url)) {
      cluster_input.push_back(s);
    }
  }
  report.clusters = ClusterScripts(cluster_input);

  if (!options.blocklists.empty()) {
    std::vector<std::string> universe;
    for (const auto& row : report.third_party_rollup) universe.push_back(row.domain);
    report.efficacy = Efficacy(universe, options.blocklists, options.exclusions, psl);
  }

  for (const auto& id : extension_ids) {
    const auto it = manifests.find(id);
    if (it == manifests.end()) continue;
    try {
      report.manifest_findings.push_back(AnalyzeManifest(it->second, id));
    } catch (const Error& e) {
      report.diagnostics.push_back({"manifests/" + id + ".json", e.what()});
    }
  }
  return report;
}

CorpusReport RunPipeline(const std::string& corpus_dir,
                         std::span<const SecretProfile> profiles,
                         const PublicSuffixTable& psl, const PipelineOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec)) {
    throw ParseError("empty corpus: " + corpus_dir + " is not a readable directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(corpus_dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  if (ec) throw ParseError("empty corpus: cannot list " + corpus_dir);
  if (files.empty()) throw ParseError("empty corpus: no .jsonl files in " + corpus_dir);
  std::sort(files.begin(), files.end());

  std::vector<BundleSource> sources;
  std::vector<Diagnostic> unreadable;
  for (const auto& path : files) {
    try {
      sources.push_back({path.filename().string(), ReadFile(path)});
    } catch (const Error& e) {
      unreadable.push_back({path.filename().string(), e.what()});
    }
  }

  std::map<std::string, std::string> manifests;
  const fs::path manifest_dir = fs::path(corpus_dir) / "manifests";
  if (fs::is_directory(manifest_dir, ec)) {
    for (const auto& entry : fs::directory_iterator(manifest_dir, ec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        try {
          manifests[entry.path().stem().string()] = ReadFile(entry.path());
        } catch (const Error&) {
          // Reported as missing; the bundle itself still counts.
        }
      }
    }
  }

  CorpusReport report = AnalyzeBundles(sources, profiles, psl, options, manifests);
  report.bundles_input += unreadable.size();
  report.diagnostics.insert(report.diagnostics.end(), unreadable.begin(),
                            unreadable.end());
  std::stable_sort(report.diagnostics.begin(), report.diagnostics.end(),
                   [](const Diagnostic& a, const Diagnostic& b) {
                     return a.source < b.source;
                   });
  return report;
}

json ReportToJson(const CorpusReport& report) {
  json out;

  json call_sites = json::array();
  for (const auto& r : report.wallet_call_sites) {
    call_sites.push_back({{"site", r.site},
                          {"rank", RankJson(r.rank)},
                          {"script_domain", r.script_domain},
                          {"roots", r.roots},
                          {"mode", r.mode},
                          {"third_party", r.third_party},
                          {"calls", r.calls}});
  }
  out["wallet_call_sites"] = std::move(call_sites);

  json histogram = json::array();
  for (const auto& r : report.combination_histogram) {
    histogram.push_back(
        {{"roots", r.roots}, {"key", CombinationKey(r.roots)}, {"scripts", r.scripts}});
  }
  out["combination_histogram"] = std::move(histogram);

  json categories = json::array();
  for (const auto& r : report.category_rollup) {
    categories.push_back({{"category", r.category},
                          {"sites", r.sites},
                          {"third_party_sites", r.third_party_sites},
                          {"third_party_site_fraction", Ratio(r.third_party_sites, r.sites)},
                          {"calls", r.calls},
                          {"third_party_calls", r.third_party_calls},
                          {"third_party_call_fraction", Ratio(r.third_party_calls, r.calls)},
                          {"top_site", r.top_site},
                          {"top_third_party", r.top_third_party}});
  }
  out["category_rollup"] = std::move(categories);

  json tps = json::array();
  for (const auto& r : report.third_party_rollup) {
    tps.push_back({{"domain", r.domain},
                   {"explicit", r.explicit_calls},
                   {"implicit", r.implicit_calls},
                   {"site_count", r.site_count},
                   {"min_rank", RankJson(r.min_rank)},
                   {"fingerprinting", r.fingerprinting},
                   {"category", r.category}});
  }
  out["third_party_rollup"] = std::move(tps);

  json leaks = json::array();
  for (const auto& r : report.leak_rollup) {
    leaks.push_back({{"site", r.site},
                     {"rank", RankJson(r.rank)},
                     {"counts", CountsJson(r.counts)},
                     {"receivers", r.receivers},
                     {"first_party_findings", r.first_party_findings}});
  }
  out["leak_rollup"] = std::move(leaks);

  json recv = json::array();
  for (const auto& r : report.receiver_rollup) {
    recv.push_back({{"receiver", r.receiver},
                    {"category", r.category},
                    {"sites", r.sites},
                    {"counts", CountsJson(r.counts)}});
  }
  out["receiver_rollup"] = std::move(recv);

  json findings = json::array();
  for (const auto& f : report.leak_findings) {
    json chain = json::array();
    for (const auto t : f.chain) chain.push_back(TransformName(t));
    findings.push_back({{"visit_id", f.visit_id},
                        {"secret_id", f.secret_id},
                        {"secret_kind", ToString(f.secret_kind)},
                        {"channel", ToString(f.channel)},
                        {"receiver", f.receiver},
                        {"receiver_host", f.receiver_host},
                        {"chain", std::move(chain)},
                        {"evidence", f.evidence},
                        {"record_index", f.record_index},
                        {"offset", f.offset}});
  }
  out["leak_findings"] = std::move(findings);

  json flagged = json::array();
  for (const auto& v : report.fingerprinting_scripts) {
    flagged.push_back({{"script_url", v.script_url},
                       {"categories", v.categories_hit},
                       {"explicit_categories", v.explicit_hit}});
  }
  out["fingerprint_stats"] = {{"all_scripts", StatsJson(report.fingerprint_all)},
                              {"wallet_scripts", StatsJson(report.fingerprint_wallet)},
                              {"flagged_scripts", std::move(flagged)}};

  if (report.efficacy) {
    const auto& e = *report.efficacy;
    json per_list = json::object();
    for (const auto& [name, fraction] : e.per_list) {
      json entry = FractionJson(fraction);
      entry["blocked_domains"] = e.blocked_by_list.at(name);
      per_list[name] = std::move(entry);
    }
    json combined = FractionJson(e.combined);
    combined["blocked_domains"] = e.combined_blocked;
    out["efficacy"] = {{"per_list", std::move(per_list)},
                       {"combined", std::move(combined)},
                       {"universe", e.universe},
                       {"excluded", e.excluded}};
  } else {
    out["efficacy"] = nullptr;
  }

  json clusters = json::array();
  for (const auto& c : report.clusters) {
    clusters.push_back(
        {{"body_hash", c.body_hash}, {"members", c.members}, {"site_count", c.site_count}});
  }
  out["clusters"] = std::move(clusters);
  out["challenge_platform_scripts"] = report.challenge_platform_scripts;

  json manifests = json::array();
  for (const auto& m : report.manifest_findings) {
    manifests.push_back({{"extension_id", m.extension_id},
                         {"injects_everywhere", m.injects_everywhere},
                         {"sensitive_permissions", m.sensitive_permissions}});
  }
  out["manifest_findings"] = std::move(manifests);

  json skipped = json::array();
  for (const auto& d : report.diagnostics) {
    skipped.push_back({{"source", d.source}, {"reason", d.reason}});
  }
  out["diagnostics"] = {{"bundles_input", report.bundles_input},
                        {"bundles_analyzed", report.bundles_analyzed},
                        {"skipped", std::move(skipped)}};
  return out;
}

std::string CsvField(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(value);
  }
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) { AddRow(header); }

  void AddRow(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += CsvField(cells[i]);
    }
    text_ += "\r\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string Num(std::size_t n) { return std::to_string(n); }
std::string Bool(bool b) { return b ? "true" : "false"; }
std::string RankCell(const std::optional<std::int64_t>& r) {
  return r ? std::to_string(*r) : std::string();
}
std::string FractionCell(double v) {
  return json(v).dump();  // shortest round-trip form, same as the JSON report
}

std::map<std::string, std::string> RenderCsv(const CorpusReport& report) {
  std::map<std::string, std::string> files;

  CsvTable sites({"site", "rank", "script_domain", "roots", "mode", "third_party",
                  "calls"});
  for (const auto& r : report.wallet_call_sites) {
    sites.AddRow({r.site, RankCell(r.rank), r.script_domain, Join(r.roots, ";"), r.mode,
                  Bool(r.third_party), Num(r.calls)});
  }
  files["wallet_call_sites.csv"] = sites.text();

  CsvTable hist({"combination", "scripts"});
  for (const auto& r : report.combination_histogram) {
    hist.AddRow({CombinationKey(r.roots), Num(r.scripts)});
  }
  files["combination_histogram.csv"] = hist.text();

  CsvTable cats({"category", "sites", "third_party_sites", "third_party_site_fraction",
                 "calls", "third_party_calls", "third_party_call_fraction", "top_site",
                 "top_third_party"});
  for (const auto& r : report.category_rollup) {
    cats.AddRow({r.category, Num(r.sites), Num(r.third_party_sites),
                 FractionCell(Ratio(r.third_party_sites, r.sites)), Num(r.calls),
                 Num(r.third_party_calls),
                 FractionCell(Ratio(r.third_party_calls, r.calls)), r.top_site,
                 r.top_third_party});
  }
  files["category_rollup.csv"] = cats.text();

  CsvTable tps({"domain", "explicit", "implicit", "site_count", "min_rank",
                "fingerprinting", "category"});
  for (const auto& r : report.third_party_rollup) {
    tps.AddRow({r.domain, Bool(r.explicit_calls), Bool(r.implicit_calls),
                Num(r.site_count), RankCell(r.min_rank), Bool(r.fingerprinting),
                r.category});
  }
  files["third_party_rollup.csv"] = tps.text();

  CsvTable leaks({"site", "rank", "get", "post", "ws", "cookies", "receivers",
                  "first_party_findings"});
  for (const auto& r : report.leak_rollup) {
    leaks.AddRow({r.site, RankCell(r.rank), Num(r.counts.get), Num(r.counts.post),
                  Num(r.counts.ws), Num(r.counts.cookies), Join(r.receivers, ";"),
                  Num(r.first_party_findings)});
  }
  files["leak_rollup.csv"] = leaks.text();

  CsvTable recv({"receiver", "category", "sites", "get", "post", "ws", "cookies"});
  for (const auto& r : report.receiver_rollup) {
    recv.AddRow({r.receiver, r.category, Num(r.sites), Num(r.counts.get),
                 Num(r.counts.post), Num(r.counts.ws), Num(r.counts.cookies)});
  }
  files["receiver_rollup.csv"] = recv.text();

  CsvTable findings({"visit_id", "record_index", "channel", "offset", "secret_id",
                     "secret_kind", "receiver", "receiver_host", "chain", "evidence"});
  for (const auto& f : report.leak_findings) {
    std::vector<std::string> chain;
    for (const auto t : f.chain) chain.emplace_back(TransformName(t));
    findings.AddRow({f.visit_id, Num(f.record_index), std::string(ToString(f.channel)),
                     Num(f.offset), f.secret_id, std::string(ToString(f.secret_kind)),
                     f.receiver, f.receiver_host, Join(chain, ";"), f.evidence});
  }
  files["leak_findings.csv"] = findings.text();

  CsvTable fp({"script_url", "categories", "explicit_categories"});
  for (const auto& v : report.fingerprinting_scripts) {
    fp.AddRow({v.script_url,
               Join({v.categories_hit.begin(), v.categories_hit.end()}, ";"),
               Join({v.explicit_hit.begin(), v.explicit_hit.end()}, ";")});
  }
  files["fingerprinting_scripts.csv"] = fp.text();

  CsvTable stats({"population", "scripts", "flagged", "mean_categories_flagged",
                  "max_categories_flagged"});
  for (const auto& [name, s] : {std::pair{"all_scripts", &report.fingerprint_all},
                                std::pair{"wallet_scripts", &report.fingerprint_wallet}}) {
    stats.AddRow({name, Num(s->scripts), Num(s->flagged),
                  FractionCell(s->mean_categories_flagged),
                  Num(s->max_categories_flagged)});
  }
  files["fingerprint_stats.csv"] = stats.text();

  if (report.efficacy) {
    CsvTable eff({"list", "blocked", "total", "fraction"});
    for (const auto& [name, f] : report.efficacy->per_list) {
      eff.AddRow({name, Num(f.blocked), Num(f.total), FractionCell(f.value())});
    }
    const auto& c = report.efficacy->combined;
    eff.AddRow({"combined", Num(c.blocked), Num(c.total), FractionCell(c.value())});
    files["efficacy.csv"] = eff.text();
  }

  CsvTable clusters({"body_hash", "members", "site_count"});
  for (const auto& c : report.clusters) {
    clusters.AddRow({c.body_hash, Join(c.members, ";"), Num(c.site_count)});
  }
  files["clusters.csv"] = clusters.text();

  CsvTable manifests({"extension_id", "injects_everywhere", "sensitive_permissions"});
  for (const auto& m : report.manifest_findings) {
    manifests.AddRow({m.extension_id, Bool(m.injects_everywhere),
                      Join({m.sensitive_permissions.begin(),
                            m.sensitive_permissions.end()},
                           ";")});
  }
  files["manifest_findings.csv"] = manifests.text();

  CsvTable diags({"source", "reason"});
  diags.AddRow({"(summary)", "bundles_input=" + Num(report.bundles_input) +
                                 " bundles_analyzed=" + Num(report.bundles_analyzed)});
  for (const auto& d : report.diagnostics) diags.AddRow({d.source, d.reason});
  files["diagnostics.csv"] = diags.text();
  return files;
}

}  // namespace

std::map<std::string, std::string> RenderReport(const CorpusReport& report,
                                                ReportFormat format,
                                                std::span<const SecretProfile> profiles) {
  std::map<std::string, std::string> files;
  if (format != ReportFormat::kCsv) {
    files["report.json"] = ReportToJson(report).dump(2) + "\n";
  }
  if (format != ReportFormat::kJson) files.merge(RenderCsv(report));
  for (auto& [name, content] : files) {
    for (const auto& profile : profiles) content = RedactSecrets(content, profile);
  }
  return files;
}

}  // namespace walletprobe
