#include "walletprobe/filterlist.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "walletprobe/error.h"
#include "walletprobe/url.h"

namespace walletprobe {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

bool IsHostChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
}

bool LooksLikeHostname(std::string_view s) {
  if (s.empty() || s.size() > 253 || s.front() == '.' || s.back() == '.' ||
      s.find('.') == std::string_view::npos || s.find("..") != std::string_view::npos) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), IsHostChar);
}

bool IsSeparatorChar(char c) {
  return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.' || c == '%');
}

// Matches one '*'-free segment at exactly `pos`. '^' at the very end of the
// URL matches the end.
bool SegmentAt(std::string_view seg, std::string_view url, std::size_t pos) {
  for (std::size_t j = 0; j < seg.size(); ++j) {
    const std::size_t k = pos + j;
    if (seg[j] == '^') {
      if (k == url.size()) return j + 1 == seg.size();
      if (!IsSeparatorChar(url[k])) return false;
    } else if (k >= url.size() || url[k] != seg[j]) {
      return false;
    }
  }
  return true;
}

// Pattern with '*' wildcards, matched starting at `start`. With `anchored`,
// the first segment must sit exactly at `start`; later segments are placed
// leftmost, which never loses a match for unanchored-end patterns.
bool MatchFrom(std::string_view pattern, std::string_view url, std::size_t start,
               bool anchored) {
  std::size_t pos = start;
  std::size_t seg_start = 0;
  bool first = true;
  while (seg_start <= pattern.size()) {
    auto seg_end = pattern.find('*', seg_start);
    if (seg_end == std::string_view::npos) seg_end = pattern.size();
    const std::string_view seg = pattern.substr(seg_start, seg_end - seg_start);
    if (!seg.empty()) {
      if (first && anchored) {
        if (!SegmentAt(seg, url, pos)) return false;
      } else {
        bool found = false;
        for (std::size_t p = pos; p <= url.size(); ++p) {
          if (SegmentAt(seg, url, p)) {
            pos = p;
            found = true;
            break;
          }
        }
        if (!found) return false;
      }
      pos += seg.size();
      if (pos > url.size()) pos = url.size();  // trailing '^' matched the end
    }
    first = false;
    seg_start = seg_end + 1;
  }
  return true;
}

// "||rest": `rest` must match starting at the beginning of the URL host or
// right after one of its dots.
bool MatchHostAnchored(std::string_view rest, std::string_view lower_url) {
  const auto scheme_end = lower_url.find("://");
  if (scheme_end == std::string_view::npos) return false;
  std::size_t host_start = scheme_end + 3;
  std::size_t host_end = host_start;
  while (host_end < lower_url.size() && lower_url[host_end] != '/' &&
         lower_url[host_end] != '?' && lower_url[host_end] != '#' &&
         lower_url[host_end] != ':') {
    ++host_end;
  }
  for (std::size_t p = host_start; p < host_end; ++p) {
    if (p != host_start && lower_url[p - 1] != '.') continue;
    if (MatchFrom(rest, lower_url, p, true)) return true;
  }
  return false;
}

bool PatternMatches(std::string_view body, std::string_view lower_url) {
  if (body.rfind("||", 0) == 0) return MatchHostAnchored(body.substr(2), lower_url);
  return PatternOccurs(body, lower_url);
}

bool HostUnder(std::string_view host, std::string_view domain) {
  if (host == domain) return true;
  return host.size() > domain.size() &&
         host.compare(host.size() - domain.size(), domain.size(), domain) == 0 &&
         host[host.size() - domain.size() - 1] == '.';
}

std::optional<FilterRule> ParseAdblockLine(std::string_view line) {
  const std::string_view raw = Trim(line);
  std::string_view body = raw;
  if (body.empty() || body.front() == '!' || body.front() == '[') return std::nullopt;
  for (const std::string_view cosmetic : {"##", "#@#", "#?#", "#$#"}) {
    if (body.find(cosmetic) != std::string_view::npos) return std::nullopt;
  }
  const bool exception = body.rfind("@@", 0) == 0;
  if (exception) body.remove_prefix(2);
  if (const auto dollar = body.rfind('$'); dollar != std::string_view::npos) {
    body = body.substr(0, dollar);
  }
  if (body.size() > 2 && body.front() == '/' && body.back() == '/') return std::nullopt;
  if (!body.empty() && body.back() == '|') body.remove_suffix(1);
  if (body.size() >= 1 && body.front() == '|' && body.rfind("||", 0) != 0) {
    body.remove_prefix(1);
  }
  std::string lowered = Lower(body);
  if (lowered.empty() || lowered == "||" || lowered == "*") return std::nullopt;

  FilterRule rule;
  rule.raw = std::string(raw);
  if (exception) {
    rule.kind = FilterRuleKind::kException;
    rule.body = std::move(lowered);
    return rule;
  }
  if (lowered.rfind("||", 0) == 0) {
    std::string_view host = std::string_view(lowered).substr(2);
    if (!host.empty() && host.back() == '^') host.remove_suffix(1);
    if (!host.empty() && std::all_of(host.begin(), host.end(), IsHostChar)) {
      rule.kind = FilterRuleKind::kDomainAnchor;
      rule.body = std::string(host);
      return rule;
    }
  }
  rule.kind = FilterRuleKind::kPlainSubstring;
  rule.body = std::move(lowered);
  return rule;
}

void CollectDomains(const nlohmann::json& node, std::set<std::string>& out) {
  auto consider = [&out](const std::string& s) {
    std::string lowered = Lower(Trim(s));
    if (LooksLikeHostname(lowered)) out.insert(std::move(lowered));
  };
  if (node.is_string()) {
    consider(node.get<std::string>());
  } else if (node.is_array()) {
    for (const auto& item : node) CollectDomains(item, out);
  } else if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      consider(key);
      CollectDomains(value, out);
    }
  }
}

}  // namespace

std::string_view ToString(FilterRuleKind kind) {
  switch (kind) {
    case FilterRuleKind::kDomainAnchor: return "domain_anchor";
    case FilterRuleKind::kPlainSubstring: return "plain_substring";
    case FilterRuleKind::kException: return "exception";
  }
  return "";
}

std::string_view ToString(FilterListFormat format) {
  return format == FilterListFormat::kAdblock ? "adblock" : "domain_json";
}

FilterListFormat ParseFilterListFormat(std::string_view name) {
  if (name == "adblock") return FilterListFormat::kAdblock;
  if (name == "domain_json") return FilterListFormat::kDomainJson;
  throw ValidationError("format", "unknown blocklist format \"" + std::string(name) +
                                      "\" (expected adblock or domain_json)");
}

FilterList ParseFilterList(std::string_view text, FilterListFormat format,
                           std::string name) {
  FilterList list;
  list.name = std::move(name);
  if (format == FilterListFormat::kAdblock) {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      if (auto rule = ParseAdblockLine(text.substr(start, end - start))) {
        list.rules.push_back(std::move(*rule));
      }
      start = end + 1;
    }
  } else {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("domain list JSON at byte " + std::to_string(e.byte) + ": " +
                       e.what());
    }
    CollectDomains(doc, list.domain_set);
  }
  if (format == FilterListFormat::kDomainJson && list.domain_set.empty()) {
    throw ValidationError("blocklist", "no domains found in " +
                                           (list.name.empty() ? "list" : list.name));
  }
  return list;
}

FilterList LoadFilterList(const std::string& path, FilterListFormat format,
                          std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open blocklist " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseFilterList(buffer.str(), format, name.empty() ? path : std::move(name));
}

bool PatternOccurs(std::string_view pattern, std::string_view url) {
  return MatchFrom(pattern, url, 0, false);
}

bool IsBlocked(std::string_view url, const FilterList& list,
               const PublicSuffixTable& psl) {
  const std::string lower_url = Lower(url);
  const auto parsed = ParseUrl(lower_url);
  const std::string host = parsed ? parsed->host : std::string();

  bool blocked = false;
  if (!list.domain_set.empty() && !host.empty()) {
    if (list.domain_set.count(RegistrableDomainForHost(host, psl))) blocked = true;
    for (std::size_t p = 0; !blocked;) {
      if (list.domain_set.count(host.substr(p))) blocked = true;
      const auto dot = host.find('.', p);
      if (dot == std::string::npos) break;
      p = dot + 1;
    }
  }
  for (const auto& rule : list.rules) {
    if (blocked) break;
    switch (rule.kind) {
      case FilterRuleKind::kDomainAnchor:
        blocked = !host.empty() && HostUnder(host, rule.body);
        break;
      case FilterRuleKind::kPlainSubstring:
        blocked = PatternMatches(rule.body, lower_url);
        break;
      case FilterRuleKind::kException:
        break;
    }
  }
  if (!blocked) return false;
  for (const auto& rule : list.rules) {
    if (rule.kind == FilterRuleKind::kException && PatternMatches(rule.body, lower_url)) {
      return false;
    }
  }
  return true;
}

EfficacyReport Efficacy(std::span<const std::string> third_party_domains,
                        std::span<const FilterList> lists,
                        const std::set<std::string>& exclusions,
                        const PublicSuffixTable& psl) {
  EfficacyReport report;
  std::set<std::string> universe;
  std::set<std::string> excluded;
  for (const auto& d : third_party_domains) {
    const std::string domain = Lower(Trim(d));
    if (domain.empty()) continue;
    (exclusions.count(domain) ? excluded : universe).insert(domain);
  }
  report.universe.assign(universe.begin(), universe.end());
  report.excluded.assign(excluded.begin(), excluded.end());

  std::set<std::string> combined;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    const std::string name =
        lists[i].name.empty() ? "list" + std::to_string(i + 1) : lists[i].name;
    if (report.per_list.count(name)) {
      throw ValidationError("blocklist", "duplicate blocklist name " + name);
    }
    std::vector<std::string> blocked;
    for (const auto& domain : report.universe) {
      if (IsBlocked("https://" + domain + "/", lists[i], psl)) {
        blocked.push_back(domain);
        combined.insert(domain);
      }
    }
    report.per_list[name] = Fraction{blocked.size(), report.universe.size()};
    report.blocked_by_list[name] = std::move(blocked);
  }
  report.combined = Fraction{combined.size(), report.universe.size()};
  report.combined_blocked.assign(combined.begin(), combined.end());
  return report;
}

std::set<std::string> ParseExclusions(std::string_view text) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = Trim(text.substr(start, end - start));
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = Trim(line.substr(0, hash));
    }
    if (!line.empty()) out.insert(Lower(line));
    start = end + 1;
  }
  return out;
}

std::set<std::string> LoadExclusions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open exclusions file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseExclusions(buffer.str());
}

}  // namespace walletprobe
