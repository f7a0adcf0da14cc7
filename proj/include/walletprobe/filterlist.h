#ifndef WALLETPROBE_FILTERLIST_H_
#define WALLETPROBE_FILTERLIST_H_

// Blocklist parsing (an Adblock-syntax subset and domain-list JSON) and
// domain-level efficacy scoring.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "walletprobe/origin.h"

namespace walletprobe {

enum class FilterRuleKind { kDomainAnchor, kPlainSubstring, kException };
std::string_view ToString(FilterRuleKind kind);

struct FilterRule {
  FilterRuleKind kind = FilterRuleKind::kPlainSubstring;
  // Host for domain anchors; lowercase pattern for substrings. For
  // exceptions, the pattern after "@@" (a leading "||" is kept, so
  // "@@||cdn.example^" anchors on cdn.example).
  std::string body;
  std::string raw;

  bool operator==(const FilterRule&) const = default;
};

enum class FilterListFormat { kAdblock, kDomainJson };
std::string_view ToString(FilterListFormat format);
// "adblock" | "domain_json"; throws ValidationError otherwise.
FilterListFormat ParseFilterListFormat(std::string_view name);

struct FilterList {
  std::string name;
  std::vector<FilterRule> rules;
  std::set<std::string> domain_set;
};

// Adblock: "!" and "[" comments, cosmetic rules (##, #@#, #?#, #$#) and
// regex rules (/.../) are skipped; "$options" are dropped; "||host^" and a
// bare "||host" become domain anchors; everything else a substring pattern
// where '*' is a wildcard and '^' a separator placeholder. Never throws.
// Domain JSON: any nesting of arrays and objects; every string (and object
// key) that looks like a hostname is collected. Throws ParseError on
// malformed JSON and ValidationError when no domain was found.
FilterList ParseFilterList(std::string_view text, FilterListFormat format,
                           std::string name = "");
FilterList LoadFilterList(const std::string& path, FilterListFormat format,
                          std::string name = "");

// Substring match with Adblock wildcards: '*' matches any run, '^' matches
// a separator character (anything but a letter, digit, _ - . %) or the end
// of the URL.
bool PatternOccurs(std::string_view pattern, std::string_view url);

// True when a blocking rule (or the domain set) matches `url` and no
// exception rule does. Domain-set entries match the URL's registrable domain
// or any dot-boundary suffix of its host.
bool IsBlocked(std::string_view url, const FilterList& list,
               const PublicSuffixTable& psl);

struct Fraction {
  std::size_t blocked = 0;
  std::size_t total = 0;

  // 0 for an empty universe.
  double value() const {
    return total == 0 ? 0.0 : static_cast<double>(blocked) / static_cast<double>(total);
  }
  bool operator==(const Fraction&) const = default;
};

struct EfficacyReport {
  std::map<std::string, Fraction> per_list;
  std::map<std::string, std::vector<std::string>> blocked_by_list;
  Fraction combined;
  std::vector<std::string> combined_blocked;
  std::vector<std::string> universe;  // sorted, exclusions removed
  std::vector<std::string> excluded;  // sorted, only those present in input
};

// A domain is blocked by a list when the probe URL https://<domain>/ is.
// The combined blocked set is the union over lists.
EfficacyReport Efficacy(std::span<const std::string> third_party_domains,
                        std::span<const FilterList> lists,
                        const std::set<std::string>& exclusions,
                        const PublicSuffixTable& psl);

// One domain per line; '#' comments and blank lines ignored.
std::set<std::string> ParseExclusions(std::string_view text);
std::set<std::string> LoadExclusions(const std::string& path);

}  // namespace walletprobe

#endif  // WALLETPROBE_FILTERLIST_H_
