#ifndef WALLETPROBE_ORIGIN_H_
#define WALLETPROBE_ORIGIN_H_

// Registrable-domain (eTLD+1) computation and first/third-party attribution.

#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace walletprobe {

// Public suffix rules loaded from the standard public_suffix_list.dat text
// format. By default only the ICANN section is loaded, so hosting providers
// listed in the private section (cloudfront.net, ...) attribute to their
// own registrable domain.
class PublicSuffixTable {
 public:
  struct Options {
    bool include_private = false;
  };

  static PublicSuffixTable Load(std::istream& in, Options options);
  static PublicSuffixTable Load(std::istream& in) { return Load(in, Options{}); }
  static PublicSuffixTable LoadFile(const std::string& path, Options options);
  static PublicSuffixTable LoadFile(const std::string& path) {
    return LoadFile(path, Options{});
  }
  static PublicSuffixTable FromString(std::string_view text, Options options);
  static PublicSuffixTable FromString(std::string_view text) {
    return FromString(text, Options{});
  }

  // Public suffix of `host` (lowercase, no trailing dot). Hosts with no
  // matching rule fall back to their last label.
  std::string PublicSuffix(std::string_view host) const;

  // eTLD+1 of `host`; nullopt when the host is itself a public suffix or is
  // empty / starts with a dot.
  std::optional<std::string> RegistrableDomainOfHost(std::string_view host) const;

  const std::string& version() const { return version_; }
  std::size_t rule_count() const {
    return exact_.size() + wildcard_.size() + exception_.size();
  }

 private:
  PublicSuffixTable() = default;

  std::unordered_set<std::string> exact_;
  std::unordered_set<std::string> wildcard_;   // "*.ck" stored as "ck"
  std::unordered_set<std::string> exception_;  // "!www.ck" stored as "www.ck"
  std::string version_ = "unknown";
};

// eTLD+1 for the host of an absolute URL. IP literals, and hosts that are
// themselves public suffixes, are returned verbatim. Throws ParseError when
// the URL has no host.
std::string RegistrableDomain(std::string_view url, const PublicSuffixTable& psl);

// Same, for a bare host or cookie domain (a leading '.' is ignored).
std::string RegistrableDomainForHost(std::string_view host,
                                     const PublicSuffixTable& psl);

struct PartyVerdict {
  std::string resource_domain;
  std::string site_domain;
  bool is_third_party = false;
};

PartyVerdict IsThirdParty(std::string_view resource_url, std::string_view site_url,
                          const PublicSuffixTable& psl);

// Known URLs (e.g. a CrUX export), indexed by hostname.
class CruxIndex {
 public:
  CruxIndex() = default;
  static CruxIndex Load(std::istream& in);
  static CruxIndex LoadFile(const std::string& path);

  void Add(std::string_view url);
  // Known URL for a bare domain: a URL whose host is the domain or
  // "www." + domain, preferring https://www., https://, http://www., http://.
  std::optional<std::string> Lookup(std::string_view domain) const;
  std::size_t size() const { return count_; }

 private:
  std::unordered_map<std::string, std::vector<std::string>> by_host_;
  std::size_t count_ = 0;
};

using UrlProber = std::function<bool(const std::string& url)>;

// Candidate prefixes in probe order.
inline constexpr std::string_view kProbePrefixes[] = {
    "https://www.", "https://", "http://www.", "http://"};

// Maps a bare domain to a crawlable URL: the indexed URL when one exists,
// otherwise the first prefix the prober accepts. Prober exceptions count as
// unreachable. nullopt means skip the domain.
std::optional<std::string> ResolveCandidateUrl(std::string_view domain,
                                               const CruxIndex& crux,
                                               const UrlProber& prober);

}  // namespace walletprobe

#endif  // WALLETPROBE_ORIGIN_H_
