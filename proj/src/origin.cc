#include "walletprobe/origin.h"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "walletprobe/error.h"
#include "walletprobe/url.h"

namespace walletprobe {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
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

// Suffix of `host` starting at label index `i` (0 = whole host).
std::string_view LabelsFrom(std::string_view host,
                            const std::vector<std::size_t>& starts, std::size_t i) {
  return host.substr(starts[i]);
}

// RFC 3492 encoding of one label given as code points.
std::optional<std::string> Punycode(const std::vector<char32_t>& input) {
  constexpr std::uint32_t kBase = 36, kTMin = 1, kTMax = 26, kSkew = 38, kDamp = 700;
  const auto digit = [](std::uint32_t d) {
    return static_cast<char>(d < 26 ? 'a' + d : '0' + (d - 26));
  };
  const auto adapt = [&](std::uint32_t delta, std::uint32_t points, bool first) {
    delta = first ? delta / kDamp : delta / 2;
    delta += delta / points;
    std::uint32_t k = 0;
    while (delta > ((kBase - kTMin) * kTMax) / 2) {
      delta /= kBase - kTMin;
      k += kBase;
    }
    return k + (kBase - kTMin + 1) * delta / (delta + kSkew);
  };

  std::string out;
  for (const char32_t c : input) {
    if (c < 0x80) out.push_back(static_cast<char>(c));
  }
  const std::uint32_t basic = static_cast<std::uint32_t>(out.size());
  std::uint32_t handled = basic;
  if (basic > 0) out.push_back('-');
  std::uint32_t n = 0x80, delta = 0, bias = 72;
  while (handled < input.size()) {
    std::uint32_t m = 0xFFFFFFFF;
    for (const char32_t c : input) {
      if (c >= n && c < m) m = c;
    }
    const std::uint64_t step = std::uint64_t{m - n} * (handled + 1);
    if (delta + step > 0xFFFFFFFF) return std::nullopt;
    delta += static_cast<std::uint32_t>(step);
    n = m;
    for (const char32_t c : input) {
      if (c < n && ++delta == 0) return std::nullopt;
      if (c != n) continue;
      std::uint32_t q = delta;
      for (std::uint32_t k = kBase;; k += kBase) {
        const std::uint32_t t = k <= bias ? kTMin : k >= bias + kTMax ? kTMax : k - bias;
        if (q < t) break;
        out.push_back(digit(t + (q - t) % (kBase - t)));
        q = (q - t) / (kBase - t);
      }
      out.push_back(digit(q));
      bias = adapt(delta, handled + 1, handled == basic);
      delta = 0;
      ++handled;
    }
    ++delta;
    ++n;
  }
  return out;
}

// ASCII-compatible form of a UTF-8 domain: every non-ASCII label becomes
// "xn--" + punycode. nullopt for invalid UTF-8.
std::optional<std::string> ToAsciiDomain(std::string_view domain) {
  std::string out;
  std::size_t start = 0;
  while (start <= domain.size()) {
    auto end = domain.find('.', start);
    if (end == std::string_view::npos) end = domain.size();
    const std::string_view label = domain.substr(start, end - start);
    std::vector<char32_t> points;
    bool ascii = true;
    for (std::size_t i = 0; i < label.size();) {
      const auto b = static_cast<unsigned char>(label[i]);
      const int len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3
                                   : (b >> 3) == 0x1E ? 4 : 0;
      if (len == 0 || i + len > label.size()) return std::nullopt;
      char32_t c = len == 1 ? b : b & (0x7F >> len);
      for (int j = 1; j < len; ++j) {
        const auto cont = static_cast<unsigned char>(label[i + j]);
        if ((cont & 0xC0) != 0x80) return std::nullopt;
        c = (c << 6) | (cont & 0x3F);
      }
      ascii = ascii && len == 1;
      points.push_back(c);
      i += len;
    }
    if (!out.empty() || start > 0) out.push_back('.');
    if (ascii) {
      out.append(label);
    } else {
      const auto encoded = Punycode(points);
      if (!encoded) return std::nullopt;
      out += "xn--" + *encoded;
    }
    start = end + 1;
  }
  return out;
}

}  // namespace

PublicSuffixTable PublicSuffixTable::Load(std::istream& in, Options options) {
  PublicSuffixTable table;
  std::string line;
  bool in_private = false;
  while (std::getline(in, line)) {
    std::string_view view = Trim(line);
    if (view.rfind("//", 0) == 0) {
      if (view.find("===BEGIN PRIVATE DOMAINS===") != std::string_view::npos) {
        in_private = true;
      } else if (view.find("===END PRIVATE DOMAINS===") != std::string_view::npos) {
        in_private = false;
      } else if (const auto pos = view.find("VERSION:");
                 pos != std::string_view::npos && table.version_ == "unknown") {
        table.version_ = std::string(Trim(view.substr(pos + 8)));
      }
      continue;
    }
    if (view.empty()) continue;
    if (in_private && !options.include_private) continue;
    // Only the first whitespace-delimited token is the rule.
    const auto ws = view.find_first_of(" \t");
    const std::string rule = Lower(view.substr(0, ws));
    // Unicode rules are also stored in their "xn--" form, which is how hosts
    // appear in URLs.
    std::vector<std::string> forms{rule};
    if (std::any_of(rule.begin(), rule.end(), [](char c) { return c & 0x80; })) {
      if (auto ascii = ToAsciiDomain(rule)) forms.push_back(std::move(*ascii));
    }
    for (auto& form : forms) {
      if (form.front() == '!') {
        table.exception_.insert(form.substr(1));
      } else if (form.rfind("*.", 0) == 0) {
        table.wildcard_.insert(form.substr(2));
      } else {
        table.exact_.insert(std::move(form));
      }
    }
  }
  if (table.rule_count() == 0) {
    throw ParseError("public suffix list contains no rules");
  }
  return table;
}

PublicSuffixTable PublicSuffixTable::LoadFile(const std::string& path,
                                              Options options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open public suffix list " + path);
  return Load(in, options);
}

PublicSuffixTable PublicSuffixTable::FromString(std::string_view text,
                                                Options options) {
  std::istringstream in{std::string(text)};
  return Load(in, options);
}

std::string PublicSuffixTable::PublicSuffix(std::string_view host) const {
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < host.size(); ++i) {
    if (host[i] == '.') starts.push_back(i + 1);
  }
  // Walk from the longest candidate suffix to the shortest; the first hit is
  // the longest matching rule. Exception rules win over everything and
  // shorten the suffix by one label.
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::string candidate(LabelsFrom(host, starts, i));
    if (exception_.count(candidate)) {
      return i + 1 < starts.size() ? std::string(LabelsFrom(host, starts, i + 1))
                                   : candidate;
    }
  }
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::string candidate(LabelsFrom(host, starts, i));
    if (exact_.count(candidate)) return candidate;
    if (i + 1 < starts.size() &&
        wildcard_.count(std::string(LabelsFrom(host, starts, i + 1)))) {
      return candidate;
    }
  }
  return std::string(LabelsFrom(host, starts, starts.size() - 1));
}

std::optional<std::string> PublicSuffixTable::RegistrableDomainOfHost(
    std::string_view host) const {
  if (host.empty() || host.front() == '.') return std::nullopt;
  const std::string lower = Lower(host);
  const std::string suffix = PublicSuffix(lower);
  if (suffix.size() >= lower.size()) return std::nullopt;
  const std::string_view head =
      std::string_view(lower).substr(0, lower.size() - suffix.size() - 1);
  const auto dot = head.rfind('.');
  const std::string_view label =
      dot == std::string_view::npos ? head : head.substr(dot + 1);
  if (label.empty()) return std::nullopt;
  return std::string(label) + "." + suffix;
}

std::string RegistrableDomainForHost(std::string_view host,
                                     const PublicSuffixTable& psl) {
  while (!host.empty() && host.front() == '.') host.remove_prefix(1);
  while (!host.empty() && host.back() == '.') host.remove_suffix(1);
  std::string lower = Lower(host);
  if (lower.empty() || IsIpLiteral(lower)) return lower;
  return psl.RegistrableDomainOfHost(lower).value_or(lower);
}

std::string RegistrableDomain(std::string_view url, const PublicSuffixTable& psl) {
  const auto parsed = ParseUrl(url);
  if (!parsed) throw ParseError("URL has no hostname: " + std::string(url));
  return RegistrableDomainForHost(parsed->host, psl);
}

PartyVerdict IsThirdParty(std::string_view resource_url, std::string_view site_url,
                          const PublicSuffixTable& psl) {
  PartyVerdict verdict;
  verdict.resource_domain = RegistrableDomain(resource_url, psl);
  verdict.site_domain = RegistrableDomain(site_url, psl);
  verdict.is_third_party = verdict.resource_domain != verdict.site_domain;
  return verdict;
}

CruxIndex CruxIndex::Load(std::istream& in) {
  CruxIndex index;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view view = Trim(line);
    if (view.empty() || view.front() == '#') continue;
    index.Add(view);
  }
  return index;
}

CruxIndex CruxIndex::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CrUX index " + path);
  return Load(in);
}

void CruxIndex::Add(std::string_view url) {
  const auto parsed = ParseUrl(url);
  if (!parsed) return;
  by_host_[parsed->host].emplace_back(url);
  ++count_;
}

std::optional<std::string> CruxIndex::Lookup(std::string_view domain) const {
  const std::string bare = Lower(domain);
  const std::string www = "www." + bare;
  std::optional<std::string> fallback;
  for (auto prefix : kProbePrefixes) {
    const bool wants_www = prefix.find("www.") != std::string_view::npos;
    const std::string scheme(prefix.substr(0, prefix.find("://")));
    const auto it = by_host_.find(wants_www ? www : bare);
    if (it == by_host_.end()) continue;
    for (const auto& url : it->second) {
      const auto parsed = ParseUrl(url);
      if (parsed->scheme == scheme) return url;
      if (!fallback) fallback = url;
    }
  }
  return fallback;
}

std::optional<std::string> ResolveCandidateUrl(std::string_view domain,
                                               const CruxIndex& crux,
                                               const UrlProber& prober) {
  if (auto known = crux.Lookup(domain)) return known;
  for (auto prefix : kProbePrefixes) {
    const std::string candidate = std::string(prefix) + std::string(domain);
    bool reachable = false;
    try {
      reachable = prober && prober(candidate);
    } catch (...) {
      reachable = false;
    }
    if (reachable) return candidate;
  }
  return std::nullopt;
}

}  // namespace walletprobe
