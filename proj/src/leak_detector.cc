#include "walletprobe/leak_detector.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "walletprobe/error.h"
#include "walletprobe/url.h"

namespace walletprobe {

using nlohmann::json;

namespace {

constexpr std::size_t kMinDecodeLength = 4;

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string AsciiUpper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool IsSeparator(char c) {
  switch (c) {
    case '&': case '=': case ';': case ',': case ':': case '"': case '\'':
    case '{': case '}': case '[': case ']': case '(': case ')': case ' ':
    case '\t': case '\n': case '\r': case '/': case '?': case '#':
      return true;
    default:
      return false;
  }
}

bool IsBase64RunChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/' ||
         c == '-' || c == '_';
}

bool IsHostnameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
}

// Decoded text worth searching again: valid UTF-8 without control bytes
// other than TAB/LF/CR. Every intermediate form of a transform chain is text.
bool IsPlausibleText(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      if ((c < 0x20 && c != '\t' && c != '\n' && c != '\r') || c == 0x7f) return false;
      ++i;
      continue;
    }
    std::size_t len = 0;
    if (c >= 0xc2 && c <= 0xdf) len = 2;
    else if (c >= 0xe0 && c <= 0xef) len = 3;
    else if (c >= 0xf0 && c <= 0xf4) len = 4;
    else return false;
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xc0) != 0x80) return false;
    }
    if (len == 3) {
      const auto c1 = static_cast<unsigned char>(s[i + 1]);
      if ((c == 0xe0 && c1 < 0xa0) || (c == 0xed && c1 >= 0xa0)) return false;
    }
    i += len;
  }
  return true;
}

struct Candidate {
  std::string_view text;
  std::size_t offset;
};

// Separator tokens plus maximal base64-alphabet runs (with trailing '='
// padding), so that encoded values containing '/' or '=' stay whole.
std::vector<Candidate> Candidates(std::string_view payload) {
  std::vector<Candidate> out;
  for (const auto& t : Tokenize(payload)) out.push_back({t.text, t.offset});
  std::size_t i = 0;
  while (i < payload.size()) {
    if (!IsBase64RunChar(payload[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < payload.size() && IsBase64RunChar(payload[i])) ++i;
    std::size_t pad = 0;
    while (i < payload.size() && payload[i] == '=' && pad < 3) {
      ++i;
      ++pad;
    }
    if (i - start >= kMinDecodeLength) {
      out.push_back({payload.substr(start, i - start), start});
    }
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.offset != b.offset) return a.offset < b.offset;
    return a.text.size() > b.text.size();
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Candidate& a, const Candidate& b) {
                          return a.offset == b.offset && a.text.size() == b.text.size();
                        }),
            out.end());
  return out;
}

class HitSet {
 public:
  void Accept(PayloadHit hit) {
    for (const auto& h : hits_) {
      if (h.secret_index == hit.secret_index && hit.offset < h.offset + h.length &&
          h.offset < hit.offset + hit.length) {
        return;
      }
    }
    hits_.push_back(std::move(hit));
  }

  std::vector<PayloadHit> Take() {
    std::stable_sort(hits_.begin(), hits_.end(),
                     [](const PayloadHit& a, const PayloadHit& b) {
                       return std::tie(a.offset, a.secret_index) <
                              std::tie(b.offset, b.secret_index);
                     });
    return std::move(hits_);
  }

 private:
  std::vector<PayloadHit> hits_;
};

void PlainScan(std::string_view payload, const std::string& lower_payload,
               const SecretProfile& profile, HitSet& hits) {
  for (std::size_t s = 0; s < profile.secrets.size(); ++s) {
    const Secret& secret = profile.secrets[s];
    switch (secret.kind) {
      case SecretKind::kWalletAddress: {
        const std::string hex = AsciiLower(std::string_view(secret.value).substr(2));
        for (auto pos = lower_payload.find(hex); pos != std::string::npos;
             pos = lower_payload.find(hex, pos + 1)) {
          if (pos >= 2 && lower_payload.compare(pos - 2, 2, "0x") == 0) {
            hits.Accept({s, {}, pos - 2, hex.size() + 2});
          } else {
            hits.Accept({s, {}, pos, hex.size()});
          }
        }
        break;
      }
      case SecretKind::kPassword: {
        for (auto pos = payload.find(secret.value); pos != std::string_view::npos;
             pos = payload.find(secret.value, pos + 1)) {
          hits.Accept({s, {}, pos, secret.value.size()});
        }
        break;
      }
      case SecretKind::kHostname: {
        const std::string host = AsciiLower(secret.value);
        for (auto pos = lower_payload.find(host); pos != std::string::npos;
             pos = lower_payload.find(host, pos + 1)) {
          const std::size_t end = pos + host.size();
          const bool left_ok = pos == 0 || !IsHostnameChar(lower_payload[pos - 1]);
          const bool right_ok =
              end == lower_payload.size() || !IsHostnameChar(lower_payload[end]);
          if (left_ok && right_ok) hits.Accept({s, {}, pos, host.size()});
        }
        break;
      }
    }
  }
}

// Evidence rendering: a sequence of display units, where a unit is either a
// printable ASCII byte ('.' stands in for anything else) or the redaction
// marker, which counts as the marker's 8 characters.
constexpr char32_t kMarkerUnit = 0xffffffff;

std::string RenderEvidence(std::string_view text, const std::vector<PayloadHit>& hits,
                           std::size_t target) {
  std::vector<char32_t> units;
  std::size_t target_unit = 0;
  std::size_t pos = 0;
  std::vector<std::pair<std::size_t, std::size_t>> regions;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    regions.emplace_back(hits[i].offset, hits[i].offset + hits[i].length);
  }
  // Merge overlapping regions; remember which merged region holds `target`.
  std::vector<std::size_t> order(regions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return regions[a] < regions[b]; });
  std::size_t k = 0;
  while (k < order.size()) {
    auto [start, end] = regions[order[k]];
    bool holds_target = order[k] == target;
    std::size_t j = k + 1;
    while (j < order.size() && regions[order[j]].first < end) {
      end = std::max(end, regions[order[j]].second);
      holds_target = holds_target || order[j] == target;
      ++j;
    }
    for (; pos < start && pos < text.size(); ++pos) {
      const auto c = static_cast<unsigned char>(text[pos]);
      units.push_back(c >= 0x20 && c < 0x7f ? c : '.');
    }
    if (holds_target) target_unit = units.size();
    units.push_back(kMarkerUnit);
    pos = std::max(pos, end);
    k = j;
  }
  for (; pos < text.size(); ++pos) {
    const auto c = static_cast<unsigned char>(text[pos]);
    units.push_back(c >= 0x20 && c < 0x7f ? c : '.');
  }

  auto width = [](char32_t u) -> std::size_t { return u == kMarkerUnit ? 8 : 1; };
  std::size_t lo = target_unit;
  std::size_t hi = target_unit + 1;
  std::size_t used = width(units[target_unit]);
  bool grew = true;
  while (grew) {
    grew = false;
    if (hi < units.size() && used + width(units[hi]) <= kMaxEvidenceChars) {
      used += width(units[hi++]);
      grew = true;
    }
    if (lo > 0 && used + width(units[lo - 1]) <= kMaxEvidenceChars) {
      used += width(units[--lo]);
      grew = true;
    }
  }
  std::string out;
  for (std::size_t i = lo; i < hi; ++i) {
    if (units[i] == kMarkerUnit) {
      out += kSecretMarker;
    } else {
      out.push_back(static_cast<char>(units[i]));
    }
  }
  return out;
}

}  // namespace

std::string_view ToString(SecretKind kind) {
  switch (kind) {
    case SecretKind::kWalletAddress: return "wallet_address";
    case SecretKind::kPassword: return "password";
    case SecretKind::kHostname: return "hostname";
  }
  return "";
}

std::string_view ToString(Variant variant) {
  switch (variant) {
    case Variant::kAsGiven: return "as_given";
    case Variant::kLowercase: return "lowercase";
    case Variant::kUppercase: return "uppercase";
    case Variant::kStrip0xLowercase: return "strip_0x_lowercase";
  }
  return "";
}

std::string_view ToString(LeakChannel channel) {
  switch (channel) {
    case LeakChannel::kGetParam: return "get_param";
    case LeakChannel::kPostBody: return "post_body";
    case LeakChannel::kWsPayload: return "ws_payload";
    case LeakChannel::kCookieName: return "cookie_name";
    case LeakChannel::kCookieValue: return "cookie_value";
  }
  return "";
}

void SecretProfile::Validate() const {
  static const std::regex kAddress("^0x[0-9a-fA-F]{40}$");
  if (profile_id.empty()) throw ValidationError("profile_id", "must be non-empty");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < secrets.size(); ++i) {
    const auto& s = secrets[i];
    const std::string field = profile_id + ".secrets[" + std::to_string(i) + "]";
    if (s.id.empty()) throw ValidationError(field + ".id", "must be non-empty");
    if (!ids.insert(s.id).second) {
      throw ValidationError(field + ".id", "duplicate secret id " + s.id);
    }
    if (s.value.empty()) throw ValidationError(field + ".value", "must be non-empty");
    if (s.kind == SecretKind::kWalletAddress && !std::regex_match(s.value, kAddress)) {
      throw ValidationError(field + ".value",
                            "wallet address must be 0x followed by 40 hex digits");
    }
    if (s.kind == SecretKind::kHostname &&
        !std::all_of(s.value.begin(), s.value.end(), IsHostnameChar)) {
      throw ValidationError(field + ".value", "not a hostname");
    }
  }
}

std::vector<SecretProfile> ParseSecretProfiles(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("secrets file: ") + e.what());
  }
  std::vector<json> items;
  if (doc.is_array()) {
    items.assign(doc.begin(), doc.end());
  } else if (doc.is_object() && doc.contains("profiles")) {
    if (!doc["profiles"].is_array()) {
      throw ValidationError("profiles", "must be a list");
    }
    items.assign(doc["profiles"].begin(), doc["profiles"].end());
  } else if (doc.is_object()) {
    items.push_back(doc);
  } else {
    throw ValidationError("secrets", "expected a profile object or a list");
  }

  std::vector<SecretProfile> profiles;
  std::set<std::string> seen;
  for (const auto& item : items) {
    SecretProfile p;
    try {
      p.profile_id = item.at("profile_id").get<std::string>();
      for (const auto& s : item.at("secrets")) {
        Secret secret;
        secret.id = s.at("id").get<std::string>();
        const auto kind = s.at("kind").get<std::string>();
        if (kind == "wallet_address") secret.kind = SecretKind::kWalletAddress;
        else if (kind == "password") secret.kind = SecretKind::kPassword;
        else if (kind == "hostname") secret.kind = SecretKind::kHostname;
        else throw ValidationError("kind", "unknown secret kind \"" + kind + "\"");
        secret.value = s.at("value").get<std::string>();
        p.secrets.push_back(std::move(secret));
      }
    } catch (const json::exception& e) {
      throw ValidationError("secrets", e.what());
    }
    p.Validate();
    if (!seen.insert(p.profile_id).second) {
      throw ValidationError("profile_id", "duplicate profile " + p.profile_id);
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::vector<SecretProfile> LoadSecretProfiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open secrets file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseSecretProfiles(buffer.str());
}

std::vector<std::pair<Variant, std::string>> CanonicalVariants(const Secret& secret) {
  std::vector<std::pair<Variant, std::string>> out;
  auto add = [&out](Variant v, std::string s) {
    for (const auto& [_, existing] : out) {
      if (existing == s) return;
    }
    out.emplace_back(v, std::move(s));
  };
  add(Variant::kAsGiven, secret.value);
  switch (secret.kind) {
    case SecretKind::kWalletAddress: {
      const std::string hex = secret.value.substr(2);
      add(Variant::kLowercase, "0x" + AsciiLower(hex));
      add(Variant::kUppercase, "0x" + AsciiUpper(hex));
      add(Variant::kStrip0xLowercase, AsciiLower(hex));
      break;
    }
    case SecretKind::kHostname:
      add(Variant::kLowercase, AsciiLower(secret.value));
      break;
    case SecretKind::kPassword:
      break;
  }
  return out;
}

bool TransformSet::Allows(Transform t) const {
  const auto& list = IsDigest(t) ? digests : encodings;
  return std::find(list.begin(), list.end(), t) != list.end();
}

std::string ChainToString(const TransformChain& chain) {
  std::string out = "[";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) out += ", ";
    out += TransformName(chain[i]);
  }
  out += "]";
  return out;
}

TermIndex TermIndex::Build(const SecretProfile& profile,
                           const TransformSet& transforms) {
  profile.Validate();
  TermIndex index;
  index.profile_ = profile;

  std::vector<Transform> all = transforms.encodings;
  all.insert(all.end(), transforms.digests.begin(), transforms.digests.end());
  std::sort(all.begin(), all.end());

  struct Pending {
    std::string value;
    std::size_t secret_index;
    Variant variant;
    TransformChain chain;  // outermost first
    bool has_digest;
  };

  for (std::size_t s = 0; s < profile.secrets.size(); ++s) {
    std::vector<Pending> level;
    for (auto& [variant, value] : CanonicalVariants(profile.secrets[s])) {
      level.push_back({value, s, variant, {}, false});
    }
    std::vector<Pending> collected = level;
    for (int depth = 1; depth <= transforms.max_depth; ++depth) {
      std::vector<Pending> next;
      for (const auto& p : level) {
        for (Transform t : all) {
          if (IsDigest(t) && p.has_digest) continue;
          std::string value = ApplyTransform(t, p.value);
          if (value == p.value) continue;  // no-op step
          TransformChain chain{t};
          chain.insert(chain.end(), p.chain.begin(), p.chain.end());
          next.push_back({std::move(value), s, p.variant, std::move(chain),
                          p.has_digest || IsDigest(t)});
        }
      }
      collected.insert(collected.end(), next.begin(), next.end());
      level = std::move(next);
    }
    std::stable_sort(collected.begin(), collected.end(),
                     [](const Pending& a, const Pending& b) {
                       if (a.chain.size() != b.chain.size()) {
                         return a.chain.size() < b.chain.size();
                       }
                       if (a.variant != b.variant) return a.variant < b.variant;
                       return a.chain < b.chain;
                     });
    for (auto& p : collected) {
      index.entries_.try_emplace(std::move(p.value),
                                 TermEntry{p.secret_index, p.variant, std::move(p.chain)});
    }
  }
  return index;
}

const TermEntry* TermIndex::Find(std::string_view candidate) const {
  const auto it = entries_.find(std::string(candidate));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<Token> Tokenize(std::string_view payload) {
  std::vector<Token> tokens;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= payload.size(); ++i) {
    if (i == payload.size() || IsSeparator(payload[i])) {
      if (i > start) tokens.push_back({payload.substr(start, i - start), start});
      start = i + 1;
    }
  }
  return tokens;
}

std::vector<PayloadHit> ScanPayload(std::string_view payload, const TermIndex& index,
                                    const TransformSet& transforms, int depth_budget) {
  HitSet hits;
  if (payload.empty()) return {};
  const std::string lower = AsciiLower(payload);
  PlainScan(payload, lower, index.profile(), hits);

  const auto candidates = Candidates(payload);
  for (const auto& c : candidates) {
    const TermEntry* entry = index.Find(c.text);
    if (entry && static_cast<int>(entry->chain.size()) <= depth_budget) {
      hits.Accept({entry->secret_index, entry->chain, c.offset, c.text.size()});
    }
  }

  if (depth_budget >= 1) {
    for (const auto& c : candidates) {
      if (c.text.size() < kMinDecodeLength) continue;
      for (Transform t : transforms.encodings) {
        const auto decoded = DecodeTransform(t, c.text);
        if (!decoded || *decoded == c.text || !IsPlausibleText(*decoded)) continue;
        for (auto& inner : ScanPayload(*decoded, index, transforms, depth_budget - 1)) {
          TransformChain chain{t};
          chain.insert(chain.end(), inner.chain.begin(), inner.chain.end());
          hits.Accept({inner.secret_index, std::move(chain), c.offset, c.text.size()});
        }
      }
    }
  }
  return hits.Take();
}

std::string RedactSecrets(std::string_view text, const SecretProfile& profile) {
  std::vector<std::string> needles;
  for (const auto& secret : profile.secrets) {
    needles.push_back(AsciiLower(secret.value));
    for (const auto& [_, v] : CanonicalVariants(secret)) needles.push_back(AsciiLower(v));
  }
  // Longest first so a 0x-prefixed address is replaced before its bare hex.
  std::sort(needles.begin(), needles.end(),
            [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  std::string out(text);
  for (const auto& needle : needles) {
    if (needle.empty()) continue;
    std::string lower = AsciiLower(out);
    std::string rebuilt;
    std::size_t pos = 0;
    for (auto hit = lower.find(needle); hit != std::string::npos;
         hit = lower.find(needle, pos)) {
      rebuilt.append(out, pos, hit - pos);
      rebuilt += kSecretMarker;
      pos = hit + needle.size();
    }
    rebuilt.append(out, pos, std::string::npos);
    out = std::move(rebuilt);
  }
  return out;
}

std::vector<LeakFinding> ScanBundle(const TraceBundle& bundle, const TermIndex& index,
                                    const TransformSet& transforms,
                                    const PublicSuffixTable& psl) {
  std::vector<LeakFinding> findings;
  const auto& secrets = index.profile().secrets;

  auto scan = [&](std::string_view text, LeakChannel channel, std::size_t record_index,
                  const std::string& receiver, const std::string& receiver_host) {
    const auto hits = ScanPayload(text, index, transforms, transforms.max_depth);
    for (std::size_t i = 0; i < hits.size(); ++i) {
      LeakFinding f;
      f.visit_id = bundle.visit_id;
      f.secret_id = secrets[hits[i].secret_index].id;
      f.secret_kind = secrets[hits[i].secret_index].kind;
      f.channel = channel;
      f.receiver = receiver;
      f.receiver_host = receiver_host;
      f.chain = hits[i].chain;
      f.evidence = RedactSecrets(RenderEvidence(text, hits, i), index.profile());
      f.record_index = record_index;
      f.offset = hits[i].offset;
      findings.push_back(std::move(f));
    }
  };

  const std::size_t request_base = bundle.api_calls.size();
  for (std::size_t i = 0; i < bundle.requests.size(); ++i) {
    const auto& req = bundle.requests[i];
    const auto url = ParseUrl(req.url);
    if (!url) continue;
    const std::string receiver = RegistrableDomainForHost(url->host, psl);
    switch (req.kind) {
      case RequestKind::kHttpGet:
        if (url->has_query) {
          scan(url->query, LeakChannel::kGetParam, request_base + i, receiver, url->host);
        }
        break;
      case RequestKind::kHttpPost:
        if (req.post_body) {
          scan(*req.post_body, LeakChannel::kPostBody, request_base + i, receiver,
               url->host);
        }
        break;
      case RequestKind::kWsOut:
        if (req.ws_payload) {
          scan(*req.ws_payload, LeakChannel::kWsPayload, request_base + i, receiver,
               url->host);
        }
        break;
    }
  }

  const std::size_t cookie_base = request_base + bundle.requests.size();
  for (std::size_t i = 0; i < bundle.cookies.size(); ++i) {
    const auto& cookie = bundle.cookies[i];
    std::string_view host = cookie.domain;
    while (!host.empty() && host.front() == '.') host.remove_prefix(1);
    const std::string receiver_host = AsciiLower(host);
    const std::string receiver = RegistrableDomainForHost(receiver_host, psl);
    scan(cookie.name, LeakChannel::kCookieName, cookie_base + i, receiver, receiver_host);
    scan(cookie.value, LeakChannel::kCookieValue, cookie_base + i, receiver,
         receiver_host);
  }

  std::stable_sort(findings.begin(), findings.end(),
                   [](const LeakFinding& a, const LeakFinding& b) {
                     return std::tie(a.record_index, a.channel, a.offset, a.secret_id) <
                            std::tie(b.record_index, b.channel, b.offset, b.secret_id);
                   });
  return findings;
}

}  // namespace walletprobe
