#ifndef WALLETPROBE_LEAK_DETECTOR_H_
#define WALLETPROBE_LEAK_DETECTOR_H_

// Search for plain, encoded and hashed secrets in outgoing traffic.
//
// The search runs in three stages over a payload:
//   1. substring scan for the plain secret (case-insensitive for wallet
//      addresses, hostname-bounded for hostnames);
//   2. exact lookup of every candidate token in a precomputed TermIndex that
//      holds every transform chain of every canonical variant of every
//      secret;
//   3. for every candidate token, each invertible decoding is attempted and
//      the decoded text is searched again with one less unit of depth.
// A chain is written outermost transform first: base64(md5(x)) is
// [base64_std_padded, md5_hex].

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "walletprobe/origin.h"
#include "walletprobe/trace_model.h"
#include "walletprobe/transforms.h"

namespace walletprobe {

enum class SecretKind { kWalletAddress, kPassword, kHostname };
std::string_view ToString(SecretKind kind);

struct Secret {
  std::string id;
  SecretKind kind = SecretKind::kWalletAddress;
  std::string value;
};

struct SecretProfile {
  std::string profile_id;
  std::vector<Secret> secrets;

  // Throws ValidationError: empty/duplicate ids, empty values, malformed
  // wallet addresses (must be 0x + 40 hex digits).
  void Validate() const;
};

// Accepts a single profile object, a JSON list of profiles, or
// {"profiles": [...]}. Every profile is validated.
std::vector<SecretProfile> ParseSecretProfiles(std::string_view json_text);
std::vector<SecretProfile> LoadSecretProfiles(const std::string& path);

enum class Variant { kAsGiven, kLowercase, kUppercase, kStrip0xLowercase };
std::string_view ToString(Variant variant);

// Distinct variant strings of a secret, in Variant order. Wallet addresses
// get all four variants (uppercase keeps the "0x" prefix), hostnames
// as-given and lowercase, passwords as-given only.
std::vector<std::pair<Variant, std::string>> CanonicalVariants(const Secret& secret);

struct TransformSet {
  std::vector<Transform> encodings{kEncodings.begin(), kEncodings.end()};
  std::vector<Transform> digests{kDigests.begin(), kDigests.end()};
  int max_depth = 3;

  static TransformSet Default() { return TransformSet{}; }
  bool Allows(Transform t) const;
};

using TransformChain = std::vector<Transform>;
std::string ChainToString(const TransformChain& chain);

struct TermEntry {
  std::size_t secret_index = 0;
  Variant variant = Variant::kAsGiven;
  TransformChain chain;
};

// Candidate string -> (secret, variant, chain). Holds every chain of length
// 0..max_depth with at most one digest; chains containing a step that leaves
// its input unchanged are omitted because the shorter chain already yields
// the same string. When two chains yield the same string the entry with the
// shorter chain wins, then the earlier variant, then the lexicographically
// smaller chain (transform declaration order, outermost first).
class TermIndex {
 public:
  static TermIndex Build(const SecretProfile& profile, const TransformSet& transforms);

  const TermEntry* Find(std::string_view candidate) const;
  std::size_t size() const { return entries_.size(); }
  const SecretProfile& profile() const { return profile_; }
  const std::unordered_map<std::string, TermEntry>& entries() const {
    return entries_;
  }

 private:
  SecretProfile profile_;
  std::unordered_map<std::string, TermEntry> entries_;
};

struct Token {
  std::string_view text;
  std::size_t offset = 0;
};

// Splits on & = ; , : " ' { } [ ] ( ) space TAB LF CR / ? #. Empty tokens are
// dropped; offsets index into `payload`.
std::vector<Token> Tokenize(std::string_view payload);

struct PayloadHit {
  std::size_t secret_index = 0;
  TransformChain chain;
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const PayloadHit&) const = default;
};

// Three-stage search. Index entries are accepted only when their chain fits
// in `depth_budget`; each decoding consumes one unit. Hits whose region
// overlaps an earlier hit for the same secret are dropped, so a carrier
// token that also contains the plain secret is reported once. Results are
// ordered by offset.
std::vector<PayloadHit> ScanPayload(std::string_view payload, const TermIndex& index,
                                    const TransformSet& transforms, int depth_budget);

enum class LeakChannel { kGetParam, kPostBody, kWsPayload, kCookieName, kCookieValue };
std::string_view ToString(LeakChannel channel);

inline constexpr std::string_view kSecretMarker = "«SECRET»";
inline constexpr std::size_t kMaxEvidenceChars = 120;

struct LeakFinding {
  std::string visit_id;
  std::string secret_id;
  SecretKind secret_kind = SecretKind::kWalletAddress;
  LeakChannel channel = LeakChannel::kGetParam;
  std::string receiver;       // registrable domain
  std::string receiver_host;  // full host (cookie domain without leading dot)
  TransformChain chain;
  std::string evidence;  // redacted excerpt, at most 120 characters
  std::size_t record_index = 0;
  std::size_t offset = 0;
};

// Scans GET query strings, POST bodies, outgoing WebSocket payloads and
// cookie names/values. record_index is the record's position among all
// non-header records in serialized order (api_calls, requests, cookies,
// scripts). Findings are ordered by record_index, then channel, then offset.
std::vector<LeakFinding> ScanBundle(const TraceBundle& bundle, const TermIndex& index,
                                    const TransformSet& transforms,
                                    const PublicSuffixTable& psl);

// Replaces every occurrence of any secret variant in `text`
// (case-insensitively) with the marker.
std::string RedactSecrets(std::string_view text, const SecretProfile& profile);

}  // namespace walletprobe

#endif  // WALLETPROBE_LEAK_DETECTOR_H_
