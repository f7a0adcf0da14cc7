#ifndef WALLETPROBE_TRACE_MODEL_H_
#define WALLETPROBE_TRACE_MODEL_H_

// Trace bundle data model and its JSONL v1 serialization.
//
// A bundle is one recorded visit. On disk it is a JSONL file: the first line
// is a header record carrying visit_id, target and capture_meta; each further
// line is one api_call, request, cookie or script record. Binary payloads
// carry an "encoding" field ("utf8" or "base64"). Unknown fields are kept in
// `extra` so a parse/write cycle is lossless.

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace walletprobe {

enum class TargetKind { kWebsite, kDapp, kExtension };
enum class AccessMode { kDirect, kEnumeration };
enum class RequestKind { kHttpGet, kHttpPost, kWsOut };
enum class CookieSource { kHeader, kScript };

std::string_view ToString(TargetKind kind);
std::string_view ToString(AccessMode mode);
std::string_view ToString(RequestKind kind);
std::string_view ToString(CookieSource source);

struct TargetDescriptor {
  TargetKind kind = TargetKind::kWebsite;
  std::string url;  // extension id when kind == kExtension
  std::optional<std::int64_t> rank;
  std::optional<std::string> category;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const TargetDescriptor&) const = default;
};

struct CaptureMeta {
  std::string capture_started_at;  // ISO-8601 UTC, e.g. 2023-02-03T10:00:00Z
  std::int64_t max_duration_s = 0;
  std::vector<std::string> pages_visited;
  std::string wallet_profile_id;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const CaptureMeta&) const = default;
};

struct ApiCallRecord {
  std::string script_url;
  std::string symbol;
  AccessMode access_mode = AccessMode::kDirect;
  std::vector<std::string> stack;
  std::int64_t timestamp = 0;  // ms since capture start
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const ApiCallRecord&) const = default;
};

struct NetworkRecord {
  RequestKind kind = RequestKind::kHttpGet;
  std::string url;
  std::optional<std::string> post_body;   // raw bytes
  std::optional<std::string> ws_payload;  // raw bytes
  std::vector<std::string> response_set_cookies;
  std::string initiator_url;  // optional in the file; empty when absent
  std::int64_t timestamp = 0;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const NetworkRecord&) const = default;
};

struct CookieRecord {
  std::string name;
  std::string value;
  std::string domain;
  CookieSource source = CookieSource::kHeader;
  std::int64_t timestamp = 0;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const CookieRecord&) const = default;
};

struct ScriptRecord {
  std::string script_url;
  std::string body_hash;  // lowercase hex SHA-256 of the body
  std::optional<std::string> body;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const ScriptRecord&) const = default;
};

struct TraceBundle {
  std::string visit_id;
  TargetDescriptor target;
  CaptureMeta capture_meta;
  std::vector<ApiCallRecord> api_calls;
  std::vector<NetworkRecord> requests;
  std::vector<CookieRecord> cookies;
  std::vector<ScriptRecord> scripts;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const TraceBundle&) const = default;
};

// Parses and validates a JSONL trace. Throws ParseError (with the 1-based
// line number) for malformed lines and ValidationError (naming the field and
// line) for invariant violations. Never returns a partially valid bundle.
TraceBundle ParseTraceBundle(std::istream& in);
TraceBundle ParseTraceBundle(std::string_view text);
TraceBundle ReadTraceBundleFile(const std::string& path);

// Serializes in canonical record order: header, api_calls, requests,
// cookies, scripts. Keys are sorted, so output is byte-stable.
std::string WriteTraceBundle(const TraceBundle& bundle);

// Runs every invariant check on an in-memory bundle. Throws ValidationError.
void ValidateTraceBundle(const TraceBundle& bundle);

// Lowercase hex SHA-256, the digest used for ScriptRecord::body_hash.
std::string ScriptBodyHash(std::string_view body);

}  // namespace walletprobe

#endif  // WALLETPROBE_TRACE_MODEL_H_
