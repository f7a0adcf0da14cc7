#include "walletprobe/trace_model.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <regex>
#include <sstream>

#include "walletprobe/error.h"
#include "walletprobe/transforms.h"
#include "walletprobe/url.h"

namespace walletprobe {

using nlohmann::json;

namespace {

// Context for error messages: the 1-based line and a field prefix such as
// "requests[3]".
struct Where {
  std::size_t line;
  std::string prefix;

  std::string Field(std::string_view name) const {
    return prefix.empty() ? std::string(name) : prefix + "." + std::string(name);
  }
};

[[noreturn]] void Fail(const Where& where, std::string_view field,
                       const std::string& message) {
  throw ValidationError(where.Field(field), message, where.line);
}

const json* Find(const json& obj, std::string_view key) {
  const auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

std::string RequireString(const json& obj, std::string_view key,
                          const Where& where) {
  const json* v = Find(obj, key);
  if (v == nullptr) Fail(where, key, "required");
  if (!v->is_string()) Fail(where, key, "must be a string");
  return v->get<std::string>();
}

std::optional<std::string> OptionalString(const json& obj, std::string_view key,
                                          const Where& where) {
  const json* v = Find(obj, key);
  if (v == nullptr || v->is_null()) return std::nullopt;
  if (!v->is_string()) Fail(where, key, "must be a string");
  return v->get<std::string>();
}

std::int64_t RequireInt(const json& obj, std::string_view key,
                        const Where& where) {
  const json* v = Find(obj, key);
  if (v == nullptr) Fail(where, key, "required");
  if (!v->is_number_integer()) Fail(where, key, "must be an integer");
  return v->get<std::int64_t>();
}

std::vector<std::string> StringList(const json& obj, std::string_view key,
                                    const Where& where, bool required) {
  const json* v = Find(obj, key);
  if (v == nullptr || v->is_null()) {
    if (required) Fail(where, key, "required");
    return {};
  }
  if (!v->is_array()) Fail(where, key, "must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *v) {
    if (!item.is_string()) Fail(where, key, "must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

json Extras(const json& obj, std::initializer_list<std::string_view> known) {
  json extra = json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool is_known = false;
    for (auto k : known) {
      if (it.key() == k) {
        is_known = true;
        break;
      }
    }
    if (!is_known) extra[it.key()] = it.value();
  }
  return extra;
}

template <typename Enum, std::size_t N>
Enum ParseEnum(const json& obj, std::string_view key, const Where& where,
               const std::array<Enum, N>& values) {
  const std::string text = RequireString(obj, key, where);
  for (Enum e : values) {
    if (ToString(e) == text) return e;
  }
  Fail(where, key, "unknown value \"" + text + "\"");
}

bool IsValidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if (c >= 0xc2 && c <= 0xdf) {
      len = 2;
    } else if (c >= 0xe0 && c <= 0xef) {
      len = 3;
    } else if (c >= 0xf0 && c <= 0xf4) {
      len = 4;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xc0) != 0x80) return false;
    }
    if (len == 3) {
      const auto c1 = static_cast<unsigned char>(s[i + 1]);
      if ((c == 0xe0 && c1 < 0xa0) || (c == 0xed && c1 >= 0xa0)) return false;
    } else if (len == 4) {
      const auto c1 = static_cast<unsigned char>(s[i + 1]);
      if ((c == 0xf0 && c1 < 0x90) || (c == 0xf4 && c1 >= 0x90)) return false;
    }
    i += len;
  }
  return true;
}

// Decodes a payload field according to the record's "encoding" field.
std::optional<std::string> Payload(const json& obj, std::string_view key,
                                   const Where& where) {
  auto raw = OptionalString(obj, key, where);
  if (!raw) return std::nullopt;
  const auto encoding = OptionalString(obj, "encoding", where).value_or("utf8");
  if (encoding == "utf8") return raw;
  if (encoding == "base64") {
    if (raw->empty()) return std::string();
    auto decoded = Base64Decode(*raw, false, true);
    if (!decoded) Fail(where, key, "invalid base64 payload");
    return decoded;
  }
  Fail(where, "encoding", "must be \"utf8\" or \"base64\"");
}

void PutPayload(json& obj, std::string_view key, const std::string& bytes) {
  if (IsValidUtf8(bytes)) {
    obj[std::string(key)] = bytes;
    obj["encoding"] = "utf8";
  } else {
    obj[std::string(key)] = Base64Encode(bytes, false, true);
    obj["encoding"] = "base64";
  }
}

void CheckUrlOrMarker(const std::string& value, std::string_view field,
                      const Where& where) {
  if (!IsUrlMarker(value) && !IsAbsoluteUrl(value)) {
    Fail(where, field, "must be an absolute URL or \"inline\"/\"unknown\"");
  }
}

void CheckTimestamp(std::int64_t ts, std::int64_t& previous, const Where& where) {
  if (ts < 0) Fail(where, "timestamp", "precedes capture start");
  if (ts < previous) Fail(where, "timestamp", "not monotone within its list");
  previous = ts;
}

constexpr std::array<TargetKind, 3> kTargetKinds = {
    TargetKind::kWebsite, TargetKind::kDapp, TargetKind::kExtension};
constexpr std::array<AccessMode, 2> kAccessModes = {AccessMode::kDirect,
                                                    AccessMode::kEnumeration};
constexpr std::array<RequestKind, 3> kRequestKinds = {
    RequestKind::kHttpGet, RequestKind::kHttpPost, RequestKind::kWsOut};
constexpr std::array<CookieSource, 2> kCookieSources = {CookieSource::kHeader,
                                                        CookieSource::kScript};

bool IsLowerHex(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
}

// Per-record invariants, shared by the parser and ValidateTraceBundle.

void CheckTarget(const TargetDescriptor& t, const Where& where) {
  if (t.url.empty()) Fail(where, "target.url", "required");
  if (t.kind == TargetKind::kExtension) {
    if (t.url.find("://") != std::string::npos) {
      Fail(where, "target.url", "extension targets carry an extension id, not a URL");
    }
  } else if (!IsAbsoluteUrl(t.url)) {
    Fail(where, "target.url", "must be an absolute URL");
  }
  if (t.rank && *t.rank < 1) Fail(where, "target.rank", "must be a positive integer");
}

void CheckCaptureMeta(const CaptureMeta& m, const Where& where) {
  static const std::regex kUtc(
      R"(^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?Z$)");
  if (!std::regex_match(m.capture_started_at, kUtc)) {
    Fail(where, "capture_meta.capture_started_at",
         "must be a UTC timestamp like 2023-02-03T10:00:00Z");
  }
  if (m.max_duration_s <= 0) {
    Fail(where, "capture_meta.max_duration_s", "must be > 0");
  }
  for (const auto& page : m.pages_visited) {
    if (!IsAbsoluteUrl(page)) {
      Fail(where, "capture_meta.pages_visited", "must contain absolute URLs");
    }
  }
}

void CheckApiCall(const ApiCallRecord& r, const Where& where) {
  CheckUrlOrMarker(r.script_url, "script_url", where);
  if (r.symbol.empty()) Fail(where, "symbol", "required");
  if (r.access_mode == AccessMode::kEnumeration &&
      r.symbol.rfind("window.", 0) != 0) {
    Fail(where, "symbol", "enumeration accesses must name a window.* property");
  }
}

void CheckRequest(const NetworkRecord& r, const Where& where) {
  if (!IsAbsoluteUrl(r.url)) Fail(where, "url", "must be an absolute URL");
  if (!r.initiator_url.empty()) {
    CheckUrlOrMarker(r.initiator_url, "initiator_url", where);
  }
  switch (r.kind) {
    case RequestKind::kHttpGet:
      if (r.post_body) Fail(where, "post_body", "not allowed for kind=http_get");
      if (r.ws_payload) Fail(where, "ws_payload", "not allowed for kind=http_get");
      break;
    case RequestKind::kHttpPost:
      if (!r.post_body) Fail(where, "post_body", "post_body required for kind=http_post");
      if (r.ws_payload) Fail(where, "ws_payload", "not allowed for kind=http_post");
      break;
    case RequestKind::kWsOut:
      if (!r.ws_payload) Fail(where, "ws_payload", "ws_payload required for kind=ws_out");
      if (r.post_body) Fail(where, "post_body", "not allowed for kind=ws_out");
      break;
  }
}

void CheckCookie(const CookieRecord& r, const Where& where) {
  if (r.domain.empty()) Fail(where, "domain", "must be non-empty");
}

void CheckScript(const ScriptRecord& r, const Where& where) {
  CheckUrlOrMarker(r.script_url, "script_url", where);
  if (r.body_hash.size() != 64 || !IsLowerHex(r.body_hash)) {
    Fail(where, "body_hash", "must be a lowercase hex SHA-256 digest");
  }
  if (r.body && ScriptBodyHash(*r.body) != r.body_hash) {
    Fail(where, "body_hash", "does not match the digest of body");
  }
}

void ParseHeader(const json& obj, const Where& where, TraceBundle& bundle) {
  bundle.visit_id = RequireString(obj, "visit_id", where);
  if (bundle.visit_id.empty()) Fail(where, "visit_id", "must be non-empty");

  const json* target = Find(obj, "target");
  if (target == nullptr || !target->is_object()) {
    Fail(where, "target", "required object");
  }
  const Where tw{where.line, where.Field("target")};
  bundle.target.kind = ParseEnum(*target, "kind", tw, kTargetKinds);
  bundle.target.url = RequireString(*target, "url", tw);
  if (const json* rank = Find(*target, "rank"); rank && !rank->is_null()) {
    if (!rank->is_number_integer()) Fail(tw, "rank", "must be an integer");
    bundle.target.rank = rank->get<std::int64_t>();
  }
  bundle.target.category = OptionalString(*target, "category", tw);
  bundle.target.extra = Extras(*target, {"kind", "url", "rank", "category"});

  const json* meta = Find(obj, "capture_meta");
  if (meta == nullptr || !meta->is_object()) {
    Fail(where, "capture_meta", "required object");
  }
  const Where mw{where.line, where.Field("capture_meta")};
  auto& m = bundle.capture_meta;
  m.capture_started_at = RequireString(*meta, "capture_started_at", mw);
  m.max_duration_s = RequireInt(*meta, "max_duration_s", mw);
  m.pages_visited = StringList(*meta, "pages_visited", mw, false);
  m.wallet_profile_id =
      OptionalString(*meta, "wallet_profile_id", mw).value_or(std::string());
  m.extra = Extras(*meta, {"capture_started_at", "max_duration_s",
                           "pages_visited", "wallet_profile_id"});

  bundle.extra = Extras(obj, {"type", "visit_id", "target", "capture_meta"});
  CheckTarget(bundle.target, where);
  CheckCaptureMeta(bundle.capture_meta, where);
}

json HeaderJson(const TraceBundle& b) {
  json target = b.target.extra;
  target["kind"] = ToString(b.target.kind);
  target["url"] = b.target.url;
  if (b.target.rank) target["rank"] = *b.target.rank;
  if (b.target.category) target["category"] = *b.target.category;

  json meta = b.capture_meta.extra;
  meta["capture_started_at"] = b.capture_meta.capture_started_at;
  meta["max_duration_s"] = b.capture_meta.max_duration_s;
  meta["pages_visited"] = b.capture_meta.pages_visited;
  meta["wallet_profile_id"] = b.capture_meta.wallet_profile_id;

  json header = b.extra;
  header["type"] = "header";
  header["visit_id"] = b.visit_id;
  header["target"] = std::move(target);
  header["capture_meta"] = std::move(meta);
  return header;
}

}  // namespace

std::string_view ToString(TargetKind kind) {
  switch (kind) {
    case TargetKind::kWebsite: return "website";
    case TargetKind::kDapp: return "dapp";
    case TargetKind::kExtension: return "extension";
  }
  return "";
}

std::string_view ToString(AccessMode mode) {
  return mode == AccessMode::kDirect ? "direct" : "enumeration";
}

std::string_view ToString(RequestKind kind) {
  switch (kind) {
    case RequestKind::kHttpGet: return "http_get";
    case RequestKind::kHttpPost: return "http_post";
    case RequestKind::kWsOut: return "ws_out";
  }
  return "";
}

std::string_view ToString(CookieSource source) {
  return source == CookieSource::kHeader ? "header" : "script";
}

std::string ScriptBodyHash(std::string_view body) { return Sha256Hex(body); }

TraceBundle ParseTraceBundle(std::istream& in) {
  TraceBundle bundle;
  bool have_header = false;
  std::int64_t last_api = 0, last_req = 0, last_cookie = 0;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("record must be a JSON object", line_no);

    const Where top{line_no, ""};
    const std::string type = RequireString(obj, "type", top);
    if (!have_header) {
      if (type != "header") Fail(top, "type", "first record must be the header");
      ParseHeader(obj, top, bundle);
      have_header = true;
      continue;
    }

    if (type == "api_call") {
      const Where w{line_no, "api_calls[" + std::to_string(bundle.api_calls.size()) + "]"};
      ApiCallRecord r;
      r.script_url = RequireString(obj, "script_url", w);
      r.symbol = RequireString(obj, "symbol", w);
      r.access_mode = ParseEnum(obj, "access_mode", w, kAccessModes);
      r.stack = StringList(obj, "stack", w, false);
      r.timestamp = RequireInt(obj, "timestamp", w);
      r.extra = Extras(obj, {"type", "script_url", "symbol", "access_mode",
                             "stack", "timestamp"});
      CheckApiCall(r, w);
      CheckTimestamp(r.timestamp, last_api, w);
      bundle.api_calls.push_back(std::move(r));
    } else if (type == "request") {
      const Where w{line_no, "requests[" + std::to_string(bundle.requests.size()) + "]"};
      NetworkRecord r;
      r.kind = ParseEnum(obj, "kind", w, kRequestKinds);
      r.url = RequireString(obj, "url", w);
      r.post_body = Payload(obj, "post_body", w);
      r.ws_payload = Payload(obj, "ws_payload", w);
      r.response_set_cookies = StringList(obj, "response_set_cookies", w, false);
      r.initiator_url = OptionalString(obj, "initiator_url", w).value_or("");
      r.timestamp = RequireInt(obj, "timestamp", w);
      r.extra = Extras(obj, {"type", "kind", "url", "post_body", "ws_payload",
                             "encoding", "response_set_cookies",
                             "initiator_url", "timestamp"});
      CheckRequest(r, w);
      CheckTimestamp(r.timestamp, last_req, w);
      bundle.requests.push_back(std::move(r));
    } else if (type == "cookie") {
      const Where w{line_no, "cookies[" + std::to_string(bundle.cookies.size()) + "]"};
      CookieRecord r;
      r.name = RequireString(obj, "name", w);
      r.value = RequireString(obj, "value", w);
      r.domain = RequireString(obj, "domain", w);
      r.source = ParseEnum(obj, "source", w, kCookieSources);
      r.timestamp = RequireInt(obj, "timestamp", w);
      r.extra = Extras(obj, {"type", "name", "value", "domain", "source", "timestamp"});
      CheckCookie(r, w);
      CheckTimestamp(r.timestamp, last_cookie, w);
      bundle.cookies.push_back(std::move(r));
    } else if (type == "script") {
      const Where w{line_no, "scripts[" + std::to_string(bundle.scripts.size()) + "]"};
      ScriptRecord r;
      r.script_url = RequireString(obj, "script_url", w);
      r.body_hash = RequireString(obj, "body_hash", w);
      r.body = Payload(obj, "body", w);
      r.extra = Extras(obj, {"type", "script_url", "body_hash", "body", "encoding"});
      CheckScript(r, w);
      bundle.scripts.push_back(std::move(r));
    } else if (type == "header") {
      Fail(top, "type", "duplicate header record");
    } else {
      Fail(top, "type", "unknown record type \"" + type + "\"");
    }
  }
  if (in.bad()) throw ParseError("read failure");
  if (!have_header) throw ParseError("empty trace: missing header record", 1);
  return bundle;
}

TraceBundle ParseTraceBundle(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseTraceBundle(in);
}

TraceBundle ReadTraceBundleFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  return ParseTraceBundle(in);
}

void ValidateTraceBundle(const TraceBundle& bundle) {
  const Where top{0, ""};
  if (bundle.visit_id.empty()) Fail(top, "visit_id", "must be non-empty");
  CheckTarget(bundle.target, top);
  CheckCaptureMeta(bundle.capture_meta, top);
  std::int64_t last = 0;
  for (std::size_t i = 0; i < bundle.api_calls.size(); ++i) {
    const Where w{0, "api_calls[" + std::to_string(i) + "]"};
    CheckApiCall(bundle.api_calls[i], w);
    CheckTimestamp(bundle.api_calls[i].timestamp, last, w);
  }
  last = 0;
  for (std::size_t i = 0; i < bundle.requests.size(); ++i) {
    const Where w{0, "requests[" + std::to_string(i) + "]"};
    CheckRequest(bundle.requests[i], w);
    CheckTimestamp(bundle.requests[i].timestamp, last, w);
  }
  last = 0;
  for (std::size_t i = 0; i < bundle.cookies.size(); ++i) {
    const Where w{0, "cookies[" + std::to_string(i) + "]"};
    CheckCookie(bundle.cookies[i], w);
    CheckTimestamp(bundle.cookies[i].timestamp, last, w);
  }
  for (std::size_t i = 0; i < bundle.scripts.size(); ++i) {
    CheckScript(bundle.scripts[i], Where{0, "scripts[" + std::to_string(i) + "]"});
  }
}

std::string WriteTraceBundle(const TraceBundle& bundle) {
  std::string out = HeaderJson(bundle).dump();
  out.push_back('\n');

  for (const auto& r : bundle.api_calls) {
    json obj = r.extra;
    obj["type"] = "api_call";
    obj["script_url"] = r.script_url;
    obj["symbol"] = r.symbol;
    obj["access_mode"] = ToString(r.access_mode);
    obj["stack"] = r.stack;
    obj["timestamp"] = r.timestamp;
    out += obj.dump();
    out.push_back('\n');
  }
  for (const auto& r : bundle.requests) {
    json obj = r.extra;
    obj["type"] = "request";
    obj["kind"] = ToString(r.kind);
    obj["url"] = r.url;
    if (r.post_body) PutPayload(obj, "post_body", *r.post_body);
    if (r.ws_payload) PutPayload(obj, "ws_payload", *r.ws_payload);
    obj["response_set_cookies"] = r.response_set_cookies;
    if (!r.initiator_url.empty()) obj["initiator_url"] = r.initiator_url;
    obj["timestamp"] = r.timestamp;
    out += obj.dump();
    out.push_back('\n');
  }
  for (const auto& r : bundle.cookies) {
    json obj = r.extra;
    obj["type"] = "cookie";
    obj["name"] = r.name;
    obj["value"] = r.value;
    obj["domain"] = r.domain;
    obj["source"] = ToString(r.source);
    obj["timestamp"] = r.timestamp;
    out += obj.dump();
    out.push_back('\n');
  }
  for (const auto& r : bundle.scripts) {
    json obj = r.extra;
    obj["type"] = "script";
    obj["script_url"] = r.script_url;
    obj["body_hash"] = r.body_hash;
    if (r.body) PutPayload(obj, "body", *r.body);
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace walletprobe
