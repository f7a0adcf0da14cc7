#ifndef WALLETPROBE_URL_H_
#define WALLETPROBE_URL_H_

#include <optional>
#include <string>
#include <string_view>

namespace walletprobe {

// Components of an absolute hierarchical URL (scheme://authority/path?query).
// Only what the analyzers need: no normalization beyond lowercasing the
// scheme and host.
struct Url {
  std::string scheme;
  std::string host;  // lowercase, brackets stripped for IPv6 literals
  std::string port;  // empty when absent
  std::string path;  // starts with '/' or is empty
  std::string query;  // text after '?', without the '?'
  std::string fragment;
  bool has_query = false;
};

// Returns nullopt unless `text` is `scheme://host...` with a non-empty host.
std::optional<Url> ParseUrl(std::string_view text);

inline bool IsAbsoluteUrl(std::string_view text) {
  return ParseUrl(text).has_value();
}

// True for dotted-quad IPv4 and for IPv6 literals (any host containing ':').
bool IsIpLiteral(std::string_view host);

// Trace records may name a script "inline" or "unknown" instead of a URL.
inline bool IsUrlMarker(std::string_view text) {
  return text == "inline" || text == "unknown";
}

}  // namespace walletprobe

#endif  // WALLETPROBE_URL_H_
