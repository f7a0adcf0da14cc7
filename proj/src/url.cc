#include "walletprobe/url.h"

#include <algorithm>
#include <cctype>

namespace walletprobe {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool IsSchemeChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
         c == '.';
}

}  // namespace

std::optional<Url> ParseUrl(std::string_view text) {
  const auto sep = text.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  const std::string_view scheme = text.substr(0, sep);
  if (!std::isalpha(static_cast<unsigned char>(scheme.front())) ||
      !std::all_of(scheme.begin(), scheme.end(), IsSchemeChar)) {
    return std::nullopt;
  }

  Url url;
  url.scheme = Lower(scheme);
  std::string_view rest = text.substr(sep + 3);

  const auto authority_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, authority_end);
  rest = authority_end == std::string_view::npos ? std::string_view()
                                                 : rest.substr(authority_end);

  if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority.remove_prefix(at + 1);
  }

  std::string_view host = authority;
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(1, close - 1);
    std::string_view tail = authority.substr(close + 1);
    if (!tail.empty()) {
      if (tail.front() != ':') return std::nullopt;
      url.port = std::string(tail.substr(1));
    }
  } else if (const auto colon = authority.rfind(':');
             colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    url.port = std::string(authority.substr(colon + 1));
  }
  if (!std::all_of(url.port.begin(), url.port.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    return std::nullopt;
  }
  while (!host.empty() && host.back() == '.') host.remove_suffix(1);
  if (host.empty()) return std::nullopt;
  if (std::any_of(host.begin(), host.end(), [](unsigned char c) {
        return std::isspace(c) || c == '%' || c == '\\';
      })) {
    return std::nullopt;
  }
  url.host = Lower(host);

  const auto fragment_pos = rest.find('#');
  if (fragment_pos != std::string_view::npos) {
    url.fragment = std::string(rest.substr(fragment_pos + 1));
    rest = rest.substr(0, fragment_pos);
  }
  const auto query_pos = rest.find('?');
  if (query_pos != std::string_view::npos) {
    url.has_query = true;
    url.query = std::string(rest.substr(query_pos + 1));
    rest = rest.substr(0, query_pos);
  }
  url.path = std::string(rest);
  return url;
}

bool IsIpLiteral(std::string_view host) {
  if (host.find(':') != std::string_view::npos) return true;
  int parts = 0;
  std::size_t start = 0;
  while (start <= host.size()) {
    auto end = host.find('.', start);
    if (end == std::string_view::npos) end = host.size();
    const auto part = host.substr(start, end - start);
    if (part.empty() || part.size() > 3 ||
        !std::all_of(part.begin(), part.end(),
                     [](unsigned char c) { return std::isdigit(c); }) ||
        std::stoi(std::string(part)) > 255) {
      return false;
    }
    ++parts;
    start = end + 1;
  }
  return parts == 4;
}

}  // namespace walletprobe
