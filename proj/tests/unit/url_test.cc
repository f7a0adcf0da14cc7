#include "walletprobe/url.h"

#include <gtest/gtest.h>

namespace walletprobe {
namespace {

TEST(UrlTest, SplitsComponents) {
  const auto url = ParseUrl("HTTPS://WWW.Example.COM:8443/a/b?x=1&y=2#frag");
  ASSERT_TRUE(url);
  EXPECT_EQ(url->scheme, "https");
  EXPECT_EQ(url->host, "www.example.com");
  EXPECT_EQ(url->port, "8443");
  EXPECT_EQ(url->path, "/a/b");
  EXPECT_EQ(url->query, "x=1&y=2");
  EXPECT_TRUE(url->has_query);
  EXPECT_EQ(url->fragment, "frag");
}

TEST(UrlTest, EmptyQueryIsDistinctFromNoQuery) {
  EXPECT_TRUE(ParseUrl("https://a.com/?")->has_query);
  EXPECT_FALSE(ParseUrl("https://a.com/")->has_query);
}

TEST(UrlTest, RejectsNonAbsolute) {
  EXPECT_FALSE(ParseUrl("inline"));
  EXPECT_FALSE(ParseUrl("/relative/path"));
  EXPECT_FALSE(ParseUrl("https:///nohost"));
  EXPECT_FALSE(ParseUrl(""));
}

TEST(UrlTest, IpLiterals) {
  EXPECT_EQ(ParseUrl("http://127.0.0.1:8080/x")->host, "127.0.0.1");
  EXPECT_EQ(ParseUrl("http://[::1]:80/")->host, "::1");
  EXPECT_TRUE(IsIpLiteral("127.0.0.1"));
  EXPECT_TRUE(IsIpLiteral("::1"));
  EXPECT_FALSE(IsIpLiteral("1.2.3.example"));
  EXPECT_FALSE(IsIpLiteral("example.com"));
}

TEST(UrlTest, Markers) {
  EXPECT_TRUE(IsUrlMarker("inline"));
  EXPECT_TRUE(IsUrlMarker("unknown"));
  EXPECT_FALSE(IsUrlMarker("https://inline/"));
}

}  // namespace
}  // namespace walletprobe
