#include "walletprobe/wallet_api.h"

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"
#include "walletprobe/error.h"

namespace walletprobe {
namespace {

using testing::ShippedPsl;
using testing::SourcePath;

ApiCallRecord Call(std::string script, std::string symbol,
                   AccessMode mode = AccessMode::kDirect, std::int64_t ts = 0) {
  ApiCallRecord r;
  r.script_url = std::move(script);
  r.symbol = std::move(symbol);
  r.access_mode = mode;
  r.timestamp = ts;
  return r;
}

TraceBundle BundleWith(std::string site, std::vector<ApiCallRecord> calls) {
  TraceBundle b;
  b.visit_id = "v";
  b.target.url = std::move(site);
  b.api_calls = std::move(calls);
  return b;
}

TEST(WalletApiTableTest, DefaultMatchesShippedTable) {
  const auto shipped = WalletApiTable::LoadFile(SourcePath("data/wallet_apis.json"));
  EXPECT_EQ(shipped.entries(), WalletApiTable::Default().entries());
  const auto table = WalletApiTable::Default();
  const auto& e = table.entries();
  ASSERT_EQ(e.size(), 5u);
  EXPECT_EQ(e[2].wallet_name, "Binance");
  EXPECT_EQ(e[2].simulated_value, "0x38");
  EXPECT_EQ(e[4].simulated_property_path, "window.cardano.nami.name");
  EXPECT_EQ(table.roots(),
            (std::vector<std::string>{"window.ethereum", "window.BinanceChain",
                                      "window.solana", "window.cardano"}));
}

TEST(WalletApiTableTest, JsonRoundTrip) {
  const auto table = WalletApiTable::Default();
  EXPECT_EQ(WalletApiTable::FromJson(table.ToJson().dump()).entries(), table.entries());
}

TEST(WalletApiTableTest, ObjectEntriesAccepted) {
  const auto t = WalletApiTable::FromJson(
      R"([{"wallet_name":"X","breakpoint_symbol":"window.x",
           "simulated_property_path":"window.x.ok","simulated_value":1}])");
  EXPECT_EQ(t.roots(), std::vector<std::string>{"window.x"});
}

TEST(WalletApiTableTest, RejectsBadTables) {
  EXPECT_THROW(WalletApiTable::FromJson("[1,"), ParseError);
  EXPECT_THROW(WalletApiTable::FromJson("{}"), ValidationError);
  EXPECT_THROW(WalletApiTable::FromJson("[]"), ValidationError);
  EXPECT_THROW(WalletApiTable::FromJson(R"([["A","ethereum","ethereum.x",true]])"),
               ValidationError);
  EXPECT_THROW(WalletApiTable::FromJson(R"([["A","window.a","window.b.x",true]])"),
               ValidationError);
  EXPECT_THROW(WalletApiTable::FromJson(
                   R"([["A","window.a","window.a.x",1],["B","window.a.b","window.a.b.c",1]])"),
               ValidationError);
}

TEST(WalletApiTableTest, RootOfRespectsDotBoundary) {
  const auto t = WalletApiTable::Default();
  EXPECT_EQ(t.RootOf("window.ethereum"), "window.ethereum");
  EXPECT_EQ(t.RootOf("window.ethereum.request"), "window.ethereum");
  EXPECT_EQ(t.RootOf("window.ethereumX"), "");
  EXPECT_EQ(t.RootOf("window.solanaWeb3"), "");
  EXPECT_EQ(t.RootOf("ethereum"), "");
}

TEST(DetectWalletCallsTest, ModesAndOrder) {
  const auto bundle = BundleWith(
      "https://shop.example.com/",
      {Call("https://a.com/x.js", "window.solana.connect", AccessMode::kDirect, 5),
       Call("https://a.com/x.js", "Navigator.prototype.userAgent"),
       Call("https://b.com/y.js", "window.ethereum", AccessMode::kEnumeration, 7)});
  const auto calls = DetectWalletCalls(bundle, WalletApiTable::Default());
  ASSERT_EQ(calls.size(), 2u);
  EXPECT_EQ(calls[0].root_symbol, "window.solana");
  EXPECT_EQ(calls[0].full_symbol, "window.solana.connect");
  EXPECT_EQ(calls[0].mode, WalletAccessMode::kExplicit);
  EXPECT_EQ(calls[0].timestamp, 5);
  EXPECT_EQ(calls[0].site_url, "https://shop.example.com/");
  EXPECT_EQ(calls[1].mode, WalletAccessMode::kImplicit);
}

TEST(SummarizeTest, ExplicitBeatsImplicit) {
  const auto bundle = BundleWith(
      "https://www.site.co.uk/p",
      {Call("s.js", "window.ethereum", AccessMode::kEnumeration),
       Call("s.js", "window.ethereum.isMetaMask"),
       Call("s.js", "window.cardano", AccessMode::kEnumeration)});
  const auto calls = DetectWalletCalls(bundle, WalletApiTable::Default());
  const auto s = SummarizeScript(calls, ShippedPsl());
  EXPECT_TRUE(s.is_explicit());
  EXPECT_EQ(s.roots_explicit, std::vector<std::string>{"window.ethereum"});
  EXPECT_EQ(s.roots_implicit,
            (std::vector<std::string>{"window.ethereum", "window.cardano"}));
  EXPECT_EQ(s.sites, std::set<std::string>{"site.co.uk"});
}

TEST(SummarizeTest, MixedScriptsRejected) {
  std::vector<WalletApiAccess> mixed(2);
  mixed[0].script_url = "a";
  mixed[1].script_url = "b";
  EXPECT_THROW(SummarizeScript(mixed, ShippedPsl()), std::invalid_argument);
}

TEST(SummarizeTest, ExtensionSiteKeptVerbatim) {
  TraceBundle b = BundleWith("nkbihfbeogaeaoehlefnkodbefgpgknn",
                             {Call("chrome-extension://x/c.js", "window.ethereum")});
  b.target.kind = TargetKind::kExtension;
  const auto s = SummarizeScripts(DetectWalletCalls(b, WalletApiTable::Default()),
                                  ShippedPsl());
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].sites, std::set<std::string>{"nkbihfbeogaeaoehlefnkodbefgpgknn"});
}

TEST(CombinationHistogramTest, OrderSensitiveAndExplicitOnly) {
  const auto bundle = BundleWith(
      "https://x.com/",
      {Call("a.js", "window.ethereum"), Call("a.js", "window.solana"),
       Call("b.js", "window.solana"), Call("b.js", "window.ethereum.request"),
       Call("c.js", "window.ethereum"), Call("c.js", "window.ethereum.isMetaMask"),
       Call("c.js", "window.solana"), Call("d.js", "window.ethereum"),
       Call("e.js", "window.solana", AccessMode::kEnumeration)});
  const auto summaries =
      SummarizeScripts(DetectWalletCalls(bundle, WalletApiTable::Default()), ShippedPsl());
  ASSERT_EQ(summaries.size(), 5u);
  EXPECT_EQ(summaries[0].script_url, "a.js");
  const auto h = BuildCombinationHistogram(summaries);
  const std::vector<std::string> eth_sol{"window.ethereum", "window.solana"};
  const std::vector<std::string> sol_eth{"window.solana", "window.ethereum"};
  EXPECT_EQ(h.at(eth_sol), 2u);
  EXPECT_EQ(h.at(sol_eth), 1u);
  EXPECT_EQ(h.at({"window.ethereum"}), 1u);
  EXPECT_EQ(h.size(), 3u);  // the implicit-only script is not counted
  EXPECT_EQ(CombinationKey(eth_sol), "[window.ethereum, window.solana]");
  EXPECT_EQ(CombinationKey({}), "[]");
}

}  // namespace
}  // namespace walletprobe
