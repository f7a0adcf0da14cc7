#include "walletprobe/fingerprint.h"

#include <chrono>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.h"
#include "walletprobe/error.h"

namespace walletprobe {
namespace {

// One symbol per category, each resolved by first-match.
const std::vector<std::pair<std::string, std::string>>& OnePerCategory() {
  static const std::vector<std::pair<std::string, std::string>> rows = {
      {"window.ethereum", "Wallet"},
      {"RTCPeerConnection.prototype.createOffer", "RTC"},
      {"WebGLRenderingContext.prototype.getParameter", "WebGL"},
      {"HTMLCanvasElement.prototype.toDataURL", "Canvas"},
      {"window.localStorage", "Storage"},
      {"Screen.prototype.colorDepth", "ScreenSize"},
      {"Document.prototype.cookie", "Cookies"},
      {"Date.prototype.getTimezoneOffset", "DateTime"},
      {"Navigator.prototype.getBattery", "Battery"},
      {"window.innerHeight", "WindowSize"},
      {"Navigator.prototype.connection", "Connection"},
      {"window.devicePixelRatio", "ScreenResolution"},
      {"window.name", "WindowLocation"},
      {"Navigator.prototype.plugins", "Plugins"},
      {"Navigator.prototype.userAgent", "Browser"},
      {"Navigator.prototype.language", "Language"},
      {"Navigator.prototype.hardwareConcurrency", "Device"},
      {"AudioBuffer.prototype.getChannelData", "Audio"},
      {"Navigator.prototype.mediaDevices", "Media"},
      {"Navigator.prototype.doNotTrack", "Navigator"},
      {"Performance.prototype.now", "Performance"},
      {"speechSynthesis.getVoices", "SpeechSynthesis"},
  };
  return rows;
}

std::vector<std::string> SymbolsFor(const std::vector<std::string>& categories) {
  std::vector<std::string> out;
  for (const auto& c : categories) {
    for (const auto& [symbol, category] : OnePerCategory()) {
      if (category == c) out.push_back(symbol);
    }
  }
  return out;
}

TEST(GlobMatchTest, Basics) {
  EXPECT_TRUE(GlobMatch("*", ""));
  EXPECT_TRUE(GlobMatch("abc", "abc"));
  EXPECT_FALSE(GlobMatch("abc", "abcd"));
  EXPECT_TRUE(GlobMatch("a*", "abcd"));
  EXPECT_FALSE(GlobMatch("a*", "xabc"));
  EXPECT_TRUE(GlobMatch("*Storage*", "window.sessionStorage.getItem"));
  EXPECT_FALSE(GlobMatch("*Storage*", "window.storage"));
  EXPECT_TRUE(GlobMatch("a*b*c", "aXbYbZc"));
  EXPECT_FALSE(GlobMatch("a*b*c", "aXbYbZ"));
  EXPECT_TRUE(GlobMatch("**", "x"));
  EXPECT_TRUE(GlobMatch("a.b", "a.b"));
  EXPECT_FALSE(GlobMatch("a.b", "aXb"));
}

TEST(GlobMatchTest, PathologicalPatternIsFast) {
  const std::string text(200000, 'a');
  std::string pattern;
  for (int i = 0; i < 50; ++i) pattern += "*a";
  pattern += "*b";
  const auto start = std::chrono::steady_clock::now();
  EXPECT_FALSE(GlobMatch(pattern, text));
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
}

TEST(CategoryTest, UniverseAndExplicitSet) {
  const auto& universe = FingerprintCategoryUniverse();
  EXPECT_EQ(universe.size(), 22u);
  EXPECT_EQ(ExplicitFingerprintCategories().size(), 8u);
  for (const auto& c : ExplicitFingerprintCategories()) {
    EXPECT_NE(std::find(universe.begin(), universe.end(), c), universe.end()) << c;
  }
  EXPECT_EQ(ClassifierConfig::Default().patterns.size(), 48u);
  EXPECT_EQ(ClassifierConfig::Default().category_threshold, 10);
}

TEST(CategoryTest, OneSymbolPerCategory) {
  const auto config = ClassifierConfig::Default();
  std::set<std::string> seen;
  for (const auto& [symbol, category] : OnePerCategory()) {
    const auto hit = CategorizeCall(symbol, config);
    ASSERT_TRUE(hit) << symbol;
    EXPECT_EQ(hit->category, category) << symbol;
    EXPECT_EQ(hit->is_explicit, ExplicitFingerprintCategories().count(category) > 0);
    seen.insert(category);
  }
  EXPECT_EQ(seen.size(), 22u);
  EXPECT_FALSE(CategorizeCall("Element.prototype.getBoundingClientRect", config));
}

TEST(CategoryTest, FirstMatchWins) {
  // Matches both "*Storage*" and "*Width*"; Storage is listed first.
  const auto hit = CategorizeCall("StorageWidth", ClassifierConfig::Default());
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->category, "Storage");
}

TEST(ClassifyTest, ThresholdBoundary) {
  const auto config = ClassifierConfig::Default();
  const std::vector<std::string> nine = {"Canvas",     "Storage",    "ScreenSize",
                                         "Cookies",    "DateTime",   "WindowSize",
                                         "Connection", "Browser",    "Language"};
  auto verdict = ClassifyScript("s.js", SymbolsFor(nine), config);
  EXPECT_EQ(verdict.categories_hit.size(), 9u);
  EXPECT_FALSE(verdict.flagged);

  auto ten = nine;
  ten.push_back("Performance");
  verdict = ClassifyScript("s.js", SymbolsFor(ten), config);
  EXPECT_EQ(verdict.categories_hit.size(), 10u);
  EXPECT_EQ(verdict.explicit_hit, std::set<std::string>{"Canvas"});
  EXPECT_TRUE(verdict.flagged);
}

TEST(ClassifyTest, ExplicitCategoryRequired) {
  std::vector<std::string> passive;
  for (const auto& c : FingerprintCategoryUniverse()) {
    if (!ExplicitFingerprintCategories().count(c)) passive.push_back(c);
  }
  ASSERT_EQ(passive.size(), 14u);
  const auto verdict =
      ClassifyScript("s.js", SymbolsFor(passive), ClassifierConfig::Default());
  EXPECT_EQ(verdict.categories_hit.size(), 14u);
  EXPECT_FALSE(verdict.flagged);
}

TEST(ClassifyTest, RepeatedSymbolsCountOnce) {
  std::vector<std::string> symbols(50, "HTMLCanvasElement.prototype.toDataURL");
  const auto verdict = ClassifyScript("s.js", symbols, ClassifierConfig::Default());
  EXPECT_EQ(verdict.categories_hit.size(), 1u);
}

TEST(ClassifyTest, AddingSymbolsNeverUnflags) {
  std::mt19937 rng(7);
  const auto config = ClassifierConfig::Default();
  const auto& rows = OnePerCategory();
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> symbols;
    bool was_flagged = false;
    std::size_t was_count = 0;
    for (int step = 0; step < 30; ++step) {
      symbols.push_back(rows[rng() % rows.size()].first);
      const auto v = ClassifyScript("s.js", symbols, config);
      EXPECT_GE(v.categories_hit.size(), was_count);
      if (was_flagged) EXPECT_TRUE(v.flagged);
      was_flagged = v.flagged;
      was_count = v.categories_hit.size();
    }
  }
}

TEST(PatternFileTest, ShippedFileEqualsDefault) {
  const auto loaded = ClassifierConfig::LoadPatternFile(
      testing::SourcePath("data/fingerprint_patterns.tsv"));
  const auto def = ClassifierConfig::Default();
  ASSERT_EQ(loaded.patterns.size(), def.patterns.size());
  for (std::size_t i = 0; i < def.patterns.size(); ++i) {
    EXPECT_EQ(loaded.patterns[i].pattern, def.patterns[i].pattern);
    EXPECT_EQ(loaded.patterns[i].category, def.patterns[i].category);
    EXPECT_EQ(loaded.patterns[i].is_explicit, def.patterns[i].is_explicit);
  }
}

TEST(PatternFileTest, RejectsBadRows) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return ClassifierConfig::FromPatternFile(in);
  };
  EXPECT_NO_THROW(parse("# c\n\nCanvas*\tCanvas\t1\n"));
  EXPECT_THROW(parse("Canvas*\tCanvas\n"), ParseError);
  EXPECT_THROW(parse("Canvas*\tPixels\t1\n"), ValidationError);
  EXPECT_THROW(parse("Canvas*\tCanvas\t0\n"), ValidationError);
  EXPECT_THROW(parse("Canvas*\tCanvas\tyes\n"), ValidationError);
  EXPECT_THROW(parse("# only comments\n"), ValidationError);
  try {
    parse("Canvas*\tCanvas\t1\nx\tStorage\t1\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(StatsTest, MeanAndMaxOverFlagged) {
  std::vector<FingerprintVerdict> v(3);
  v[0].flagged = true;
  v[0].categories_hit = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  v[1].flagged = true;
  v[1].categories_hit = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"};
  v[2].categories_hit = {"a"};
  const auto stats = CorpusFingerprintStats(v);
  EXPECT_EQ(stats.scripts, 3u);
  EXPECT_EQ(stats.flagged, 2u);
  EXPECT_DOUBLE_EQ(stats.mean_categories_flagged, 11.0);
  EXPECT_EQ(stats.max_categories_flagged, 12u);
  EXPECT_EQ(CorpusFingerprintStats({}), FingerprintStats{});
}

}  // namespace
}  // namespace walletprobe
