#include "walletprobe/pipeline.h"

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_util.h"
#include "walletprobe/error.h"

namespace walletprobe {
namespace {

using nlohmann::json;
using testing::FixturePath;
using testing::ReadFileOrDie;
using testing::ShippedPsl;

struct Corpus20 {
  std::vector<SecretProfile> profiles =
      LoadSecretProfiles(FixturePath("corpus20_secrets.json"));
  PipelineOptions options = [] {
    PipelineOptions o;
    o.site_categories = LoadCategoryCsv(FixturePath("corpus20_site_categories.csv"));
    o.tp_categories = LoadCategoryCsv(testing::SourcePath("data/tp_categories.csv"));
    return o;
  }();

  CorpusReport Run(int workers) {
    options.workers = workers;
    return RunPipeline(FixturePath("corpus20"), profiles, ShippedPsl(), options);
  }
};

TEST(PipelineCorpusTest, HistogramMatchesOracle) {
  const auto expected = json::parse(ReadFileOrDie(FixturePath("corpus20_expected.json")));
  const auto report = Corpus20().Run(4);
  EXPECT_EQ(report.bundles_input, 20u);
  EXPECT_EQ(report.bundles_analyzed, 20u);
  EXPECT_TRUE(report.diagnostics.empty());

  std::map<std::string, std::size_t> histogram;
  for (const auto& row : report.combination_histogram) {
    histogram[CombinationKey(row.roots)] = row.scripts;
  }
  EXPECT_EQ(json(histogram), expected["histogram"]);
  for (std::size_t i = 1; i < report.combination_histogram.size(); ++i) {
    EXPECT_GE(report.combination_histogram[i - 1].scripts,
              report.combination_histogram[i].scripts);
  }
}

TEST(PipelineCorpusTest, ClustersManifestsAndFingerprinting) {
  const auto expected = json::parse(ReadFileOrDie(FixturePath("corpus20_expected.json")));
  const auto report = Corpus20().Run(1);
  ASSERT_FALSE(report.clusters.empty());
  EXPECT_EQ(json(report.clusters[0].members), expected["cluster_members"]);
  for (const auto& c : report.clusters) {
    for (const auto& m : c.members) {
      EXPECT_EQ(m.find(kChallengePlatformPath), std::string::npos) << m;
    }
  }
  ASSERT_EQ(report.manifest_findings.size(), 2u);
  EXPECT_EQ(report.manifest_findings[1].extension_id, "nkbihfbeogaeaoehlefnkodbefgpgknn");
  EXPECT_TRUE(report.manifest_findings[1].injects_everywhere);
  EXPECT_GE(report.fingerprint_all.scripts, report.fingerprint_wallet.scripts);
  EXPECT_EQ(report.fingerprint_all.flagged, report.fingerprinting_scripts.size());
  for (const auto& v : report.fingerprinting_scripts) {
    EXPECT_GE(v.categories_hit.size(), 10u);
    EXPECT_FALSE(v.explicit_hit.empty());
  }
}

TEST(PipelineCorpusTest, OrderingInvariants) {
  const auto report = Corpus20().Run(2);
  for (std::size_t i = 1; i < report.third_party_rollup.size(); ++i) {
    EXPECT_GE(report.third_party_rollup[i - 1].site_count,
              report.third_party_rollup[i].site_count);
  }
  for (std::size_t i = 1; i < report.category_rollup.size(); ++i) {
    EXPECT_GE(report.category_rollup[i - 1].sites, report.category_rollup[i].sites);
  }
  for (const auto& row : report.category_rollup) {
    EXPECT_LE(row.third_party_sites, row.sites);
    EXPECT_LE(row.third_party_calls, row.calls);
  }
  for (std::size_t i = 1; i < report.leak_findings.size(); ++i) {
    const auto& a = report.leak_findings[i - 1];
    const auto& b = report.leak_findings[i];
    EXPECT_LE(std::tie(a.visit_id, a.record_index), std::tie(b.visit_id, b.record_index));
  }
}

TEST(PipelineCorpusTest, DeterministicAcrossWorkerCounts) {
  Corpus20 corpus;
  const auto one = ReportToJson(corpus.Run(1)).dump();
  EXPECT_EQ(ReportToJson(corpus.Run(8)).dump(), one);
  EXPECT_EQ(ReportToJson(corpus.Run(3)).dump(), one);
}

TEST(PipelineCorpusTest, EfficacyOverThirdPartyDomains) {
  Corpus20 corpus;
  corpus.options.blocklists.push_back(
      LoadFilterList(FixturePath("adblock_sample.txt"), FilterListFormat::kAdblock, "A"));
  const auto report = corpus.Run(2);
  ASSERT_TRUE(report.efficacy);
  EXPECT_EQ(report.efficacy->universe.size(), report.third_party_rollup.size());
  EXPECT_GE(report.efficacy->combined.blocked, 1u);
}

TEST(PipelineTest, EmptyAndMissingCorpus) {
  const auto profiles = LoadSecretProfiles(FixturePath("wallet_secrets.json"));
  EXPECT_THROW(RunPipeline(FixturePath("invalid/empty_corpus"), profiles, ShippedPsl(), {}),
               ParseError);
  EXPECT_THROW(RunPipeline(FixturePath("does/not/exist"), profiles, ShippedPsl(), {}),
               ParseError);
}

TEST(PipelineTest, EveryUnanalyzedBundleHasADiagnostic) {
  const auto profiles = LoadSecretProfiles(FixturePath("wallet_secrets.json"));
  const std::string good = ReadFileOrDie(FixturePath("ga_get_leak.jsonl"));
  std::string unknown_profile = good;
  const auto swap = [&](const std::string& from, const std::string& to) {
    unknown_profile.replace(unknown_profile.find(from), from.size(), to);
  };
  swap("\"test-wallet\"", "\"nobody\"");
  swap("degens-farm-ga", "other-visit");
  const std::vector<BundleSource> sources = {
      {"a.jsonl", good},
      {"b.jsonl", "{not json\n"},
      {"c.jsonl", unknown_profile},
      {"d.jsonl", good},  // duplicate visit id
      {"e.jsonl", ReadFileOrDie(FixturePath("invalid/ws_without_payload.jsonl"))},
  };
  const auto report = AnalyzeBundles(sources, profiles, ShippedPsl(), {});
  EXPECT_EQ(report.bundles_input, 5u);
  EXPECT_EQ(report.bundles_analyzed, 1u);
  ASSERT_EQ(report.diagnostics.size(), 4u);
  std::set<std::string> sources_seen;
  for (const auto& d : report.diagnostics) {
    sources_seen.insert(d.source);
    EXPECT_FALSE(d.reason.empty());
  }
  EXPECT_EQ(sources_seen, (std::set<std::string>{"b.jsonl", "c.jsonl", "d.jsonl", "e.jsonl"}));
}

TEST(PipelineTest, AnalyticsLeakRollup) {
  const auto profiles = LoadSecretProfiles(FixturePath("wallet_secrets.json"));
  const std::vector<BundleSource> sources = {
      {"ga.jsonl", ReadFileOrDie(FixturePath("ga_get_leak.jsonl"))},
      {"cookie.jsonl", ReadFileOrDie(FixturePath("mixpanel_cookie_leak.jsonl"))}};
  PipelineOptions options;
  options.tp_categories = LoadCategoryCsv(testing::SourcePath("data/tp_categories.csv"));
  const auto report = AnalyzeBundles(sources, profiles, ShippedPsl(), options);
  ASSERT_EQ(report.leak_rollup.size(), 2u);
  const auto& degens = report.leak_rollup[0].site == "degens.farm" ? report.leak_rollup[0]
                                                                   : report.leak_rollup[1];
  EXPECT_EQ(degens.site, "degens.farm");
  EXPECT_EQ(degens.counts, (LeakCounts{1, 0, 0, 0}));
  EXPECT_EQ(degens.receivers, std::vector<std::string>{"google-analytics.com"});
  const auto& dmm = report.leak_rollup[0].site == "dmm.exchange" ? report.leak_rollup[0]
                                                                 : report.leak_rollup[1];
  // Several matches inside one cookie count as one leaking record.
  EXPECT_EQ(dmm.counts, (LeakCounts{0, 0, 0, 1}));

  bool ga = false;
  for (const auto& r : report.receiver_rollup) {
    if (r.receiver == "google-analytics.com") {
      ga = true;
      EXPECT_EQ(r.category, "Tracking & Analytics");
      EXPECT_EQ(r.sites, 1u);
    }
  }
  EXPECT_TRUE(ga);
}

TEST(RenderReportTest, FilesFormatsAndScrubbing) {
  Corpus20 corpus;
  const auto report = corpus.Run(2);
  const auto files = RenderReport(report, ReportFormat::kBoth, corpus.profiles);
  ASSERT_TRUE(files.count("report.json"));
  ASSERT_TRUE(files.count("leak_findings.csv"));
  ASSERT_TRUE(files.count("combination_histogram.csv"));
  EXPECT_FALSE(files.count("efficacy.csv"));
  const auto& text = files.at("report.json");
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(json::parse(text), ReportToJson(report));
  for (const auto& [name, content] : files) {
    if (name.ends_with(".csv")) {
      EXPECT_NE(content.find("\r\n"), std::string::npos) << name;
    }
    for (const auto& profile : corpus.profiles) {
      EXPECT_EQ(RedactSecrets(content, profile), content) << name;
    }
  }
  const auto json_only = RenderReport(report, ReportFormat::kJson, corpus.profiles);
  EXPECT_EQ(json_only.size(), 1u);
  const auto csv_only = RenderReport(report, ReportFormat::kCsv, corpus.profiles);
  EXPECT_FALSE(csv_only.count("report.json"));
}

TEST(CsvTest, Quoting) {
  EXPECT_EQ(CsvField("plain"), "plain");
  EXPECT_EQ(CsvField("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvField("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(CsvField("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(CsvField(""), "");
}

TEST(CategoryCsvTest, HeaderQuotingAndLookup) {
  const auto mapping = ParseCategoryCsv(
      "domain,category\r\nInfura.io,JSON-RPC Provider\n\"google-analytics.com\",\"Tracking, Analytics\"\n");
  EXPECT_EQ(mapping.size(), 2u);
  EXPECT_EQ(LookupCategory(mapping, "infura.io"), "JSON-RPC Provider");
  EXPECT_EQ(LookupCategory(mapping, "mainnet.infura.io"), "JSON-RPC Provider");
  EXPECT_EQ(LookupCategory(mapping, "google-analytics.com"), "Tracking, Analytics");
  EXPECT_EQ(LookupCategory(mapping, "notinfura.io"), "unknown");
  const auto no_header = ParseCategoryCsv("a.com,news\n");
  EXPECT_EQ(LookupCategory(no_header, "a.com"), "news");
}

}  // namespace
}  // namespace walletprobe
