#include "walletprobe/transforms.h"

#include <random>
#include <string>

#include <gtest/gtest.h>

namespace walletprobe {
namespace {

// Reference outputs from hashlib, base64, urllib.parse.quote, mmh3 and the
// lzstring package (tests/tools/oracle_vectors.py).
struct Vector {
  const char* input;
  const char* b64;
  const char* b64url;
  const char* percent;
  const char* lz;
  const char* md5;
  const char* sha1;
  const char* sha256;
  const char* murmur;
};

constexpr Vector kVectors[] = {
    {"0x7e4abd63a7c8314cc28d388303472353d884f292",
     "MHg3ZTRhYmQ2M2E3YzgzMTRjYzI4ZDM4ODMwMzQ3MjM1M2Q4ODRmMjky",
     "MHg3ZTRhYmQ2M2E3YzgzMTRjYzI4ZDM4ODMwMzQ3MjM1M2Q4ODRmMjky",
     "0x7e4abd63a7c8314cc28d388303472353d884f292",
     "AwDw7ApgLAhgRgEwGwGYZgMYA4UEYoYYBMWCKWOwKUYRKArCghVAGZECcRQA",
     "e99dc0fcd34595d8aa66bd52f227891d", "4cf25eeaab39512a222921c169039b3ee4bcb7c4",
     "a8b1f3ff953a59999252376a681f141e0c7d0976a3890ebed85706af6470480a", "c598203d"},
    {"hello world", "aGVsbG8gd29ybGQ=", "aGVsbG8gd29ybGQ", "hello%20world",
     "BYUwNmD2AEDukCcwBMg=", "5eb63bbbe01eeed093cb22bb8f5acdc3",
     "2aae6c35c94fcfb415dbe95f408b9ce91ee846ed",
     "b94d27b9934d3e08a52e52d7da7dabfac484efe37a5380ee9088f7ace2efcde9", "5e928f0f"},
    {"a", "YQ==", "YQ", "a", "IZA=", "0cc175b9c0f1b6a831c399e269772661",
     "86f7e437faa5a7fce15d1ddcb9eaeaea377667b8",
     "ca978112ca1bbdcafac231b39a23dc4da786eff8147c4e72b9807785afee48bb", "3c2569b2"},
    {"ab", "YWI=", "YWI", "ab", "IYIyA===", "187ef4436122d1cc2f40dc2b92f0eba0",
     "da23614e02469a0d7c7bd1bdab5c9c474b1904dc",
     "fb8e20fc2e4c3f248c60c39bd652f3c1347298bb977b8b4d5903b85055620603", "9bbfd75f"},
    {"abc", "YWJj", "YWJj", "abc", "IYIwxkA=", "900150983cd24fb0d6963f7d28e17f72",
     "a9993e364706816aba3e25717850c26c9cd0d89d",
     "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad", "b3dd93fa"},
    {"p@ss w/rd!", "cEBzcyB3L3JkIQ==", "cEBzcyB3L3JkIQ", "p%40ss%20w%2Frd!",
     "A4AQzmAEDuD0BOATAhEA", "f3e25254d60b0d4d8a358b3241ca3bed",
     "b358986da48c605bea5ed1501f237141aed4c3ad",
     "37f5195152d261583e1ff3946d82b45817aaf6d2ad12d647047943a95ff3cae3", "084346b0"},
};

TEST(TransformsTest, MatchesReferenceVectors) {
  for (const auto& v : kVectors) {
    SCOPED_TRACE(v.input);
    EXPECT_EQ(ApplyTransform(Transform::kBase64StdPadded, v.input), v.b64);
    EXPECT_EQ(ApplyTransform(Transform::kBase64UrlSafeUnpadded, v.input), v.b64url);
    EXPECT_EQ(ApplyTransform(Transform::kPercentEncoding, v.input), v.percent);
    EXPECT_EQ(ApplyTransform(Transform::kLzStringBase64, v.input), v.lz);
    EXPECT_EQ(ApplyTransform(Transform::kMd5Hex, v.input), v.md5);
    EXPECT_EQ(ApplyTransform(Transform::kSha1Hex, v.input), v.sha1);
    EXPECT_EQ(ApplyTransform(Transform::kSha256Hex, v.input), v.sha256);
    EXPECT_EQ(ApplyTransform(Transform::kMurmur3Hex, v.input), v.murmur);
  }
}

TEST(TransformsTest, EmptyInput) {
  EXPECT_EQ(Base64Encode("", false, true), "");
  EXPECT_EQ(LzStringCompressToBase64(""), "Q===");
  EXPECT_EQ(Md5Hex(""), "d41d8cd98f00b204e9800998ecf8427e");
  EXPECT_EQ(Murmur3Hex(""), "00000000");
  // Nothing can hide in an empty carrier, so decoders refuse it.
  EXPECT_FALSE(DecodeTransform(Transform::kBase64StdPadded, ""));
  EXPECT_FALSE(DecodeTransform(Transform::kLzStringBase64, "Q==="));
}

TEST(TransformsTest, NonAsciiText) {
  const std::string text = "\xc3\xa9t\xc3\xa9 \xe2\x82\xac \xf0\x9f\x98\x80";
  EXPECT_EQ(Base64Encode(text, false, true), "w6l0w6kg4oKsIPCfmIA=");
  EXPECT_EQ(PercentEncode(text), "%C3%A9t%C3%A9%20%E2%82%AC%20%F0%9F%98%80");
  EXPECT_EQ(Sha256Hex(text),
            "0423b0f27548278df54f51f95ad791b8e5115c662376b861ee542dccecedd834");
  EXPECT_EQ(Murmur3Hex(text), "464e34d1");
  // Astral characters are two UTF-16 code units for lz-string; the round trip
  // must restore them.
  EXPECT_EQ(LzStringDecompressFromBase64(LzStringCompressToBase64(text)), text);
}

TEST(TransformsTest, ChainedReferenceValues) {
  const std::string lower = "0x7e4abd63a7c8314cc28d388303472353d884f292";
  EXPECT_EQ(Base64Encode(Sha256Hex(lower), false, true),
            "YThiMWYzZmY5NTNhNTk5OTkyNTIzNzZhNjgxZjE0MWUwYzdkMDk3NmEzODkwZWJlZDg1NzA2"
            "YWY2NDcwNDgwYQ==");
  EXPECT_EQ(LzStringCompressToBase64(Base64Encode(Md5Hex(lower), true, false)),
            "FoFQ1grMDiCyDuwC2A5MsBeBFAjAeRADUw9oAxACxQCtgBLYAEQFUBPYagSVZQwHMIsAOpYgA===");
}

TEST(TransformsTest, StrictDecoders) {
  EXPECT_EQ(Base64Decode("YQ==", false, true), "a");
  EXPECT_FALSE(Base64Decode("YQ=", false, true));
  EXPECT_FALSE(Base64Decode("YR==", false, true));  // non-zero leftover bits
  EXPECT_FALSE(Base64Decode("Y-_=", false, true));
  EXPECT_EQ(Base64Decode("YQ", true, false), "a");
  EXPECT_FALSE(Base64Decode("YQ==", true, false));
  EXPECT_FALSE(Base64Decode("Y", true, false));
  EXPECT_EQ(PercentDecode("a%20b"), "a b");
  EXPECT_FALSE(PercentDecode("plain"));
  EXPECT_FALSE(PercentDecode("%2"));
  EXPECT_FALSE(PercentDecode("%zz"));
  EXPECT_FALSE(LzStringDecompressFromBase64("!!!!"));
  EXPECT_FALSE(DecodeTransform(Transform::kMd5Hex, "abc"));
}

TEST(TransformsTest, NamesRoundTrip) {
  for (const auto t : kEncodings) EXPECT_EQ(TransformFromName(TransformName(t)), t);
  for (const auto t : kDigests) {
    EXPECT_EQ(TransformFromName(TransformName(t)), t);
    EXPECT_TRUE(IsDigest(t));
  }
  EXPECT_EQ(TransformName(Transform::kMurmur3Hex), "murmur3_32_hex");
  EXPECT_FALSE(TransformFromName("rot13"));
}

TEST(TransformsTest, EncodingsRoundTripOnRandomText) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> len(0, 80);
  std::uniform_int_distribution<int> byte(0x20, 0x7e);
  for (int i = 0; i < 500; ++i) {
    std::string s(len(rng), ' ');
    for (auto& c : s) c = static_cast<char>(byte(rng));
    if (s.empty()) continue;  // decoders reject empty input
    for (const auto t : kEncodings) {
      const auto encoded = ApplyTransform(t, s);
      if (t == Transform::kPercentEncoding && encoded == s) continue;
      EXPECT_EQ(DecodeTransform(t, encoded), s) << TransformName(t) << " " << s;
    }
  }
}

}  // namespace
}  // namespace walletprobe
