#ifndef WALLETPROBE_TRANSFORMS_H_
#define WALLETPROBE_TRANSFORMS_H_

// Encodings and digests used to hunt obfuscated secrets.
//
// Encodings are invertible and have a strict decoder that rejects anything a
// matching encoder could not have produced. Digests are one-way and always
// rendered as lowercase hex.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace walletprobe {

enum class Transform {
  kBase64StdPadded,
  kBase64UrlSafeUnpadded,
  kPercentEncoding,
  kLzStringBase64,
  kMd5Hex,
  kSha1Hex,
  kSha256Hex,
  kMurmur3Hex,
};

inline constexpr std::array<Transform, 4> kEncodings = {
    Transform::kBase64StdPadded, Transform::kBase64UrlSafeUnpadded,
    Transform::kPercentEncoding, Transform::kLzStringBase64};
inline constexpr std::array<Transform, 4> kDigests = {
    Transform::kMd5Hex, Transform::kSha1Hex, Transform::kSha256Hex,
    Transform::kMurmur3Hex};

std::string_view TransformName(Transform t);
std::optional<Transform> TransformFromName(std::string_view name);
bool IsDigest(Transform t);

// Forward application of any transform.
std::string ApplyTransform(Transform t, std::string_view input);
// Inverse of an encoding; nullopt when `input` is not a valid encoding or
// when `t` is a digest.
std::optional<std::string> DecodeTransform(Transform t, std::string_view input);

std::string Base64Encode(std::string_view bytes, bool url_safe, bool padded);
std::optional<std::string> Base64Decode(std::string_view text, bool url_safe,
                                        bool padded);

// encodeURIComponent semantics: unreserved set A-Z a-z 0-9 - _ . ! ~ * ' ( )
// passes through, every other byte becomes %XX (uppercase hex).
std::string PercentEncode(std::string_view bytes);
// Requires at least one escape and every '%' followed by two hex digits.
std::optional<std::string> PercentDecode(std::string_view text);

// lz-string compressToBase64 / decompressFromBase64. Strings are converted
// between UTF-8 and UTF-16 code units the way the JavaScript library sees
// them.
std::string LzStringCompressToBase64(std::string_view utf8);
std::optional<std::string> LzStringDecompressFromBase64(std::string_view text);

std::string Md5Hex(std::string_view bytes);
std::string Sha1Hex(std::string_view bytes);
std::string Sha256Hex(std::string_view bytes);
std::uint32_t Murmur3X86_32(std::string_view bytes, std::uint32_t seed = 0);
std::string Murmur3Hex(std::string_view bytes);  // seed 0, 8 hex digits

}  // namespace walletprobe

#endif  // WALLETPROBE_TRANSFORMS_H_
