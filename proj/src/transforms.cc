#include "walletprobe/transforms.h"

#include <openssl/evp.h>

#include <cctype>
#include <stdexcept>
#include <unordered_map>

namespace walletprobe {

namespace {

constexpr std::string_view kStdAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
constexpr std::string_view kUrlAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
constexpr char kHexDigits[] = "0123456789abcdef";

int Base64Value(char c, bool url_safe) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (url_safe) {
    if (c == '-') return 62;
    if (c == '_') return 63;
  } else {
    if (c == '+') return 62;
    if (c == '/') return 63;
  }
  return -1;
}

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string ToHex(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(kHexDigits[data[i] >> 4]);
    out.push_back(kHexDigits[data[i] & 0xf]);
  }
  return out;
}

std::string EvpHex(const EVP_MD* md, std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, md, nullptr) != 1) {
    throw std::runtime_error("EVP_Digest failed");
  }
  return ToHex(digest, len);
}

// UTF-8 <-> UTF-16 for lz-string. Invalid UTF-8 sequences map byte-wise
// (Latin-1), which keeps compression total.
std::u16string Utf8ToUtf16(std::string_view s) {
  std::u16string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::uint32_t cp = c;
    std::size_t len = 1;
    if (c >= 0xc2 && c <= 0xdf) {
      len = 2;
      cp = c & 0x1f;
    } else if (c >= 0xe0 && c <= 0xef) {
      len = 3;
      cp = c & 0x0f;
    } else if (c >= 0xf0 && c <= 0xf4) {
      len = 4;
      cp = c & 0x07;
    }
    bool valid = len == 1 || i + len <= s.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (cc & 0x3f);
      }
    }
    if (!valid || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
      out.push_back(static_cast<char16_t>(c));
      ++i;
      continue;
    }
    if (cp >= 0x10000) {
      cp -= 0x10000;
      out.push_back(static_cast<char16_t>(0xd800 + (cp >> 10)));
      out.push_back(static_cast<char16_t>(0xdc00 + (cp & 0x3ff)));
    } else {
      out.push_back(static_cast<char16_t>(cp));
    }
    i += len;
  }
  return out;
}

void AppendUtf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

std::string Utf16ToUtf8(const std::u16string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::uint32_t cp = s[i];
    if (cp >= 0xd800 && cp <= 0xdbff && i + 1 < s.size() && s[i + 1] >= 0xdc00 &&
        s[i + 1] <= 0xdfff) {
      cp = 0x10000 + ((cp - 0xd800) << 10) + (s[i + 1] - 0xdc00);
      ++i;
    }
    AppendUtf8(out, cp);
  }
  return out;
}

class BitWriter {
 public:
  explicit BitWriter(std::string& out) : out_(out) {}

  // Emits `bits` bits of `value`, least significant bit first.
  void WriteLsbFirst(std::uint32_t value, int bits) {
    for (int i = 0; i < bits; ++i) {
      Push(value & 1);
      value >>= 1;
    }
  }

  void Flush() {
    while (true) {
      val_ <<= 1;
      if (position_ == 5) {
        out_.push_back(kStdAlphabet[val_]);
        break;
      }
      ++position_;
    }
  }

 private:
  void Push(std::uint32_t bit) {
    val_ = (val_ << 1) | bit;
    if (position_ == 5) {
      position_ = 0;
      out_.push_back(kStdAlphabet[val_]);
      val_ = 0;
    } else {
      ++position_;
    }
  }

  std::string& out_;
  std::uint32_t val_ = 0;
  int position_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::string_view text) : text_(text) {
    val_ = ValueAt(0);
  }

  // Reads `bits` bits, least significant first.
  std::uint32_t Read(int bits) {
    std::uint32_t result = 0;
    std::uint32_t power = 1;
    for (int i = 0; i < bits; ++i) {
      const std::uint32_t bit = (val_ & position_) ? 1 : 0;
      position_ >>= 1;
      if (position_ == 0) {
        position_ = 32;
        val_ = ValueAt(index_++);
      }
      result |= bit * power;
      power <<= 1;
    }
    return result;
  }

  bool exhausted() const { return index_ > text_.size(); }

 private:
  std::uint32_t ValueAt(std::size_t i) const {
    if (i >= text_.size()) return 0;
    const int v = Base64Value(text_[i], false);
    return v < 0 ? 0 : static_cast<std::uint32_t>(v);
  }

  std::string_view text_;
  std::uint32_t val_ = 0;
  std::uint32_t position_ = 32;
  std::size_t index_ = 1;
};

}  // namespace

std::string_view TransformName(Transform t) {
  switch (t) {
    case Transform::kBase64StdPadded: return "base64_std_padded";
    case Transform::kBase64UrlSafeUnpadded: return "base64_urlsafe_unpadded";
    case Transform::kPercentEncoding: return "percent_encoding";
    case Transform::kLzStringBase64: return "lzstring_base64";
    case Transform::kMd5Hex: return "md5_hex";
    case Transform::kSha1Hex: return "sha1_hex";
    case Transform::kSha256Hex: return "sha256_hex";
    case Transform::kMurmur3Hex: return "murmur3_32_hex";
  }
  return "unknown";
}

std::optional<Transform> TransformFromName(std::string_view name) {
  for (auto t : kEncodings) {
    if (TransformName(t) == name) return t;
  }
  for (auto t : kDigests) {
    if (TransformName(t) == name) return t;
  }
  return std::nullopt;
}

bool IsDigest(Transform t) {
  return t == Transform::kMd5Hex || t == Transform::kSha1Hex ||
         t == Transform::kSha256Hex || t == Transform::kMurmur3Hex;
}

std::string ApplyTransform(Transform t, std::string_view input) {
  switch (t) {
    case Transform::kBase64StdPadded: return Base64Encode(input, false, true);
    case Transform::kBase64UrlSafeUnpadded: return Base64Encode(input, true, false);
    case Transform::kPercentEncoding: return PercentEncode(input);
    case Transform::kLzStringBase64: return LzStringCompressToBase64(input);
    case Transform::kMd5Hex: return Md5Hex(input);
    case Transform::kSha1Hex: return Sha1Hex(input);
    case Transform::kSha256Hex: return Sha256Hex(input);
    case Transform::kMurmur3Hex: return Murmur3Hex(input);
  }
  return std::string(input);
}

std::optional<std::string> DecodeTransform(Transform t, std::string_view input) {
  switch (t) {
    case Transform::kBase64StdPadded: return Base64Decode(input, false, true);
    case Transform::kBase64UrlSafeUnpadded: return Base64Decode(input, true, false);
    case Transform::kPercentEncoding: return PercentDecode(input);
    case Transform::kLzStringBase64: return LzStringDecompressFromBase64(input);
    default: return std::nullopt;
  }
}

std::string Base64Encode(std::string_view bytes, bool url_safe, bool padded) {
  const std::string_view alphabet = url_safe ? kUrlAlphabet : kStdAlphabet;
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                            static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    out.push_back(alphabet[n & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    if (padded) out += "==";
  } else if (rest == 2) {
    const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(alphabet[(n >> 18) & 63]);
    out.push_back(alphabet[(n >> 12) & 63]);
    out.push_back(alphabet[(n >> 6) & 63]);
    if (padded) out.push_back('=');
  }
  return out;
}

std::optional<std::string> Base64Decode(std::string_view text, bool url_safe,
                                        bool padded) {
  if (text.empty()) return std::nullopt;
  std::string_view body = text;
  if (padded) {
    if (text.size() % 4 != 0) return std::nullopt;
    while (!body.empty() && body.back() == '=' && text.size() - body.size() < 2) {
      body.remove_suffix(1);
    }
  } else if (text.size() % 4 == 1) {
    return std::nullopt;
  }
  std::string out;
  out.reserve(body.size() * 3 / 4);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : body) {
    const int v = Base64Value(c, url_safe);
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xff));
    }
  }
  // Non-zero leftover bits mean no encoder produced this text.
  if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) return std::nullopt;
  if (bits >= 6) return std::nullopt;
  return out;
}

std::string PercentEncode(std::string_view bytes) {
  static constexpr char kUpperHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(bytes.size());
  for (char ch : bytes) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '!' ||
        c == '~' || c == '*' || c == '\'' || c == '(' || c == ')') {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kUpperHex[c >> 4]);
      out.push_back(kUpperHex[c & 0xf]);
    }
  }
  return out;
}

std::optional<std::string> PercentDecode(std::string_view text) {
  if (text.find('%') == std::string_view::npos) return std::nullopt;
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '%') {
      out.push_back(text[i]);
      continue;
    }
    if (i + 2 >= text.size()) return std::nullopt;
    const int hi = HexValue(text[i + 1]);
    const int lo = HexValue(text[i + 2]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<char>(hi * 16 + lo));
    i += 2;
  }
  return out;
}

std::string LzStringCompressToBase64(std::string_view utf8) {
  const std::u16string input = Utf8ToUtf16(utf8);
  std::string out;
  BitWriter writer(out);
  std::unordered_map<std::u16string, std::uint32_t> dictionary;
  std::unordered_map<std::u16string, bool> to_create;
  std::u16string w;
  std::uint32_t enlarge_in = 2;
  std::uint32_t dict_size = 3;
  int num_bits = 2;

  auto bump = [&]() {
    if (--enlarge_in == 0) {
      enlarge_in = 1u << num_bits;
      ++num_bits;
    }
  };

  auto emit_w = [&]() {
    if (to_create.count(w)) {
      const char16_t first = w[0];
      if (first < 256) {
        writer.WriteLsbFirst(0, num_bits);
        writer.WriteLsbFirst(first, 8);
      } else {
        writer.WriteLsbFirst(1, num_bits);
        writer.WriteLsbFirst(first, 16);
      }
      bump();
      to_create.erase(w);
    } else {
      writer.WriteLsbFirst(dictionary[w], num_bits);
    }
    bump();
  };

  for (char16_t ch : input) {
    const std::u16string c(1, ch);
    if (!dictionary.count(c)) {
      dictionary[c] = dict_size++;
      to_create[c] = true;
    }
    std::u16string wc = w + c;
    if (dictionary.count(wc)) {
      w = std::move(wc);
    } else {
      emit_w();
      dictionary[wc] = dict_size++;
      w = c;
    }
  }
  if (!w.empty()) emit_w();
  writer.WriteLsbFirst(2, num_bits);
  writer.Flush();

  switch (out.size() % 4) {
    case 1: out += "==="; break;
    case 2: out += "=="; break;
    case 3: out += "="; break;
    default: break;
  }
  return out;
}

std::optional<std::string> LzStringDecompressFromBase64(std::string_view text) {
  if (text.empty()) return std::nullopt;
  // Strict alphabet: standard base64 characters followed by '=' padding.
  std::size_t body = text.size();
  while (body > 0 && text[body - 1] == '=') --body;
  if (text.size() - body > 3) return std::nullopt;
  for (std::size_t i = 0; i < body; ++i) {
    if (Base64Value(text[i], false) < 0) return std::nullopt;
  }

  // Decompressed output is bounded to keep hostile input cheap.
  const std::size_t max_output = 64 * text.size() + 1024;

  BitReader reader(text);
  std::vector<std::u16string> dictionary(3);
  std::uint32_t enlarge_in = 4;
  int num_bits = 3;
  std::u16string result;

  std::u16string c;
  switch (reader.Read(2)) {
    case 0: c = std::u16string(1, static_cast<char16_t>(reader.Read(8))); break;
    case 1: c = std::u16string(1, static_cast<char16_t>(reader.Read(16))); break;
    case 2: return std::nullopt;  // empty input string; never a leak carrier
    default: return std::nullopt;
  }
  dictionary.push_back(c);
  std::u16string w = c;
  result = c;

  while (true) {
    if (reader.exhausted()) return std::nullopt;
    std::uint32_t code = reader.Read(num_bits);
    switch (code) {
      case 0:
        dictionary.emplace_back(1, static_cast<char16_t>(reader.Read(8)));
        code = static_cast<std::uint32_t>(dictionary.size() - 1);
        --enlarge_in;
        break;
      case 1:
        dictionary.emplace_back(1, static_cast<char16_t>(reader.Read(16)));
        code = static_cast<std::uint32_t>(dictionary.size() - 1);
        --enlarge_in;
        break;
      case 2:
        return Utf16ToUtf8(result);
      default:
        break;
    }
    if (enlarge_in == 0) {
      enlarge_in = 1u << num_bits;
      ++num_bits;
    }

    std::u16string entry;
    if (code < dictionary.size() && code >= 3) {
      entry = dictionary[code];
    } else if (code == dictionary.size()) {
      entry = w + w[0];
    } else {
      return std::nullopt;
    }
    result += entry;
    if (result.size() > max_output) return std::nullopt;

    dictionary.push_back(w + entry[0]);
    --enlarge_in;
    w = std::move(entry);

    if (enlarge_in == 0) {
      enlarge_in = 1u << num_bits;
      ++num_bits;
    }
    if (num_bits > 24) return std::nullopt;
  }
}

std::string Md5Hex(std::string_view bytes) { return EvpHex(EVP_md5(), bytes); }
std::string Sha1Hex(std::string_view bytes) { return EvpHex(EVP_sha1(), bytes); }
std::string Sha256Hex(std::string_view bytes) {
  return EvpHex(EVP_sha256(), bytes);
}

std::uint32_t Murmur3X86_32(std::string_view bytes, std::uint32_t seed) {
  constexpr std::uint32_t c1 = 0xcc9e2d51;
  constexpr std::uint32_t c2 = 0x1b873593;
  auto rotl = [](std::uint32_t x, int r) { return (x << r) | (x >> (32 - r)); };

  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t len = bytes.size();
  const std::size_t nblocks = len / 4;
  std::uint32_t h = seed;

  for (std::size_t i = 0; i < nblocks; ++i) {
    std::uint32_t k = static_cast<std::uint32_t>(data[4 * i]) |
                      (static_cast<std::uint32_t>(data[4 * i + 1]) << 8) |
                      (static_cast<std::uint32_t>(data[4 * i + 2]) << 16) |
                      (static_cast<std::uint32_t>(data[4 * i + 3]) << 24);
    k *= c1;
    k = rotl(k, 15);
    k *= c2;
    h ^= k;
    h = rotl(h, 13);
    h = h * 5 + 0xe6546b64;
  }

  const unsigned char* tail = data + nblocks * 4;
  std::uint32_t k1 = 0;
  switch (len & 3) {
    case 3: k1 ^= static_cast<std::uint32_t>(tail[2]) << 16; [[fallthrough]];
    case 2: k1 ^= static_cast<std::uint32_t>(tail[1]) << 8; [[fallthrough]];
    case 1:
      k1 ^= tail[0];
      k1 *= c1;
      k1 = rotl(k1, 15);
      k1 *= c2;
      h ^= k1;
      break;
    default: break;
  }

  h ^= static_cast<std::uint32_t>(len);
  h ^= h >> 16;
  h *= 0x85ebca6b;
  h ^= h >> 13;
  h *= 0xc2b2ae35;
  h ^= h >> 16;
  return h;
}

std::string Murmur3Hex(std::string_view bytes) {
  const std::uint32_t h = Murmur3X86_32(bytes, 0);
  const unsigned char be[4] = {static_cast<unsigned char>(h >> 24),
                               static_cast<unsigned char>(h >> 16),
                               static_cast<unsigned char>(h >> 8),
                               static_cast<unsigned char>(h)};
  return ToHex(be, 4);
}

}  // namespace walletprobe
