#include "walletprobe/fingerprint.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "walletprobe/error.h"

namespace walletprobe {

namespace {

// Leftmost occurrence of `needle` in `hay` at or after `from` (KMP).
std::size_t KmpFind(std::string_view hay, std::string_view needle,
                    std::size_t from) {
  if (needle.empty()) return from;
  std::vector<std::size_t> fail(needle.size(), 0);
  for (std::size_t i = 1, k = 0; i < needle.size(); ++i) {
    while (k > 0 && needle[i] != needle[k]) k = fail[k - 1];
    if (needle[i] == needle[k]) ++k;
    fail[i] = k;
  }
  for (std::size_t i = from, k = 0; i < hay.size(); ++i) {
    while (k > 0 && hay[i] != needle[k]) k = fail[k - 1];
    if (hay[i] == needle[k]) ++k;
    if (k == needle.size()) return i + 1 - needle.size();
  }
  return std::string_view::npos;
}

struct Row {
  const char* pattern;
  const char* category;
  bool is_explicit;
};

// Reference fingerprinting table, in canonical order.
constexpr Row kDefaultRows[] = {
    {"window.ethereum", "Wallet", false},
    {"window.cardano", "Wallet", false},
    {"window.solana", "Wallet", false},
    {"window.BinanceChain", "Wallet", false},
    {"RTCPeerConnection*", "RTC", true},
    {"RTCPeerConnectionIceEvent*", "RTC", true},
    {"WebGLRenderingContext*", "WebGL", true},
    {"HTMLCanvasElement*", "Canvas", true},
    {"CanvasRenderingContext2D*", "Canvas", true},
    {"*Storage*", "Storage", false},
    {"*indexedDB*", "Storage", false},
    {"Screen*", "ScreenSize", false},
    {"*screen*", "ScreenSize", false},
    {"*cookie*", "Cookies", false},
    {"Date*", "DateTime", false},
    {"*DateTimeFormat*", "DateTime", false},
    {"*getBattery*", "Battery", true},
    {"*Height*", "WindowSize", false},
    {"*Width*", "WindowSize", false},
    {"BarProp*", "WindowSize", false},
    {"*connection*", "Connection", false},
    {"*onLine*", "Connection", false},
    {"*devicePixelRatio*", "ScreenResolution", false},
    {"*window.name*", "WindowLocation", false},
    {"*plugins*", "Plugins", true},
    {"*mimeType*", "Plugins", true},
    {"*canPlayType*", "Plugins", true},
    {"*vendor*", "Browser", false},
    {"*product*", "Browser", false},
    {"*platform*", "Browser", false},
    {"*app*", "Browser", false},
    {"*userAgent*", "Browser", false},
    {"*language*", "Language", false},
    {"DeviceOrientationEvent*", "Device", true},
    {"DeviceMotionEvent*", "Device", true},
    {"*maxTouchPoints*", "Device", true},
    {"*hardwareConcurrency*", "Device", true},
    {"*deviceMemory*", "Device", true},
    {"*memory*", "Device", true},
    {"AudioBuffer*", "Audio", true},
    {"OfflineAudioContext*", "Audio", true},
    {"*requestMediaKeySystemAccess*", "Media", false},
    {"*mediaDevices*", "Media", false},
    {"*enumerateDevice*", "Media", false},
    {"*mediaCapabilities*", "Media", false},
    {"Navigator*", "Navigator", false},
    {"Performance*", "Performance", false},
    {"speechSynthesis*", "SpeechSynthesis", true},
};

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

bool GlobMatch(std::string_view pattern, std::string_view text) {
  const auto first_star = pattern.find('*');
  if (first_star == std::string_view::npos) return pattern == text;

  const auto last_star = pattern.rfind('*');
  const std::string_view head = pattern.substr(0, first_star);
  const std::string_view tail = pattern.substr(last_star + 1);
  if (head.size() + tail.size() > text.size()) return false;
  if (text.substr(0, head.size()) != head) return false;
  if (text.substr(text.size() - tail.size()) != tail) return false;

  // Middle segments are matched greedily left to right inside the window
  // between head and tail; leftmost placement never loses a match.
  const std::string_view window =
      text.substr(head.size(), text.size() - head.size() - tail.size());
  std::size_t pos = 0;
  std::size_t seg_start = first_star + 1;
  while (seg_start <= last_star) {
    const auto seg_end = pattern.find('*', seg_start);
    const std::string_view segment = pattern.substr(seg_start, seg_end - seg_start);
    if (!segment.empty()) {
      const auto found = KmpFind(window, segment, pos);
      if (found == std::string_view::npos) return false;
      pos = found + segment.size();
    }
    seg_start = seg_end + 1;
  }
  return true;
}

const std::vector<std::string>& FingerprintCategoryUniverse() {
  static const std::vector<std::string> universe = [] {
    std::vector<std::string> out;
    for (const auto& row : kDefaultRows) {
      if (std::find(out.begin(), out.end(), row.category) == out.end()) {
        out.emplace_back(row.category);
      }
    }
    return out;
  }();
  return universe;
}

const std::set<std::string>& ExplicitFingerprintCategories() {
  static const std::set<std::string> categories = {
      "RTC", "WebGL", "Canvas", "Battery", "Plugins", "Device", "Audio",
      "SpeechSynthesis"};
  return categories;
}

ClassifierConfig ClassifierConfig::Default() {
  ClassifierConfig config;
  for (const auto& row : kDefaultRows) {
    config.patterns.push_back({row.pattern, row.category, row.is_explicit});
  }
  return config;
}

ClassifierConfig ClassifierConfig::FromPatternFile(std::istream& in) {
  ClassifierConfig config;
  const auto& universe = FingerprintCategoryUniverse();
  const auto& explicit_set = ExplicitFingerprintCategories();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = Trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = view.find('\t', start);
      cols.emplace_back(Trim(view.substr(start, tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3) {
      throw ParseError("expected <pattern>\\t<category>\\t<0|1>", line_no);
    }
    if (cols[0].empty()) throw ValidationError("pattern", "must be non-empty", line_no);
    if (std::find(universe.begin(), universe.end(), cols[1]) == universe.end()) {
      throw ValidationError("category", "unknown category \"" + cols[1] + "\"",
                            line_no);
    }
    if (cols[2] != "0" && cols[2] != "1") {
      throw ValidationError("explicit", "must be 0 or 1", line_no);
    }
    const bool is_explicit = cols[2] == "1";
    if (is_explicit != (explicit_set.count(cols[1]) > 0)) {
      throw ValidationError("explicit", "flag disagrees with category " + cols[1],
                            line_no);
    }
    config.patterns.push_back({cols[0], cols[1], is_explicit});
  }
  if (config.patterns.empty()) {
    throw ValidationError("patterns", "pattern file contains no patterns");
  }
  return config;
}

ClassifierConfig ClassifierConfig::LoadPatternFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open pattern file " + path);
  return FromPatternFile(in);
}

std::optional<CategoryHit> CategorizeCall(std::string_view symbol,
                                          const ClassifierConfig& config) {
  for (const auto& p : config.patterns) {
    if (GlobMatch(p.pattern, symbol)) return CategoryHit{p.category, p.is_explicit};
  }
  return std::nullopt;
}

FingerprintVerdict ClassifyScript(std::string_view script_url,
                                  std::span<const std::string> symbols,
                                  const ClassifierConfig& config) {
  FingerprintVerdict verdict;
  verdict.script_url = std::string(script_url);
  for (const auto& symbol : symbols) {
    const auto hit = CategorizeCall(symbol, config);
    if (!hit) continue;
    verdict.categories_hit.insert(hit->category);
    if (hit->is_explicit) verdict.explicit_hit.insert(hit->category);
  }
  verdict.flagged =
      static_cast<int>(verdict.categories_hit.size()) >= config.category_threshold &&
      static_cast<int>(verdict.explicit_hit.size()) >= config.explicit_requirement;
  return verdict;
}

FingerprintStats CorpusFingerprintStats(std::span<const FingerprintVerdict> verdicts) {
  FingerprintStats stats;
  stats.scripts = verdicts.size();
  std::size_t total = 0;
  for (const auto& v : verdicts) {
    if (!v.flagged) continue;
    ++stats.flagged;
    total += v.categories_hit.size();
    stats.max_categories_flagged =
        std::max(stats.max_categories_flagged, v.categories_hit.size());
  }
  if (stats.flagged > 0) {
    stats.mean_categories_flagged =
        static_cast<double>(total) / static_cast<double>(stats.flagged);
  }
  return stats;
}

}  // namespace walletprobe
