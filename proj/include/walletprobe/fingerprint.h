#ifndef WALLETPROBE_FINGERPRINT_H_
#define WALLETPROBE_FINGERPRINT_H_

// Browser fingerprinting classification by API category coverage.
//
// Every recorded API symbol is mapped to at most one of 22 categories through
// an ordered list of wildcard patterns (first match wins). A script is
// flagged when it touches at least `category_threshold` categories and at
// least `explicit_requirement` of them are explicit fingerprinting
// categories (canvas, WebGL, audio, ...).

#include <cstddef>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace walletprobe {

// Anchored glob over the full string; '*' matches any (possibly empty)
// substring, every other character matches itself (case-sensitive).
// Runs in time linear in |pattern| + |text|.
bool GlobMatch(std::string_view pattern, std::string_view text);

struct FingerprintPattern {
  std::string pattern;
  std::string category;
  bool is_explicit = false;
};

// The 22 category names, in the order they first appear in the default table.
const std::vector<std::string>& FingerprintCategoryUniverse();
// The 8 explicit categories.
const std::set<std::string>& ExplicitFingerprintCategories();

struct ClassifierConfig {
  std::vector<FingerprintPattern> patterns;
  int category_threshold = 10;
  int explicit_requirement = 1;

  static ClassifierConfig Default();
  // Tab-separated `<pattern>\t<category>\t<0|1>` lines; '#' comments and
  // blank lines are ignored. Categories must belong to the universe and the
  // explicit flag must agree with the category. Throws ParseError /
  // ValidationError.
  static ClassifierConfig FromPatternFile(std::istream& in);
  static ClassifierConfig LoadPatternFile(const std::string& path);
};

struct CategoryHit {
  std::string category;
  bool is_explicit = false;

  bool operator==(const CategoryHit&) const = default;
};

std::optional<CategoryHit> CategorizeCall(std::string_view symbol,
                                          const ClassifierConfig& config);

struct FingerprintVerdict {
  std::string script_url;
  std::set<std::string> categories_hit;
  std::set<std::string> explicit_hit;
  bool flagged = false;
};

FingerprintVerdict ClassifyScript(std::string_view script_url,
                                  std::span<const std::string> symbols,
                                  const ClassifierConfig& config);

struct FingerprintStats {
  std::size_t scripts = 0;
  std::size_t flagged = 0;
  double mean_categories_flagged = 0.0;
  std::size_t max_categories_flagged = 0;

  bool operator==(const FingerprintStats&) const = default;
};

FingerprintStats CorpusFingerprintStats(std::span<const FingerprintVerdict> verdicts);

}  // namespace walletprobe

#endif  // WALLETPROBE_FINGERPRINT_H_
