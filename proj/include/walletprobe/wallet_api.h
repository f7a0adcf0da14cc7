#ifndef WALLETPROBE_WALLET_API_H_
#define WALLETPROBE_WALLET_API_H_

// Wallet provider API detection over recorded JavaScript property accesses.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "walletprobe/origin.h"
#include "walletprobe/trace_model.h"

namespace walletprobe {

struct WalletApiEntry {
  std::string wallet_name;
  std::string breakpoint_symbol;        // root object, e.g. window.ethereum
  std::string simulated_property_path;  // e.g. window.ethereum.isMetaMask
  nlohmann::json simulated_value;       // true, "0x38", ...

  bool operator==(const WalletApiEntry&) const = default;
};

class WalletApiTable {
 public:
  // MetaMask, Coinbase, Binance, Phantom and Nami over four root objects.
  static WalletApiTable Default();
  // JSON list of entries, each either
  // [wallet_name, breakpoint_symbol, simulated_property_path, simulated_value]
  // or an object with those keys. Throws ParseError / ValidationError.
  static WalletApiTable FromJson(std::string_view text);
  static WalletApiTable LoadFile(const std::string& path);

  explicit WalletApiTable(std::vector<WalletApiEntry> entries);

  const std::vector<WalletApiEntry>& entries() const { return entries_; }
  // Distinct breakpoint roots, in table order.
  const std::vector<std::string>& roots() const { return roots_; }
  // Root that `symbol` equals or is a dotted child of; empty when none.
  std::string_view RootOf(std::string_view symbol) const;

  nlohmann::json ToJson() const;

 private:
  std::vector<WalletApiEntry> entries_;
  std::vector<std::string> roots_;
};

enum class WalletAccessMode { kExplicit, kImplicit };
std::string_view ToString(WalletAccessMode mode);

struct WalletApiAccess {
  std::string script_url;
  std::string site_url;
  std::string root_symbol;
  std::string full_symbol;
  WalletAccessMode mode = WalletAccessMode::kExplicit;
  std::int64_t timestamp = 0;

  bool operator==(const WalletApiAccess&) const = default;
};

// One access per api_call record whose symbol falls under a wallet root, in
// record order. Direct accesses are explicit, enumeration accesses implicit.
std::vector<WalletApiAccess> DetectWalletCalls(const TraceBundle& bundle,
                                               const WalletApiTable& table);

struct ScriptWalletSummary {
  std::string script_url;
  std::vector<std::string> roots_explicit;  // distinct, first-access order
  std::vector<std::string> roots_implicit;  // distinct, first-access order
  std::set<std::string> sites;              // site registrable domains

  // A script with any explicit access is explicit, otherwise implicit.
  bool is_explicit() const { return !roots_explicit.empty(); }
};

// `accesses` must all share one script_url and be in access order. Throws
// std::invalid_argument otherwise. Site domains come from `psl`; extension
// ids are kept verbatim.
ScriptWalletSummary SummarizeScript(std::span<const WalletApiAccess> accesses,
                                    const PublicSuffixTable& psl);

// Groups accesses by script_url (first-seen order) and summarizes each.
std::vector<ScriptWalletSummary> SummarizeScripts(
    std::span<const WalletApiAccess> accesses, const PublicSuffixTable& psl);

// Ordered explicit root combination -> number of scripts.
using CombinationHistogram = std::map<std::vector<std::string>, std::size_t>;

CombinationHistogram BuildCombinationHistogram(
    std::span<const ScriptWalletSummary> summaries);

// Renders a combination as "[window.ethereum, window.solana]".
std::string CombinationKey(const std::vector<std::string>& roots);

}  // namespace walletprobe

#endif  // WALLETPROBE_WALLET_API_H_
