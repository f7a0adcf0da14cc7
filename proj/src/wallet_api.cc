#include "walletprobe/wallet_api.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "walletprobe/error.h"
#include "walletprobe/url.h"

namespace walletprobe {

using nlohmann::json;

namespace {

std::string SiteDomain(const std::string& site_url, const PublicSuffixTable& psl) {
  if (!IsAbsoluteUrl(site_url)) return site_url;  // extension id
  return RegistrableDomain(site_url, psl);
}

void AddDistinct(std::vector<std::string>& list, const std::string& value) {
  if (std::find(list.begin(), list.end(), value) == list.end()) {
    list.push_back(value);
  }
}

}  // namespace

WalletApiTable WalletApiTable::Default() {
  return WalletApiTable({
      {"MetaMask", "window.ethereum", "window.ethereum.isMetaMask", true},
      {"Coinbase", "window.ethereum", "window.ethereum.isCoinbaseWallet", true},
      {"Binance", "window.BinanceChain", "window.BinanceChain.chainId", "0x38"},
      {"Phantom", "window.solana", "window.solana.isPhantom", true},
      {"Nami", "window.cardano", "window.cardano.nami.name", "Nami Wallet"},
  });
}

WalletApiTable::WalletApiTable(std::vector<WalletApiEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) {
    throw ValidationError("wallet_apis", "table must not be empty");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    const std::string field = "wallet_apis[" + std::to_string(i) + "]";
    if (e.wallet_name.empty()) {
      throw ValidationError(field + ".wallet_name", "must be non-empty");
    }
    if (e.breakpoint_symbol.rfind("window.", 0) != 0) {
      throw ValidationError(field + ".breakpoint_symbol",
                            "must name a window.* property");
    }
    if (e.simulated_property_path.rfind(e.breakpoint_symbol + ".", 0) != 0) {
      throw ValidationError(field + ".simulated_property_path",
                            "must be a child of the breakpoint symbol");
    }
    AddDistinct(roots_, e.breakpoint_symbol);
  }
  for (const auto& a : roots_) {
    for (const auto& b : roots_) {
      if (a != b && b.rfind(a + ".", 0) == 0) {
        throw ValidationError("wallet_apis", "breakpoint " + b +
                                                 " is nested under " + a);
      }
    }
  }
}

WalletApiTable WalletApiTable::FromJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("wallet API table: ") + e.what());
  }
  if (!doc.is_array()) throw ValidationError("wallet_apis", "must be a JSON list");
  std::vector<WalletApiEntry> entries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string field = "wallet_apis[" + std::to_string(i) + "]";
    WalletApiEntry e;
    try {
      if (item.is_array() && item.size() == 4) {
        e = {item[0].get<std::string>(), item[1].get<std::string>(),
             item[2].get<std::string>(), item[3]};
      } else if (item.is_object()) {
        e = {item.at("wallet_name").get<std::string>(),
             item.at("breakpoint_symbol").get<std::string>(),
             item.at("simulated_property_path").get<std::string>(),
             item.at("simulated_value")};
      } else {
        throw ValidationError(field, "expected a 4-element list or an object");
      }
    } catch (const json::exception& ex) {
      throw ValidationError(field, ex.what());
    }
    entries.push_back(std::move(e));
  }
  return WalletApiTable(std::move(entries));
}

WalletApiTable WalletApiTable::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open wallet API table " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

std::string_view WalletApiTable::RootOf(std::string_view symbol) const {
  for (const auto& root : roots_) {
    if (symbol.size() >= root.size() && symbol.compare(0, root.size(), root) == 0 &&
        (symbol.size() == root.size() || symbol[root.size()] == '.')) {
      return root;
    }
  }
  return {};
}

json WalletApiTable::ToJson() const {
  json out = json::array();
  for (const auto& e : entries_) {
    out.push_back({e.wallet_name, e.breakpoint_symbol, e.simulated_property_path,
                   e.simulated_value});
  }
  return out;
}

std::string_view ToString(WalletAccessMode mode) {
  return mode == WalletAccessMode::kExplicit ? "explicit" : "implicit";
}

std::vector<WalletApiAccess> DetectWalletCalls(const TraceBundle& bundle,
                                               const WalletApiTable& table) {
  std::vector<WalletApiAccess> out;
  for (const auto& call : bundle.api_calls) {
    const std::string_view root = table.RootOf(call.symbol);
    if (root.empty()) continue;
    out.push_back({call.script_url, bundle.target.url, std::string(root),
                   call.symbol,
                   call.access_mode == AccessMode::kDirect
                       ? WalletAccessMode::kExplicit
                       : WalletAccessMode::kImplicit,
                   call.timestamp});
  }
  return out;
}

ScriptWalletSummary SummarizeScript(std::span<const WalletApiAccess> accesses,
                                    const PublicSuffixTable& psl) {
  ScriptWalletSummary summary;
  if (accesses.empty()) return summary;
  summary.script_url = accesses.front().script_url;
  for (const auto& a : accesses) {
    if (a.script_url != summary.script_url) {
      throw std::invalid_argument("SummarizeScript: mixed script URLs");
    }
    AddDistinct(a.mode == WalletAccessMode::kExplicit ? summary.roots_explicit
                                                      : summary.roots_implicit,
                a.root_symbol);
    summary.sites.insert(SiteDomain(a.site_url, psl));
  }
  return summary;
}

std::vector<ScriptWalletSummary> SummarizeScripts(
    std::span<const WalletApiAccess> accesses, const PublicSuffixTable& psl) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<WalletApiAccess>> groups;
  for (const auto& a : accesses) {
    auto [it, inserted] = groups.try_emplace(a.script_url);
    if (inserted) order.push_back(a.script_url);
    it->second.push_back(a);
  }
  std::vector<ScriptWalletSummary> out;
  out.reserve(order.size());
  for (const auto& url : order) out.push_back(SummarizeScript(groups[url], psl));
  return out;
}

CombinationHistogram BuildCombinationHistogram(
    std::span<const ScriptWalletSummary> summaries) {
  CombinationHistogram histogram;
  for (const auto& s : summaries) {
    if (s.is_explicit()) ++histogram[s.roots_explicit];
  }
  return histogram;
}

std::string CombinationKey(const std::vector<std::string>& roots) {
  std::string key = "[";
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (i) key += ", ";
    key += roots[i];
  }
  key += "]";
  return key;
}

}  // namespace walletprobe
