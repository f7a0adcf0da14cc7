// Python bindings for the analysis core. Structured results come back as
// plain dicts and lists; the corpus report is returned as JSON text.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "walletprobe/error.h"
#include "walletprobe/filterlist.h"
#include "walletprobe/fingerprint.h"
#include "walletprobe/leak_detector.h"
#include "walletprobe/origin.h"
#include "walletprobe/pipeline.h"
#include "walletprobe/report.h"
#include "walletprobe/trace_model.h"
#include "walletprobe/transforms.h"
#include "walletprobe/wallet_api.h"

namespace py = pybind11;
using namespace walletprobe;

namespace {

Transform TransformByName(const std::string& name) {
  const auto t = TransformFromName(name);
  if (!t) throw py::value_error("unknown transform: " + name);
  return *t;
}

std::vector<std::string> ChainNames(const TransformChain& chain) {
  std::vector<std::string> out;
  for (const auto t : chain) out.emplace_back(TransformName(t));
  return out;
}

SecretProfile SingleProfile(const std::string& profile_json) {
  auto profiles = ParseSecretProfiles(profile_json);
  if (profiles.size() != 1) throw py::value_error("expected exactly one secret profile");
  return std::move(profiles.front());
}

py::dict FindingToDict(const LeakFinding& f) {
  py::dict d;
  d["visit_id"] = f.visit_id;
  d["secret_id"] = f.secret_id;
  d["secret_kind"] = std::string(ToString(f.secret_kind));
  d["channel"] = std::string(ToString(f.channel));
  d["receiver"] = f.receiver;
  d["receiver_host"] = f.receiver_host;
  d["chain"] = ChainNames(f.chain);
  d["evidence"] = f.evidence;
  d["record_index"] = f.record_index;
  d["offset"] = f.offset;
  return d;
}

FilterList ListFromTuple(const std::tuple<std::string, std::string, std::string>& spec) {
  const auto& [name, text, format] = spec;
  return ParseFilterList(text, ParseFilterListFormat(format), name);
}

}  // namespace

PYBIND11_MODULE(_walletprobe, m) {
  m.doc() = "Offline analysis of recorded wallet-site visits";

  auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

  py::class_<PublicSuffixTable>(m, "PublicSuffixList")
      .def_static(
          "load",
          [](const std::string& path, bool include_private) {
            return PublicSuffixTable::LoadFile(path, {.include_private = include_private});
          },
          py::arg("path"), py::arg("include_private") = false)
      .def_static(
          "from_string",
          [](const std::string& text, bool include_private) {
            return PublicSuffixTable::FromString(text, {.include_private = include_private});
          },
          py::arg("text"), py::arg("include_private") = false)
      .def_property_readonly("version", &PublicSuffixTable::version)
      .def("public_suffix", &PublicSuffixTable::PublicSuffix, py::arg("host"))
      .def(
          "registrable_domain",
          [](const PublicSuffixTable& psl, const std::string& url) {
            return RegistrableDomain(url, psl);
          },
          py::arg("url"))
      .def(
          "registrable_domain_for_host",
          [](const PublicSuffixTable& psl, const std::string& host) {
            return RegistrableDomainForHost(host, psl);
          },
          py::arg("host"))
      .def(
          "is_third_party",
          [](const PublicSuffixTable& psl, const std::string& resource,
             const std::string& site) { return IsThirdParty(resource, site, psl).is_third_party; },
          py::arg("resource_url"), py::arg("site_url"));

  m.def(
      "canonicalize_trace",
      [](const std::string& text) { return WriteTraceBundle(ParseTraceBundle(text)); },
      py::arg("text"), "Parses, validates and re-serializes a JSONL trace.");
  m.def(
      "trace_summary",
      [](const std::string& text) {
        const auto b = ParseTraceBundle(text);
        py::dict d;
        d["visit_id"] = b.visit_id;
        d["target_url"] = b.target.url;
        d["api_calls"] = b.api_calls.size();
        d["requests"] = b.requests.size();
        d["cookies"] = b.cookies.size();
        d["scripts"] = b.scripts.size();
        return d;
      },
      py::arg("text"));

  m.def(
      "apply_transform",
      [](const std::string& name, const py::bytes& input) {
        return ApplyTransform(TransformByName(name), std::string(input));
      },
      py::arg("name"), py::arg("input"));
  m.def(
      "decode_transform",
      [](const std::string& name, const std::string& input) -> std::optional<py::bytes> {
        const auto out = DecodeTransform(TransformByName(name), input);
        if (!out) return std::nullopt;
        return py::bytes(*out);
      },
      py::arg("name"), py::arg("input"));

  m.def(
      "scan_payload",
      [](const py::bytes& payload, const std::string& profile_json, int max_depth) {
        const auto profile = SingleProfile(profile_json);
        TransformSet transforms;
        transforms.max_depth = max_depth;
        const auto index = TermIndex::Build(profile, transforms);
        py::list out;
        for (const auto& h : ScanPayload(std::string(payload), index, transforms, max_depth)) {
          py::dict d;
          d["secret_id"] = profile.secrets[h.secret_index].id;
          d["chain"] = ChainNames(h.chain);
          d["offset"] = h.offset;
          d["length"] = h.length;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("payload"), py::arg("profile_json"), py::arg("max_depth") = 3);
  m.def(
      "scan_trace",
      [](const std::string& trace_text, const std::string& profile_json,
         const PublicSuffixTable& psl) {
        const auto profile = SingleProfile(profile_json);
        const TransformSet transforms;
        const auto index = TermIndex::Build(profile, transforms);
        py::list out;
        for (const auto& f : ScanBundle(ParseTraceBundle(trace_text), index, transforms, psl)) {
          out.append(FindingToDict(f));
        }
        return out;
      },
      py::arg("trace_text"), py::arg("profile_json"), py::arg("psl"));

  m.def(
      "classify_script",
      [](const std::string& url, const std::vector<std::string>& symbols, int threshold) {
        auto config = ClassifierConfig::Default();
        config.category_threshold = threshold;
        const auto v = ClassifyScript(url, symbols, config);
        py::dict d;
        d["script_url"] = v.script_url;
        d["categories"] = v.categories_hit;
        d["explicit_categories"] = v.explicit_hit;
        d["flagged"] = v.flagged;
        return d;
      },
      py::arg("script_url"), py::arg("symbols"), py::arg("threshold") = 10);

  m.def(
      "is_blocked",
      [](const std::string& url, const std::string& list_text, const std::string& format,
         const PublicSuffixTable& psl) {
        return IsBlocked(url, ParseFilterList(list_text, ParseFilterListFormat(format)), psl);
      },
      py::arg("url"), py::arg("list_text"), py::arg("format"), py::arg("psl"));
  m.def(
      "efficacy",
      [](const std::vector<std::string>& domains,
         const std::vector<std::tuple<std::string, std::string, std::string>>& lists,
         const std::set<std::string>& exclusions, const PublicSuffixTable& psl) {
        std::vector<FilterList> parsed;
        for (const auto& spec : lists) parsed.push_back(ListFromTuple(spec));
        const auto report = Efficacy(domains, parsed, exclusions, psl);
        py::dict per_list;
        for (const auto& [name, f] : report.per_list) {
          per_list[py::str(name)] = py::make_tuple(f.blocked, f.total);
        }
        py::dict d;
        d["per_list"] = per_list;
        d["combined"] = py::make_tuple(report.combined.blocked, report.combined.total);
        d["combined_blocked"] = report.combined_blocked;
        d["universe"] = report.universe;
        d["excluded"] = report.excluded;
        return d;
      },
      py::arg("domains"), py::arg("lists"), py::arg("exclusions") = std::set<std::string>{},
      py::arg("psl"),
      "lists: (name, text, format) tuples; fractions are (blocked, total).");

  m.def(
      "analyze_manifest",
      [](const std::string& text, const std::string& extension_id) {
        const auto f = AnalyzeManifest(text, extension_id);
        py::dict d;
        d["extension_id"] = f.extension_id;
        d["injects_everywhere"] = f.injects_everywhere;
        d["sensitive_permissions"] = f.sensitive_permissions;
        return d;
      },
      py::arg("text"), py::arg("extension_id") = "");

  m.def(
      "analyze_corpus",
      [](const std::string& corpus_dir, const std::string& secrets_path,
         const PublicSuffixTable& psl, int workers, const std::string& site_categories,
         const std::string& tp_categories) {
        const auto profiles = LoadSecretProfiles(secrets_path);
        PipelineOptions options;
        options.workers = workers;
        if (!site_categories.empty()) options.site_categories = LoadCategoryCsv(site_categories);
        if (!tp_categories.empty()) options.tp_categories = LoadCategoryCsv(tp_categories);
        CorpusReport report;
        {
          py::gil_scoped_release release;
          report = RunPipeline(corpus_dir, profiles, psl, options);
        }
        return RenderReport(report, ReportFormat::kJson, profiles).at("report.json");
      },
      py::arg("corpus_dir"), py::arg("secrets_path"), py::arg("psl"), py::arg("workers") = 1,
      py::arg("site_categories") = "", py::arg("tp_categories") = "",
      "Runs the full pipeline and returns report.json text.");
}
