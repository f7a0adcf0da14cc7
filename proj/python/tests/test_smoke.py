import base64
import hashlib
import json
import pathlib
import urllib.parse

import lzstring
import mmh3
import pytest

import walletprobe as wp

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "tests" / "fixtures"
ADDRESS = "0x7e4ABd63A7C8314Cc28D388303472353D884f292"


@pytest.fixture(scope="module")
def psl():
    return wp.default_psl()


def wallet_profile():
    return (FIXTURES / "wallet_secrets.json").read_text()


def test_registrable_domain(psl):
    assert psl.registrable_domain("https://static-lvlt.xhcdn.com/x.js") == "xhcdn.com"
    assert psl.registrable_domain("http://127.0.0.1:8080/") == "127.0.0.1"
    assert psl.registrable_domain_for_host(".kyberswap.com") == "kyberswap.com"
    assert psl.is_third_party("https://mega.io/x.js", "https://mega.nz/")
    assert not psl.is_third_party("https://www.example.com/a.js", "https://example.com/")
    with pytest.raises(wp.ParseError):
        psl.registrable_domain("inline")


@pytest.mark.parametrize("text", ["", "a", "hello world", ADDRESS.lower(), "p@ss w/rd!"])
def test_transforms_agree_with_python_libraries(text):
    raw = text.encode()
    expected = {
        "base64_std_padded": base64.b64encode(raw).decode(),
        "base64_urlsafe_unpadded": base64.urlsafe_b64encode(raw).decode().rstrip("="),
        "percent_encoding": urllib.parse.quote(text, safe="-_.!~*'()"),
        "lzstring_base64": lzstring.LZString().compressToBase64(text),
        "md5_hex": hashlib.md5(raw).hexdigest(),
        "sha1_hex": hashlib.sha1(raw).hexdigest(),
        "sha256_hex": hashlib.sha256(raw).hexdigest(),
        "murmur3_32_hex": format(mmh3.hash(raw, 0, signed=False), "08x"),
    }
    for name, value in expected.items():
        assert wp.apply_transform(name, raw) == value, name


def test_decode_round_trip():
    encoded = wp.apply_transform("base64_std_padded", b"secret")
    assert wp.decode_transform("base64_std_padded", encoded) == b"secret"
    assert wp.decode_transform("base64_std_padded", "@@@") is None
    with pytest.raises(ValueError):
        wp.apply_transform("rot13", b"x")


def test_trace_round_trip():
    text = (FIXTURES / "ga_get_leak.jsonl").read_text()
    assert wp.canonicalize_trace(text) == text
    summary = wp.trace_summary(text)
    assert summary["visit_id"] == "degens-farm-ga"
    assert summary["requests"] == 1
    with pytest.raises(wp.Error):
        wp.trace_summary((FIXTURES / "invalid" / "ws_without_payload.jsonl").read_text())


def test_scan_trace_finds_analytics_leak(psl):
    text = (FIXTURES / "ga_get_leak.jsonl").read_text()
    findings = wp.scan_trace(text, wallet_profile(), psl)
    assert len(findings) == 1
    f = findings[0]
    assert (f["channel"], f["receiver"], f["chain"]) == ("get_param", "google-analytics.com", [])
    assert ADDRESS.lower() not in f["evidence"].lower()


def test_scan_payload_nested_chain():
    carrier = base64.b64encode(hashlib.md5(ADDRESS.encode()).hexdigest().encode()).decode()
    hits = wp.scan_payload(("x=" + carrier).encode(), wallet_profile())
    assert hits == [
        {"secret_id": "wallet", "chain": ["base64_std_padded", "md5_hex"], "offset": 2,
         "length": len(carrier)}
    ]
    assert wp.scan_payload(b"nothing to see", wallet_profile()) == []


def test_classifier_threshold():
    symbols = [
        "HTMLCanvasElement.prototype.toDataURL", "window.localStorage",
        "Screen.prototype.colorDepth", "Document.prototype.cookie",
        "Date.prototype.getTimezoneOffset", "window.innerHeight",
        "Navigator.prototype.connection", "Navigator.prototype.userAgent",
        "Navigator.prototype.language",
    ]
    assert not wp.classify_script("s.js", symbols)["flagged"]
    verdict = wp.classify_script("s.js", symbols + ["Performance.prototype.now"])
    assert verdict["flagged"]
    assert verdict["explicit_categories"] == {"Canvas"}


def test_blocklists(psl):
    adblock = (FIXTURES / "adblock_sample.txt").read_text()
    assert wp.is_blocked("https://js.wpadmngr.com/static/adManager.m.js", adblock, "adblock", psl)
    assert not wp.is_blocked("https://notwpadmngr.com/", adblock, "adblock", psl)
    universe = (FIXTURES / "universe108.txt").read_text().split()
    report = wp.efficacy(
        universe, [("A", (FIXTURES / "list_a46.txt").read_text(), "adblock")], psl=psl)
    assert report["per_list"]["A"] == (46, 108)
    with pytest.raises(wp.ValidationError):
        wp.efficacy(universe, [("A", "x", "hosts")], psl=psl)


def test_manifest():
    text = (FIXTURES / "corpus20" / "manifests" / "nkbihfbeogaeaoehlefnkodbefgpgknn.json").read_text()
    finding = wp.analyze_manifest(text, "nkbihfbeogaeaoehlefnkodbefgpgknn")
    assert finding["injects_everywhere"]
    assert finding["sensitive_permissions"] == {"history", "tabs"}
    with pytest.raises(wp.ParseError):
        wp.analyze_manifest("{", "x")


def test_analyze_corpus_deterministic(psl):
    args = (str(FIXTURES / "corpus20"), str(FIXTURES / "corpus20_secrets.json"), psl)
    one = wp.analyze_corpus(*args, workers=1)
    assert one == wp.analyze_corpus(*args, workers=4)
    report = json.loads(one)
    assert report["diagnostics"]["bundles_analyzed"] == 20
    expected = json.loads((FIXTURES / "corpus20_expected.json").read_text())
    histogram = {row["key"]: row["scripts"] for row in report["combination_histogram"]}
    assert histogram == expected["histogram"]
    with pytest.raises(wp.ParseError):
        wp.analyze_corpus(str(FIXTURES / "invalid" / "empty_corpus"), args[1], psl)
