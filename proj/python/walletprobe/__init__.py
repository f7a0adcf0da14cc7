"""Offline analysis of recorded wallet-site visits."""

from importlib import resources

from ._walletprobe import (
    Error,
    ParseError,
    PublicSuffixList,
    ValidationError,
    analyze_corpus,
    analyze_manifest,
    apply_transform,
    canonicalize_trace,
    classify_script,
    decode_transform,
    efficacy,
    is_blocked,
    scan_payload,
    scan_trace,
    trace_summary,
)

__all__ = [
    "Error",
    "ParseError",
    "PublicSuffixList",
    "ValidationError",
    "analyze_corpus",
    "analyze_manifest",
    "apply_transform",
    "canonicalize_trace",
    "classify_script",
    "decode_transform",
    "default_psl",
    "efficacy",
    "is_blocked",
    "scan_payload",
    "scan_trace",
    "trace_summary",
]

_default_psl = None


def default_psl():
    """The public suffix list bundled with the package (ICANN section)."""
    global _default_psl
    if _default_psl is None:
        path = resources.files(__name__) / "data" / "public_suffix_list.dat"
        _default_psl = PublicSuffixList.load(str(path))
    return _default_psl
