import pytest

from cosim_service.encoders import (
    OffsetReconstructionError,
    ReferenceEncoder,
    build_encoder,
    validate_spans,
)

# Recorded once from ReferenceEncoder(4) on this fixture text; the
# encoder is hash-seeded, so this must never drift.
GOLDEN_TEXT = "The bank, rose early."
GOLDEN_TOKENS = [
    {"t": "The", "s": 0, "e": 3,
     "v": [-0.3768677363334292, -0.47644518433821736, 0.0336031285431424, 0.15989596081656288]},
    {"t": "bank", "s": 4, "e": 8,
     "v": [-0.994738758399379, 0.44678082374473016, 0.3619260777931783, 0.010364371867653821]},
    {"t": ",", "s": 8, "e": 9,
     "v": [-0.43247164774431246, -0.5511910713456831, -0.4842007466113196, -0.5952285025433208]},
    {"t": "rose", "s": 10, "e": 14,
     "v": [-0.7532776667078604, -0.7905426927295447, -0.05577411463406978, -0.7497797295060185]},
    {"t": "early", "s": 15, "e": 20,
     "v": [0.5519745140412267, -0.6244848892895205, 0.17090060414884856, -0.11805876979906138]},
    {"t": ".", "s": 20, "e": 21,
     "v": [-0.48945391787656467, -0.4335709982491509, 0.9452318263130421, -0.3167149458525951]},
]


class TestReferenceEncoder:
    def test_recorded_golden_response(self):
        assert ReferenceEncoder(4).encode(GOLDEN_TEXT) == GOLDEN_TOKENS

    def test_offsets_reconstruct_surface_slices(self):
        text = "žába skáče, rychle!"
        for tok in ReferenceEncoder(3).encode(text):
            assert text[tok["s"] : tok["e"]] == tok["t"]

    def test_deterministic(self):
        enc = ReferenceEncoder(8)
        assert enc.encode("same text twice") == enc.encode("same text twice")

    def test_context_sensitivity(self):
        enc = ReferenceEncoder(8)
        a = enc.encode("bank of the river")[0]
        b = enc.encode("bank raised rates")[0]
        assert a["t"] == b["t"] == "bank"
        assert a["v"] != b["v"]

    def test_dimension(self):
        tokens = ReferenceEncoder(16).encode("two words")
        assert all(len(t["v"]) == 16 for t in tokens)

    def test_empty_text(self):
        assert ReferenceEncoder(4).encode("") == []

    def test_whitespace_only(self):
        assert ReferenceEncoder(4).encode("  \t ") == []

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            ReferenceEncoder(0)


class TestValidateSpans:
    def test_accepts_increasing_spans(self):
        validate_spans("ab cd", [{"t": "ab", "s": 0, "e": 2}, {"t": "cd", "s": 3, "e": 5}])

    def test_rejects_out_of_bounds(self):
        with pytest.raises(OffsetReconstructionError):
            validate_spans("ab", [{"t": "abc", "s": 0, "e": 3}])

    def test_rejects_overlap(self):
        with pytest.raises(OffsetReconstructionError):
            validate_spans("abcd", [{"t": "abc", "s": 0, "e": 3}, {"t": "cd", "s": 2, "e": 4}])

    def test_rejects_empty_span(self):
        with pytest.raises(OffsetReconstructionError):
            validate_spans("ab", [{"t": "", "s": 1, "e": 1}])


class TestBuildEncoder:
    def test_ref_spec(self):
        enc = build_encoder("ref:12")
        assert enc.dimension == 12
        assert enc.model_id == "ref:12"

    def test_unknown_spec(self):
        with pytest.raises(ValueError):
            build_encoder("word2vec")

    def test_hf_spec_requires_checkpoint(self):
        # no model hub in the test environment; the error must surface
        # at construction, not at request time
        with pytest.raises(Exception):
            build_encoder("hf:this-model-does-not-exist-anywhere")
