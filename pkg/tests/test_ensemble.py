"""Weighted sigmoid ensembling: candidates, combining, fitting, weight IO."""

import itertools
import math

import numpy as np
import pytest
from scipy.special import logit

from comment_mme.corpus import Language, taxonomy_for
from comment_mme.ensemble import (
    EnsembleWeights,
    ProbabilityMatrix,
    combine,
    fit_weights,
    load_probabilities,
    load_weights,
    merge_weights,
    save_weights,
    simplex_candidates,
    weights_from_json,
    weights_to_json,
    write_probabilities,
)
from comment_mme.errors import (
    EmptyValidation,
    MisalignedMatrices,
    SchemaError,
    UnknownCategory,
)
from comment_mme.provider import LogitMatrix, sigmoid

JAVA = taxonomy_for(Language.JAVA)
N_CAT = len(JAVA)


def matrix(provider, values, ids=None, language=Language.JAVA):
    values = np.asarray(values, dtype=np.float64)
    if ids is None:
        ids = tuple(f"j{i:03d}" for i in range(values.shape[0]))
    return LogitMatrix(provider=provider, language=language, ids=tuple(ids), values=values)


def column_matrix(provider, probs, ids=None):
    """Logits whose sigmoid reproduces `probs` in every category column."""
    probs = np.asarray(probs, dtype=np.float64)
    return matrix(provider, np.tile(logit(probs)[:, None], (1, N_CAT)), ids=ids)


def uniform_weights(providers, language=Language.JAVA):
    w = np.full(len(providers), 1.0 / len(providers))
    table = {
        (language, c): w.copy() for c in taxonomy_for(language).categories
    }
    return EnsembleWeights(providers=tuple(providers), table=table)


def one_hot_weights(providers, hot, language=Language.JAVA):
    w = np.zeros(len(providers))
    w[providers.index(hot)] = 1.0
    table = {
        (language, c): w.copy() for c in taxonomy_for(language).categories
    }
    return EnsembleWeights(providers=tuple(providers), table=table)


# --- simplex candidates -----------------------------------------------------


def test_simplex_candidate_count_m4():
    got = simplex_candidates(4)
    assert got.shape == (1771, 4)


def test_simplex_candidates_cover_simplex():
    got = simplex_candidates(3)
    assert np.all(got >= 0.0)
    assert np.allclose(got.sum(axis=1), 1.0, atol=1e-12)
    # No duplicates.
    assert len({tuple(row) for row in got}) == len(got)


def test_simplex_candidates_ascending_lexicographic():
    got = simplex_candidates(3)
    rows = [tuple(row) for row in got]
    assert rows == sorted(rows)


def test_simplex_candidates_small_cases():
    assert simplex_candidates(1).tolist() == [[1.0]]
    assert simplex_candidates(2, resolution=0.5).tolist() == [
        [0.0, 1.0],
        [0.5, 0.5],
        [1.0, 0.0],
    ]


def test_simplex_candidates_validation():
    with pytest.raises(ValueError):
        simplex_candidates(0)
    with pytest.raises(ValueError):
        simplex_candidates(2, resolution=0.3)


# --- EnsembleWeights --------------------------------------------------------


def test_weights_validation():
    with pytest.raises(SchemaError, match="at least one provider"):
        EnsembleWeights(providers=(), table={})
    with pytest.raises(SchemaError, match="unique"):
        EnsembleWeights(providers=("a", "a"), table={})
    with pytest.raises(SchemaError, match="sum to 1"):
        EnsembleWeights(
            providers=("a", "b"),
            table={(Language.JAVA, "summary"): np.array([0.7, 0.7])},
        )
    with pytest.raises(SchemaError, match="sum to 1"):
        EnsembleWeights(
            providers=("a", "b"),
            table={(Language.JAVA, "summary"): np.array([-0.5, 1.5])},
        )
    with pytest.raises(SchemaError, match="expected 2 weights"):
        EnsembleWeights(
            providers=("a", "b"),
            table={(Language.JAVA, "summary"): np.array([1.0])},
        )
    with pytest.raises(UnknownCategory):
        EnsembleWeights(
            providers=("a",),
            table={(Language.JAVA, "parameters"): np.array([1.0])},
        )


def test_weights_vector_and_languages():
    w = uniform_weights(["a", "b"])
    assert np.array_equal(w.vector(Language.JAVA, "usage"), [0.5, 0.5])
    with pytest.raises(SchemaError, match="no weights"):
        w.vector(Language.PYTHON, "usage")
    assert w.languages() == [Language.JAVA]


def test_merge_weights():
    merged = merge_weights(
        [uniform_weights(["a", "b"]), uniform_weights(["a", "b"], Language.PHARO)]
    )
    assert merged.languages() == [Language.JAVA, Language.PHARO]
    with pytest.raises(SchemaError, match="different providers"):
        merge_weights([uniform_weights(["a", "b"]), uniform_weights(["a", "c"], Language.PHARO)])
    with pytest.raises(SchemaError, match="duplicate"):
        merge_weights([uniform_weights(["a", "b"]), uniform_weights(["a", "b"])])
    with pytest.raises(SchemaError, match="nothing to merge"):
        merge_weights([])


# --- combine ----------------------------------------------------------------


def test_combine_one_hot_is_bit_exact():
    rng = np.random.default_rng(3)
    a = matrix("a", rng.normal(size=(5, N_CAT)))
    b = matrix("b", rng.normal(size=(5, N_CAT)))
    out = combine([a, b], one_hot_weights(["a", "b"], hot="a"))
    assert np.array_equal(out.values, sigmoid(a.values))
    out_b = combine([a, b], one_hot_weights(["a", "b"], hot="b"))
    assert np.array_equal(out_b.values, sigmoid(b.values))


def test_combine_uniform_identical_providers_is_identity():
    rng = np.random.default_rng(4)
    values = rng.normal(size=(6, N_CAT))
    a = matrix("a", values)
    b = matrix("b", values.copy())
    out = combine([a, b], uniform_weights(["a", "b"]))
    assert np.allclose(out.values, sigmoid(values), atol=1e-12, rtol=0.0)


def test_combine_worked_example():
    a = matrix("a", np.zeros((1, N_CAT)))
    b = matrix("b", np.full((1, N_CAT), 2.0))
    out = combine([a, b], uniform_weights(["a", "b"]))
    expected = 0.5 * 0.5 + 0.5 * (1.0 / (1.0 + math.exp(-2.0)))
    assert out.values[0, 0] == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.690399, abs=5e-7)


def test_combine_output_in_unit_interval():
    rng = np.random.default_rng(5)
    mats = [matrix(n, rng.normal(scale=10.0, size=(8, N_CAT))) for n in ("a", "b", "c")]
    w = uniform_weights(["a", "b", "c"])
    out = combine(mats, w)
    assert out.values.min() >= 0.0
    assert out.values.max() <= 1.0


def test_combine_alignment_errors():
    a = matrix("a", np.zeros((2, N_CAT)), ids=("x", "y"))
    b_ids = matrix("b", np.zeros((2, N_CAT)), ids=("x", "z"))
    with pytest.raises(MisalignedMatrices, match="different sample ids"):
        combine([a, b_ids], uniform_weights(["a", "b"]))

    pharo = LogitMatrix(
        provider="b",
        language=Language.PHARO,
        ids=("x", "y"),
        values=np.zeros((2, len(taxonomy_for(Language.PHARO)))),
    )
    with pytest.raises(MisalignedMatrices, match="different languages"):
        combine([a, pharo], uniform_weights(["a", "b"]))


def test_combine_provider_mismatch():
    a = matrix("a", np.zeros((1, N_CAT)))
    with pytest.raises(SchemaError, match="do not match"):
        combine([a], uniform_weights(["a", "b"]))
    with pytest.raises(SchemaError, match="no logit matrices"):
        combine([], uniform_weights(["a"]))


# --- fitting: simplex grid ---------------------------------------------------


def brute_force_weights(s, y, resolution=0.05):
    """Independent exhaustive search with the same tie rules: best F1 at
    threshold 0.5, then higher weight entropy, then lexicographic order."""
    k = round(1.0 / resolution)
    m = s.shape[1]
    best = None
    best_key = None
    for counts in itertools.product(range(k + 1), repeat=m):
        if sum(counts) != k:
            continue
        w = np.array(counts, dtype=np.float64) / k
        p = s @ w
        preds = p >= 0.5
        tp = int(np.sum(preds & (y == 1)))
        fp = int(np.sum(preds & (y == 0)))
        fn = int(np.sum(~preds & (y == 1)))
        denom = 2 * tp + fp + fn
        f1 = 2 * tp / denom if denom else 0.0
        entropy = -sum((c / k) * math.log(c / k) for c in sorted(counts) if c)
        key = (f1, entropy, tuple(-w))  # larger key wins; -w prefers lex smaller
        if best_key is None or key > best_key:
            best_key = key
            best = w
    return best


def fit_single_construction():
    """Provider a is right but weak; provider b is confidently wrong."""
    y = np.array([1, 1, 1, 0, 0, 0, 0])
    s_a = np.where(y == 1, 0.53, 0.45)
    s_b = np.full(len(y), 0.10)
    return y, s_a, s_b


def test_fit_simplex_grid_prefers_informative_provider():
    y, s_a, s_b = fit_single_construction()
    labels = np.tile(y[:, None], (1, N_CAT))
    fitted = fit_weights(
        [column_matrix("a", s_a), column_matrix("b", s_b)], labels
    )
    for category in JAVA.categories:
        w = fitted.vector(Language.JAVA, category)
        # F1=1 needs w_a in {0.95, 1.0}; the entropy tie-break picks 0.95.
        assert np.allclose(w, [0.95, 0.05], atol=1e-12)
        assert w[0] >= 0.95


def test_fit_simplex_grid_matches_brute_force():
    y, s_a, s_b = fit_single_construction()
    s = np.column_stack([s_a, s_b])
    assert np.allclose(brute_force_weights(s, y), [0.95, 0.05], atol=1e-12)

    rng = np.random.default_rng(21)
    for trial in range(10):
        n = 30
        m = 2 if trial % 2 == 0 else 3
        y_rand = (rng.random(n) < 0.4).astype(int)
        if not y_rand.any():
            y_rand[0] = 1
        s_rand = rng.uniform(0.02, 0.98, size=(n, m))
        labels = np.tile(y_rand[:, None], (1, N_CAT))
        mats = [
            column_matrix(f"p{j}", s_rand[:, j]) for j in range(m)
        ]
        fitted = fit_weights(mats, labels)
        expected = brute_force_weights(s_rand, y_rand)
        got = fitted.vector(Language.JAVA, "summary")
        assert np.allclose(got, expected, atol=1e-9), (trial, got, expected)


def test_fit_single_provider_gets_full_weight():
    y = np.array([1, 0, 1, 0])
    fitted = fit_weights(
        [column_matrix("only", np.array([0.9, 0.1, 0.8, 0.2]))],
        np.tile(y[:, None], (1, N_CAT)),
    )
    assert fitted.vector(Language.JAVA, "summary").tolist() == [1.0]


def test_fit_identical_providers_fall_back_to_uniform():
    y = np.array([1, 1, 0, 0])
    s = np.array([0.8, 0.7, 0.2, 0.3])
    for names in (["a", "b"], ["a", "b", "c", "d"]):
        mats = [column_matrix(n, s) for n in names]
        fitted = fit_weights(mats, np.tile(y[:, None], (1, N_CAT)))
        expect = np.full(len(names), 1.0 / len(names))
        for category in JAVA.categories:
            assert np.allclose(
                fitted.vector(Language.JAVA, category), expect, atol=1e-12
            )


def test_fit_three_provider_dominance():
    y = np.array([1] * 5 + [0] * 5)
    s_good = np.where(y == 1, 0.53, 0.45)
    s_dud = np.full(len(y), 0.10)
    mats = [
        column_matrix("good", s_good),
        column_matrix("dud1", s_dud),
        column_matrix("dud2", s_dud),
    ]
    fitted = fit_weights(mats, np.tile(y[:, None], (1, N_CAT)))
    w = fitted.vector(Language.JAVA, "summary")
    # F1=1 needs w_good in {0.95, 1.0}; entropy prefers 0.95, and the
    # remaining 0.05 lands on the lexicographically smaller split.
    assert np.allclose(w, [0.95, 0.0, 0.05], atol=1e-12)
    assert w[0] > max(w[1], w[2])
    s = np.column_stack([s_good, s_dud, s_dud])
    assert np.allclose(brute_force_weights(s, y), w, atol=1e-12)


def test_fit_no_positive_category_warns_uniform():
    y = np.array([1, 1, 0, 0])
    labels = np.tile(y[:, None], (1, N_CAT))
    labels[:, JAVA.index("deprecation")] = 0
    mats = [
        column_matrix("a", np.array([0.9, 0.8, 0.1, 0.2])),
        column_matrix("b", np.array([0.7, 0.6, 0.3, 0.4])),
    ]
    with pytest.warns(UserWarning, match="deprecation.*no positive"):
        fitted = fit_weights(mats, labels)
    assert np.allclose(
        fitted.vector(Language.JAVA, "deprecation"), [0.5, 0.5], atol=1e-12
    )


def test_fit_validation_errors():
    y = np.array([[1] * N_CAT])
    with pytest.raises(EmptyValidation):
        fit_weights([], y)
    mat = column_matrix("a", np.array([0.5]))
    with pytest.raises(EmptyValidation):
        fit_weights([mat], np.zeros((0, N_CAT), dtype=int))
    with pytest.raises(MisalignedMatrices):
        fit_weights([mat], np.ones((2, N_CAT), dtype=int))
    with pytest.raises(MisalignedMatrices):
        fit_weights([mat], np.ones((1, 3), dtype=int))
    with pytest.raises(ValueError, match="unknown fitting method"):
        fit_weights([mat], y, method="annealing")
    with pytest.raises(SchemaError, match="duplicate provider"):
        fit_weights([mat, column_matrix("a", np.array([0.4]))], y)
    misaligned = column_matrix("b", np.array([0.5]), ids=("zzz",))
    with pytest.raises(MisalignedMatrices):
        fit_weights([mat, misaligned], y)


# --- fitting: gradient -------------------------------------------------------


def gradient_fixture():
    y = np.array([1] * 6 + [0] * 6)
    s_good = np.where(y == 1, 0.9, 0.1)
    s_bad = np.where(y == 1, 0.1, 0.9)
    labels = np.tile(y[:, None], (1, N_CAT))
    mats = [column_matrix("good", s_good), column_matrix("bad", s_bad)]
    return mats, labels


def test_fit_gradient_returns_simplex_favoring_good_provider():
    mats, labels = gradient_fixture()
    fitted = fit_weights(mats, labels, method="gradient", seed=0)
    for category in JAVA.categories:
        w = fitted.vector(Language.JAVA, category)
        assert np.all(w >= 0.0)
        assert w.sum() == pytest.approx(1.0, abs=1e-9)
        assert w[0] > 0.8


def test_fit_gradient_deterministic_per_seed():
    mats, labels = gradient_fixture()
    a = fit_weights(mats, labels, method="gradient", seed=7)
    b = fit_weights(mats, labels, method="gradient", seed=7)
    c = fit_weights(mats, labels, method="gradient", seed=8)
    for category in JAVA.categories:
        assert np.array_equal(
            a.vector(Language.JAVA, category), b.vector(Language.JAVA, category)
        )
    assert not np.array_equal(
        a.vector(Language.JAVA, "summary"), c.vector(Language.JAVA, "summary")
    )


# --- weight IO ---------------------------------------------------------------


def test_weights_json_round_trip():
    w = np.array([0.3, 0.7])
    table = {
        (Language.JAVA, c): w.copy() if i % 2 else w[::-1].copy()
        for i, c in enumerate(JAVA.categories)
    }
    weights = EnsembleWeights(providers=("a", "b"), table=table)
    back = weights_from_json(weights_to_json(weights))
    assert back.providers == weights.providers
    for key, vec in weights.table.items():
        assert np.array_equal(back.table[key], vec)


def test_weights_json_canonical_row_order():
    weights = uniform_weights(["a", "b"])
    keys = list(weights_to_json(weights))
    assert keys == [f"java/{c}" for c in JAVA.categories]


def test_weights_from_json_errors():
    with pytest.raises(SchemaError, match="empty"):
        weights_from_json({})
    with pytest.raises(SchemaError, match="expected <lang>/<category>"):
        weights_from_json({"summary": {"a": 1.0}})
    with pytest.raises(SchemaError, match="differs"):
        weights_from_json(
            {
                "java/summary": {"a": 0.5, "b": 0.5},
                "java/usage": {"a": 0.5, "c": 0.5},
            }
        )


def test_save_load_weights_skips_comment_header(tmp_path):
    weights = uniform_weights(["a", "b"])
    path = tmp_path / "weights.json"
    save_weights(weights, path, header=["artifact v1", "seed=0"])
    text = path.read_text()
    assert text.startswith("// artifact v1\n// seed=0\n")
    back = load_weights(path)
    assert back.providers == ("a", "b")
    for key, vec in weights.table.items():
        assert np.array_equal(back.table[key], vec)


# --- probability IO ----------------------------------------------------------


def test_probability_matrix_validation():
    with pytest.raises(SchemaError, match="lie in"):
        ProbabilityMatrix(
            language=Language.JAVA,
            ids=("a",),
            values=np.full((1, N_CAT), 1.5),
        )


def test_probability_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    values = rng.uniform(size=(4, N_CAT))
    probs = ProbabilityMatrix(
        language=Language.JAVA,
        ids=("a", "b", "c", "d"),
        values=values,
    )
    path = tmp_path / "probs.jsonl"
    write_probabilities(probs, path)
    back = load_probabilities(path, JAVA)
    assert back.ids == probs.ids
    assert np.array_equal(back.values, values)


def test_load_probabilities_rejects_out_of_range(tmp_path):
    bad = matrix("a", np.full((1, N_CAT), 3.0))
    path = tmp_path / "bad.jsonl"
    from comment_mme.provider import write_logits

    write_logits(bad, path)
    with pytest.raises(SchemaError, match="lie in"):
        load_probabilities(path, JAVA)
