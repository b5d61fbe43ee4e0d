import random
from pathlib import Path

import pytest

from proxypipe.corpus import (
    ArticleMeta,
    ContextBundle,
    QaInstance,
    TokenCounter,
    render_documents,
    segment_sentences,
)
from proxypipe.proxies import (
    EmptyContext,
    EmptySupport,
    InsufficientNoisePool,
    MissingMetadata,
    ProxyContext,
    ProxyError,
    annotation_proxy,
    metadata_proxy,
    noisy_proxy,
    random_proxy,
    retrieval_proxy,
)
from proxypipe.retrieval import EmbeddingVector

DATA = Path(__file__).parent / "data"


def bundle_for(corpus, instance, doc_ids, counter):
    text = render_documents([corpus.documents[d] for d in doc_ids])
    return ContextBundle(instance_id=instance.id, doc_ids=tuple(doc_ids),
                         text=text, token_count=counter.count(text),
                         under_budget=True)


@pytest.fixture
def tiny_bundle(tiny_corpus, counter):
    inst = tiny_corpus.instances[0]
    return bundle_for(tiny_corpus, inst, ["a", "b", "c", "d"], counter)


class TestAnnotationProxy:
    def test_sentences_in_seed_order(self, tiny_corpus, counter):
        inst = tiny_corpus.instances[0]
        proxy = annotation_proxy(inst, tiny_corpus, counter)
        assert proxy.kind == "annotation"
        assert proxy.text == ("The red probe measured the storm. "
                              "The storm lasted nine days.")
        assert proxy.provenance == (("a", 0), ("b", 0))

    def test_duplicates_collapse(self, tiny_corpus, counter):
        inst = tiny_corpus.instances[0]
        doubled = QaInstance(
            id=inst.id, question=inst.question, answers=inst.answers,
            supporting=inst.supporting + inst.supporting,
            seed_docs=inst.seed_docs, metadata=inst.metadata)
        assert annotation_proxy(doubled, tiny_corpus, counter).text == \
            annotation_proxy(inst, tiny_corpus, counter).text

    def test_empty_support(self, tiny_corpus, counter):
        inst = QaInstance(id="x", question="q?", answers=("a",))
        with pytest.raises(EmptySupport):
            annotation_proxy(inst, tiny_corpus, counter)

    def test_token_count_matches_counter(self, tiny_corpus, counter):
        proxy = annotation_proxy(tiny_corpus.instances[0], tiny_corpus, counter)
        assert proxy.token_count == counter.count(proxy.text)


class TestMetadataProxy:
    def test_golden_block(self, counter):
        meta = ArticleMeta(
            title="Existence and uniqueness for Legendre curves",
            authors=("Tomonori Fukunaga", "Masatomo Takahashi"),
            n_references=9)
        inst = QaInstance(id="x", question="q?", answers=("a",),
                          metadata=(meta,))
        golden = (DATA / "metadata_proxy_golden.txt").read_text().rstrip("\n")
        assert metadata_proxy(inst, counter).text == golden

    def test_count_of_one_phrasing(self, counter):
        meta = ArticleMeta(title="Solo", authors=("One Author",),
                           n_references=1)
        inst = QaInstance(id="x", question="q?", answers=("a",),
                          metadata=(meta,))
        text = metadata_proxy(inst, counter).text
        assert "There are 1 words in the title (separated by spaces)." in text
        assert "There are 1 authors: One Author" in text
        assert "There are 1 references in the reference section." in text

    def test_citation_line(self, tiny_corpus, counter):
        text = metadata_proxy(tiny_corpus.instances[0], counter).text
        blocks = text.split("\n\n")
        assert len(blocks) == 2
        assert blocks[0].endswith(
            "The other provided articles are not cited by this article.")
        assert blocks[1].endswith(
            "This article cites the following provided articles: Alpha.")

    def test_missing_metadata(self, counter):
        inst = QaInstance(id="x", question="q?", answers=("a",))
        with pytest.raises(MissingMetadata):
            metadata_proxy(inst, counter)


class TestRandomProxy:
    def test_subset_of_context_and_budget(self, tiny_corpus, tiny_bundle, counter):
        inst = tiny_corpus.instances[0]
        proxy = random_proxy(inst, tiny_bundle, budget_tokens=12, seed=3,
                             counter=counter)
        assert proxy.kind == "random"
        assert proxy.token_count <= 12
        pool = set()
        for doc in tiny_corpus.documents.values():
            pool.update(doc.body)
        assert set(segment_sentences(proxy.text)) <= pool

    def test_seed_determinism_and_variation(self, tiny_corpus, tiny_bundle, counter):
        inst = tiny_corpus.instances[0]
        a = random_proxy(inst, tiny_bundle, 30, seed=1, counter=counter)
        b = random_proxy(inst, tiny_bundle, 30, seed=1, counter=counter)
        assert a.text == b.text
        others = {random_proxy(inst, tiny_bundle, 30, seed=s, counter=counter).text
                  for s in range(6)}
        assert len(others) > 1

    def test_empty_context(self, tiny_corpus, counter):
        inst = tiny_corpus.instances[0]
        empty = ContextBundle(instance_id=inst.id, doc_ids=(), text="",
                              token_count=0, under_budget=True)
        with pytest.raises(EmptyContext):
            random_proxy(inst, empty, 10, seed=0, counter=counter)

    def test_truncated_flag(self, tiny_corpus, tiny_bundle, counter):
        inst = tiny_corpus.instances[0]
        tight = random_proxy(inst, tiny_bundle, 8, seed=0, counter=counter)
        roomy = random_proxy(inst, tiny_bundle, 10_000, seed=0, counter=counter)
        assert tight.truncated
        assert not roomy.truncated


class TestRetrievalProxy:
    def test_bm25_prefers_overlapping_sentence(self, tiny_corpus, tiny_bundle, counter):
        inst = tiny_corpus.instances[0]
        proxy = retrieval_proxy(inst, tiny_bundle, "bm25", budget_tokens=7,
                                counter=counter)
        assert proxy.kind == "bm25"
        # One sentence fits; it must be the best lexical match for the question.
        assert proxy.text == "The red probe measured the storm."

    def test_reading_order_restored(self, tiny_corpus, tiny_bundle, counter):
        inst = tiny_corpus.instances[0]
        proxy = retrieval_proxy(inst, tiny_bundle, "bm25", budget_tokens=10_000,
                                counter=counter)
        assert list(proxy.provenance) == sorted(proxy.provenance)
        # With an unconstrained budget every context sentence is selected.
        all_sents = []
        for doc_id in tiny_bundle.doc_ids:
            all_sents.extend(tiny_corpus.documents[doc_id].body)
        assert proxy.text == " ".join(all_sents)

    def test_fill_matches_greedy_oracle(self, tiny_corpus, tiny_bundle, counter):
        # Independent oracle: rank by bm25, take greedily while the join
        # fits, then sort selected ids ascending.
        from proxypipe.retrieval import Bm25Index, top_k_lexical
        inst = tiny_corpus.instances[0]
        pool = []
        for doc_id in tiny_bundle.doc_ids:
            pool.extend(tiny_corpus.documents[doc_id].body)
        sentences = dict(enumerate(pool))
        ranked = top_k_lexical(Bm25Index.build(sentences), inst.question,
                               len(pool))
        budget = 14
        taken = []
        for sid in ranked:
            joined = " ".join([sentences[i] for i in taken] + [sentences[sid]])
            if counter.count(joined) > budget:
                break
            taken.append(sid)
        expected = " ".join(sentences[i] for i in sorted(taken))
        proxy = retrieval_proxy(inst, tiny_bundle, "bm25", budget_tokens=budget,
                                counter=counter)
        assert proxy.text == expected

    def test_embedding_mode_uses_embed_fn(self, tiny_corpus, tiny_bundle, counter):
        inst = tiny_corpus.instances[0]

        def embed(texts):
            # Question aligns exactly with sentences containing "storm".
            return [EmbeddingVector((1.0, 0.0)) if "storm" in t or "?" in t
                    else EmbeddingVector((0.0, 1.0)) for t in texts]

        proxy = retrieval_proxy(inst, tiny_bundle, "embedding", budget_tokens=13,
                                counter=counter, embed_fn=embed)
        assert proxy.kind == "embedding"
        assert "storm" in proxy.text
        assert "valley" not in proxy.text

    def test_embedding_mode_requires_embed_fn(self, tiny_corpus, tiny_bundle, counter):
        with pytest.raises(ValueError):
            retrieval_proxy(tiny_corpus.instances[0], tiny_bundle, "embedding",
                            10, counter)

    def test_unknown_mode(self, tiny_corpus, tiny_bundle, counter):
        with pytest.raises(ValueError):
            retrieval_proxy(tiny_corpus.instances[0], tiny_bundle, "tfidf",
                            10, counter)


class TestNoisyProxy:
    def oracle(self, tiny_corpus, counter):
        return annotation_proxy(tiny_corpus.instances[0], tiny_corpus, counter)

    def test_count_law(self, tiny_corpus, tiny_bundle, counter):
        oracle = self.oracle(tiny_corpus, counter)
        s = len(segment_sentences(oracle.text))
        extra = [f"Extra filler sentence number {i} sits here." for i in range(40)]
        for k in (1, 2, 5):
            noisy = noisy_proxy(oracle, tiny_bundle, ratio_noise=k, seed=4,
                                counter=counter, extra_pool=extra)
            total = len(segment_sentences(noisy.text))
            assert total == s * (1 + k)
            assert noisy.noise_ratio == (1, k)
            assert not noisy.truncated

    def test_oracle_order_preserved(self, tiny_corpus, tiny_bundle, counter):
        oracle = self.oracle(tiny_corpus, counter)
        oracle_sents = segment_sentences(oracle.text)
        extra = [f"Noise clause {i} rambles on." for i in range(30)]
        noisy = noisy_proxy(oracle, tiny_bundle, ratio_noise=3, seed=11,
                            counter=counter, extra_pool=extra)
        merged = segment_sentences(noisy.text)
        kept = [s for s in merged if s in set(oracle_sents)]
        assert kept == oracle_sents

    def test_seed_determinism(self, tiny_corpus, tiny_bundle, counter):
        oracle = self.oracle(tiny_corpus, counter)
        a = noisy_proxy(oracle, tiny_bundle, 2, seed=5, counter=counter)
        b = noisy_proxy(oracle, tiny_bundle, 2, seed=5, counter=counter)
        assert a.text == b.text

    def test_pool_excludes_oracle_sentences(self, tiny_corpus, tiny_bundle, counter):
        oracle = self.oracle(tiny_corpus, counter)
        noisy = noisy_proxy(oracle, tiny_bundle, 2, seed=0, counter=counter)
        merged = segment_sentences(noisy.text)
        oracle_sents = segment_sentences(oracle.text)
        noise = [s for s in merged if s not in set(oracle_sents)]
        assert len(noise) == len(merged) - len(oracle_sents)
        assert len(set(noise)) == len(noise)  # without replacement

    def test_insufficient_pool_truncates(self, tiny_corpus, tiny_bundle, counter):
        oracle = self.oracle(tiny_corpus, counter)
        noisy = noisy_proxy(oracle, tiny_bundle, ratio_noise=50, seed=0,
                            counter=counter)
        assert noisy.truncated
        # everything available was used
        merged = segment_sentences(noisy.text)
        assert len(merged) < 2 * (1 + 50)

    def test_ratio_zero_returns_oracle(self, tiny_corpus, tiny_bundle, counter):
        oracle = self.oracle(tiny_corpus, counter)
        noisy = noisy_proxy(oracle, tiny_bundle, 0, seed=9, counter=counter)
        assert noisy.text == oracle.text
        assert noisy.kind == "noisy"
        assert noisy.noise_ratio == (1, 0)

    def test_negative_ratio(self, tiny_corpus, tiny_bundle, counter):
        with pytest.raises(ValueError):
            noisy_proxy(self.oracle(tiny_corpus, counter), tiny_bundle, -1,
                        seed=0, counter=counter)

    def test_rejects_non_oracle_kinds(self, tiny_corpus, tiny_bundle, counter):
        inst = tiny_corpus.instances[0]
        rnd = random_proxy(inst, tiny_bundle, 30, seed=1, counter=counter)
        with pytest.raises(ProxyError):
            noisy_proxy(rnd, tiny_bundle, 1, seed=0, counter=counter)


class TestProxyContextValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ProxyContext(instance_id="x", kind="oracle", text="t", token_count=1)

    def test_noise_ratio_only_on_noisy(self):
        with pytest.raises(ValueError):
            ProxyContext(instance_id="x", kind="annotation", text="t",
                         token_count=1, noise_ratio=(1, 2))
        with pytest.raises(ValueError):
            ProxyContext(instance_id="x", kind="noisy", text="t", token_count=1)
