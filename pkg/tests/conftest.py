import pytest

from proxypipe.corpus import ArticleMeta, Corpus, Document, QaInstance, TokenCounter


@pytest.fixture
def counter():
    return TokenCounter(mode="whitespace")


@pytest.fixture
def tiny_corpus():
    """Two evidence docs, two fillers, one instance; links form a chain."""
    docs = {
        "a": Document(id="a", title="Alpha",
                      body=("The red probe measured the storm.",
                            "It was launched in spring."),
                      links=("c",)),
        "b": Document(id="b", title="Beta",
                      body=("The storm lasted nine days.",),
                      links=("d",)),
        "c": Document(id="c", title="Gamma",
                      body=("Fillers describe the valley at length.",
                            "Nothing here answers anything."),
                      links=("d",)),
        "d": Document(id="d", title="Delta",
                      body=("More filler text sits in this article.",)),
    }
    inst = QaInstance(
        id="i1",
        question="What did the red probe measure?",
        answers=("the storm",),
        supporting=(("a", 0), ("b", 0)),
        seed_docs=("a", "b"),
        metadata=(
            ArticleMeta(title="Alpha", authors=("A. One", "B. Two"),
                        n_references=3),
            ArticleMeta(title="Beta", authors=("C. Three",), n_references=1,
                        cites=("Alpha",)),
        ),
    )
    return Corpus(documents=docs, instances=[inst])
