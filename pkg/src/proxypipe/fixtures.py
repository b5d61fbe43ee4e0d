"""Deterministic demo corpus and scripted endpoint behavior for tests/smoke.

Everything here is seeded so the smoke pipeline produces the exact record
counts frozen in EXPECTED_SMOKE: per instance the scripted endpoint emits a
fixed mixture of correct, incorrect, and marker-less generations keyed by
the instance index modulo 4.
"""

from __future__ import annotations

import random

from .corpus import ArticleMeta, Corpus, Document, QaInstance

_ADJECTIVES = [
    "crimson", "orbital", "glacial", "coastal", "volcanic", "arid", "boreal",
    "lunar", "tidal", "alpine", "austral", "equatorial", "polar", "riparian",
    "seismic", "thermal", "umbral", "vernal", "zonal", "meridian",
]
_TARGETS = [
    "neutrino flux", "ozone plume", "magnetar pulse", "aerosol layer",
    "methane seep", "auroral arc", "ion cascade", "plasma sheet",
    "graviton echo", "radon bloom", "cosmic shear", "solar prominence",
    "dust corridor", "ice lens", "muon shower", "tremor swarm",
    "cloud vortex", "salinity front", "heat dome", "spore drift",
]
_ANSWERS = [
    "silver quadrant", "cobalt spectrograph", "amber interferometer",
    "jade magnetometer", "onyx bolometer", "ivory gravimeter",
    "copper radiometer", "quartz seismograph", "indigo polarimeter",
    "scarlet altimeter", "violet nephoscope", "bronze anemometer",
    "teal hygrometer", "maroon photometer", "ochre refractometer",
    "pearl actinometer", "slate pyranometer", "coral variometer",
    "lilac scintillator", "umber telemeter",
]
_FILLER_WORDS = (
    "survey station relay archive basin ridge sensor module beacon careful "
    "signal record terrain sample drift reading annual crew maintenance "
    "log weather panel uplink rotation schedule depot circuit valley calibration"
).split()

N_INSTANCES = 20
N_FILLERS = 160
TARGET_TOKENS = 7000

WRONG_ANSWER = "broken compass"
MARKERLESS_TEXT = ("The context mentions several stations but the relevant "
                   "reading is ambiguous, so nothing conclusive emerges.")

EXPECTED_SMOKE = {
    "instances": 20,
    "bundles": 20,
    "proxies": 20,
    "retained_traces": 20,
    "rejects": 5,
    "extraction_failures": 10,
    "sft_records": 20,
    "em_mean": 50.0,
    "f1_mean": 50.0,
}


def _sentence(rng: random.Random, n_words: int = 14) -> str:
    words = [rng.choice(_FILLER_WORDS) for _ in range(n_words)]
    return " ".join(words).capitalize() + "."


def build_demo_corpus(n_instances: int = N_INSTANCES, seed: int = 13) -> Corpus:
    rng = random.Random(seed)
    docs: dict[str, Document] = {}

    filler_ids = [f"F{i:03d}" for i in range(N_FILLERS)]
    for fid in filler_ids:
        body = tuple(_sentence(rng) for _ in range(12))
        links = tuple(rng.sample([f for f in filler_ids if f != fid], 4))
        docs[fid] = Document(id=fid, title=f"Field report {fid}", body=body,
                             links=links)

    instances = []
    for i in range(n_instances):
        adj = _ADJECTIVES[i]
        target = _TARGETS[i]
        answer = _ANSWERS[i]
        ea, eb = f"E{i:02d}a", f"E{i:02d}b"
        body_a = (
            _sentence(rng),
            f"The {adj} observatory {i} used the {answer} to detect the {target}.",
            _sentence(rng),
            f"Operations at the {adj} observatory {i} began after the spring refit.",
            _sentence(rng),
        )
        body_b = (
            _sentence(rng),
            _sentence(rng),
            f"Detection of the {target} was confirmed by the {answer} readings.",
            _sentence(rng),
        )
        docs[ea] = Document(id=ea, title=f"Observatory dossier {i}A",
                            body=body_a,
                            links=tuple(rng.sample(filler_ids, 14)))
        docs[eb] = Document(id=eb, title=f"Observatory dossier {i}B",
                            body=body_b,
                            links=tuple(rng.sample(filler_ids, 14)))
        metadata = (
            ArticleMeta(
                title=f"Observations of the {target}",
                authors=("Maria Chen", "Paul Novak"),
                n_references=9 + i,
            ),
            ArticleMeta(
                title=f"Instrument notes from the {adj} site",
                authors=("Ines Duarte",),
                n_references=5 + i,
                cites=(f"Observations of the {target}",),
            ),
        )
        instances.append(QaInstance(
            id=f"q{i:02d}",
            question=(f"Which instrument did the {adj} observatory {i} "
                      f"use to detect the {target}?"),
            answers=(answer,),
            supporting=((ea, 1), (ea, 3), (eb, 2)),
            seed_docs=(ea, eb),
            metadata=metadata,
        ))
    return Corpus(documents=docs, instances=instances)


def _correct_generation(answer: str) -> str:
    return ("We locate the observatory dossier in the context and read off "
            "the instrument that made the detection. The evidence names it "
            f"directly.\nFinal Answer: {answer}")


def _wrong_generation() -> str:
    return ("The dossier seems to describe a different site, so the "
            f"instrument must be the fallback unit.\nFinal Answer: {WRONG_ANSWER}")


def smoke_script(corpus: Corpus) -> dict[str, list[str]]:
    """Question-keyed generations: index % 4 selects the mixture pattern."""
    script = {}
    for idx, inst in enumerate(corpus.instances):
        answer = inst.answers[0]
        pattern = idx % 4
        if pattern == 0:
            gens = [_correct_generation(answer), _wrong_generation(),
                    _correct_generation(answer)]
        elif pattern == 1:
            gens = [_wrong_generation(), _correct_generation(answer),
                    MARKERLESS_TEXT]
        elif pattern == 2:
            gens = [_wrong_generation(), _wrong_generation(),
                    _wrong_generation()]
        else:
            gens = [_correct_generation(answer), MARKERLESS_TEXT,
                    _wrong_generation()]
        script[inst.question] = gens
    return script


def smoke_predictions(corpus: Corpus) -> dict[str, str]:
    """First scripted generation per instance, used as evaluation input."""
    script = smoke_script(corpus)
    return {inst.id: script[inst.question][0] for inst in corpus.instances}
