"""proxypipe: data pipeline for long-context QA with short proxy contexts.

Builds full long contexts from a linked document corpus, constructs compact
proxy contexts (annotation, metadata, retrieval, random, noisy), acquires
correctness-filtered reasoning traces from an OpenAI-compatible endpoint,
assembles grounding-swap SFT records, and evaluates predictions with EM/F1
or a model-as-judge protocol.
"""

__version__ = "0.1.0"
