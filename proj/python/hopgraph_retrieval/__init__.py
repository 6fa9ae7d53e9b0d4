"""Logic-aware passage retrieval over a question-linked passage graph.

The package indexes a corpus by asking a chat model to pose questions each
passage can answer or would naturally ask, links passages whose questions
match, and answers queries by walking that graph outward from the best
matching edges before pruning the visited set down to a context.

Quick start::

    import hopgraph_retrieval as hr

    chat = hr.CallbackChat(my_llm_function)
    graph, report = hr.build(corpus, chat=chat)
    hr.save(graph, "corpus.pgar")
    result = hr.retrieve("who founded the observatory?", graph, top_k=4, n_hop=3)
    for passage in result["context"]:
        print(passage["id"], passage["helpfulness"])
"""

import json as _json

from ._core import (
    CachingEmbedder,
    CallbackChat,
    ChatClient,
    Embedder,
    EchoChat,
    EngineError,
    Graph,
    HashEmbedder,
    KeywordExtractor,
    OpenAiChatClient,
    OpenAiEmbedder,
    RuleKeywordExtractor,
    ScriptedChat,
    answer_f1,
    build,
    cosine,
    edge_budget,
    exact_match,
    extend,
    hybrid_sim,
    jaccard,
    load,
    load_corpus,
    normalize_answer,
    retrieval_prf,
    save,
)
from ._core import evaluate_json as _evaluate_json
from ._core import retrieve as _retrieve

__version__ = "0.1.0"


def retrieve(*args, **kwargs):
    """Retrieve passages for a query; see :func:`_core.retrieve`.

    Returns a dict with ``context`` (ranked passages with helpfulness,
    query similarity, and visit counts), ``llm_calls``, ``warnings``, and a
    parsed ``trace`` describing seeds, hop rounds, and the pruned set.
    """
    result = _retrieve(*args, **kwargs)
    result["trace"] = _json.loads(result.pop("trace_json"))
    return result


def evaluate(*args, **kwargs):
    """Score retrieval (and optional answer generation) over a dataset.

    Accepts a list of ``{question, answers, supporting_ids}`` dicts plus the
    graph and traversal settings; returns the report as a dict with
    ``params``, ``aggregates``, and per-example rows.
    """
    return _json.loads(_evaluate_json(*args, **kwargs))


__all__ = [
    "CachingEmbedder",
    "CallbackChat",
    "ChatClient",
    "EchoChat",
    "Embedder",
    "EngineError",
    "Graph",
    "HashEmbedder",
    "KeywordExtractor",
    "OpenAiChatClient",
    "OpenAiEmbedder",
    "RuleKeywordExtractor",
    "ScriptedChat",
    "answer_f1",
    "build",
    "cosine",
    "edge_budget",
    "evaluate",
    "exact_match",
    "extend",
    "hybrid_sim",
    "jaccard",
    "load",
    "load_corpus",
    "normalize_answer",
    "retrieval_prf",
    "retrieve",
    "save",
]
