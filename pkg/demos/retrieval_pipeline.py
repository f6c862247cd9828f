"""BM25 retrieval plus listwise reranking on an in-memory corpus.

Runs without any model access: the reranker gets a ScriptedBackend that
always answers with a fixed permutation string, which is enough to show
the sliding-window mechanics and the reply repair.
"""

from raarg.corpus import EvidenceDocument, Qrels
from raarg.gateway import ScriptedBackend
from raarg.retrieval import (
    BM25Params,
    bm25_search,
    build_index,
    ndcg_at_k,
    parse_permutation,
    precision_at_k,
    rerank_listwise,
)

DOCS = [
    EvidenceDocument("d1", "Rooftop solar panels cut household electricity bills."),
    EvidenceDocument("d2", "Wind turbines complement solar output on cloudy days."),
    EvidenceDocument("d3", "Battery storage smooths evening solar supply gaps."),
    EvidenceDocument("d4", "Coal plants remain the dominant source in some grids."),
    EvidenceDocument("d5", "Solar farm land use competes with agriculture."),
]


def main():
    index = build_index(DOCS, BM25Params(k1=1.2, b=0.75))
    query = "solar electricity supply"
    ranked = bm25_search(index, query, k=5, topic_id="demo")
    print(f"query: {query!r}")
    for rank, (doc_id, score) in enumerate(ranked.items, start=1):
        print(f"  {rank}. {doc_id}  {score:.4f}")

    qrels = Qrels(entries={("demo", "d1"): 1, ("demo", "d3"): 1, ("demo", "d4"): 0})
    print(f"P@3  = {precision_at_k(ranked, qrels, 3):.4f}")
    print(f"nDCG@3 = {ndcg_at_k(ranked, qrels, 3):.4f}")

    # A reranker that always reverses whatever window it is shown.
    def reverse_window(request):
        n = request.user_text.count("Document ")
        return " > ".join(f"[{i}]" for i in range(n, 0, -1))

    backend = ScriptedBackend(reverse_window)
    documents = {d.doc_id: d for d in DOCS}
    reranked = rerank_listwise(
        backend, query, ranked, documents, window=3, stride=2
    )
    print("after listwise rerank (window=3, stride=2):", ", ".join(reranked.doc_ids))

    # Malformed replies never crash the pipeline; they are repaired into
    # a full permutation.
    for reply in ("[2] > [2] > [5]", "sorry, no ranking today"):
        print(f"repair {reply!r} for n=5 ->", parse_permutation(reply, 5))


if __name__ == "__main__":
    main()
