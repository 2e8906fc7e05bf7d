"""Walk through the two mock retrieval backends.

Builds the demo corpora on disk, ingests them, and shows cosine top-k
search over web text, image-KG lookup by embedding, and what hard-negative
interleaving does to a result page.
"""

import tempfile

from dynarag.fixtures import write_world
from dynarag.search import ImageKgIndex, WebSearchIndex, unit_embedding_for

with tempfile.TemporaryDirectory() as root:
    paths = write_world(root)

    print("== web search ==")
    web = WebSearchIndex.ingest(paths["web_corpus"])
    print(f"ingested {len(web)} docs from {paths['web_corpus'].name}")
    for hit in web.search("who founded blue bottle coffee", k=3):
        print(f"  {hit.score:+.3f}  {hit.payload.title}")

    print("\n== image-KG search ==")
    kg = ImageKgIndex.ingest(paths["kg_corpus"])
    query = unit_embedding_for("silver porsche 911 street")
    for hit in kg.search(query, k=3):
        entry = hit.payload
        print(f"  {hit.score:+.3f}  {entry.entity_name}  {dict(entry.attributes)}")

    print("\n== hard negatives ==")
    # one deliberately irrelevant page after every two real results
    noisy = WebSearchIndex.ingest(paths["web_corpus"], hard_negative_rate=0.5)
    for position, hit in enumerate(noisy.search("umbrellas and travel", k=6), start=1):
        marker = "NOISE" if hit.payload.is_hard_negative else "     "
        print(f"  #{position} {marker} {hit.payload.title}")
