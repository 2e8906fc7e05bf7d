"""Prompt templates and the in-context example packs keyed by domain.

Template bodies use ``{slot}`` placeholders. The sentinel strings matter:
downstream parsers key on the numbered-step prefix, the "I cannot determine"
marker, the reason/answer labels, the "**Response:**" verdict line and the
tool-decision JSON, so they must stay in sync with the extractors.
"""

from __future__ import annotations

from .gateway import ModelGateway

CANNOT_DETERMINE = "I cannot determine the"
IDK = "I don't know"

EVALUATOR = """You are a visual assistant. Answer the user's question about the image from what you can see plus your own knowledge.

Reason step by step, in at most 5 concise numbered steps, one sentence each. Stop as soon as you can answer or once you know the necessary information is missing.

Rules:
1. Name the exact object the question is about (model, species, brand, dish) whenever you can; fall back to text visible in the image.
2. Use one step per object or relationship, then summarize.
3. If the needed information is not recoverable from the image or question, state exactly: "I cannot determine the <what> that the query is about."
4. Do not tell the user to consult external sources.
5. Always begin with: 1. The exact name of the object that the query "{query}" is about is <name>.

Domain: {domain}
{examples}
Conversation so far:
{history}

Question: {query}

Finish with one JSON line: {"reasoning": "<summary>", "answer": "<draft answer>"}"""

OBJECT_LIST = """You are an object-detection assistant. List up to {object_num} major distinct objects visible in the image that are relevant to the question: "{query}".

Only tangible, visible items. No abstract concepts, no actions. Use general category words of at most 3 words each ("car", not "BMW"; "clothing brand", not "ZARA"). If unsure of the identity, use the closest general category.

Reply with exactly one JSON line: {"object_list": ["<name>", ...]}"""

OBJECT_SELECT = """From the detected objects {object_list}, pick the single object the question "{query}" is about. If the question carries position words, prefer objects at or near that position. If several instances of the same object exist, add a short distinguishing attribute to the name.

Reply with exactly one JSON line: {"object": "<name>"}"""

TOOL_ROUTER = """You are an action selector. Given the question "{query}", the prior reasoning, and the image, decide which retrieval tools must run first.

Available tools:
- image_search: retrieve visually similar items to identify an object whose specific name is still unknown.
- text_search: fetch web facts about an object whose identity is already known.

Decide as follows:
1. Is the object's specific identity (proper noun, model, species) already known from the reasoning? Yes: need_image_search=false. No: need_image_search=true.
2. Does the question need information not visible in the image (specifications, history, statistics, price)? Yes: need_text_search=true. No: need_text_search=false.
3. For self-contained analytical tasks such as math, physics calculations or language translation, set both flags to false.
4. If the object is a "book", a "logo-bearing packaged goods", or a "plant", set need_image_search to false.

Prior reasoning:
{reasoning}

Output exactly one sentence of rationale, then one JSON line:
Decision logic: <one sentence>
Tool calling decision: {"need_image_search": <true/false>, "need_text_search": <true/false>}"""

DECOMPOSE = """Rewrite the question "{query}" as a list of clear, self-contained web search sub-queries. Break multi-hop questions into one sub-query per inference step, and replace vague referents using the reasoning and the visual context below.

Reasoning steps:
{reasoning}

Visual context: {visual_context}
Conversation so far:
{history}

Reply with exactly one JSON line: {"sub_queries": [{"text": "<sub-query>", "step": <reasoning step index or null>}, ...]}"""

POST_ANSWER = """You are a helpful assistant who truthfully answers questions about the provided image. If you are not sure, say 'I don't know'.

Use the image, the evidence below and your own knowledge. Respond in two labelled parts:
reason: 2-3 sentences citing the information that leads to the answer; 'I don't know' if unsure.
answer: one concise sentence naming the object explicitly (never 'this', 'that' or 'it'); if the reason is 'I don't know', the answer must also be 'I don't know'.

Evidence:
{evidence}

Conversation so far:
{history}

Question: {question}"""

VERIFIER = """You evaluate whether the agent's answer to an image question is reasonable given the evidence.

Guidelines:
1. Unsupported answer (not backed by image or evidence) -> Incorrect Answer.
2. Contradicted by evidence -> Incorrect Answer.
3. Unclear or incomplete answer -> Incorrect Answer.
4. Fully supported answer -> Correct Answer.

Respond as:
**Reason:** <1-2 sentences>
**Response:** Correct Answer | Incorrect Answer

Question: {question}
Evidence: {evidence}
Answer: {answer}"""

ENTITY_VERIFY = """Is the retrieved entity "{entity}" visually present in the image and consistent with the object the question "{query}" is about?

Reply with exactly one JSON line: {"match": <true/false>, "score": <0..1>}"""

DOMAIN_CLASSIFY = """Classify the question "{query}" about the image into exactly one domain from: {taxonomy}.

Reply with exactly one JSON line: {"domain": "<name>", "confidence": <0..1>}"""


# Small per-domain in-context packs for the evaluator; "other" is the default.
DOMAIN_EXAMPLES: dict[str, str] = {
    "vehicles": (
        "Example:\n"
        "Q: What engine does this car have?\n"
        "1. The exact name of the object that the query \"What engine does this car have?\" is about is Mazda MX-5 ND.\n"
        "2. The ND generation ships with a 2.0L Skyactiv-G engine.\n"
        "{\"reasoning\": \"Identified the car, recalled its engine.\", \"answer\": \"A 2.0L Skyactiv-G engine.\"}\n"
    ),
    "food": (
        "Example:\n"
        "Q: What dish is this?\n"
        "1. The exact name of the object that the query \"What dish is this?\" is about is shakshuka.\n"
        "2. Poached eggs in spiced tomato sauce are characteristic of shakshuka.\n"
        "{\"reasoning\": \"Recognized the dish from the sauce and eggs.\", \"answer\": \"Shakshuka.\"}\n"
    ),
    "math": (
        "Example:\n"
        "Q: What is 12 times 8?\n"
        "1. The exact name of the object that the query \"What is 12 times 8?\" is about is an arithmetic expression.\n"
        "2. 12 times 8 equals 96.\n"
        "{\"reasoning\": \"Direct multiplication.\", \"answer\": \"96\"}\n"
    ),
    "other": "",
}

RERANK_INSTRUCTION = (
    "Judge how useful the passage is for answering the question; "
    "score 1 for directly answering evidence, 0 for unrelated text."
)


def examples_for_domain(domain: str) -> str:
    return DOMAIN_EXAMPLES.get(domain, DOMAIN_EXAMPLES["other"])


def register_all(gateway: ModelGateway) -> None:
    """Register every pipeline template on a fresh gateway."""
    gateway.register_template(
        "evaluator", EVALUATOR, {"query", "domain", "examples", "history"},
        requires_image=True,
    )
    gateway.register_template(
        "object_list", OBJECT_LIST, {"query", "object_num"}, requires_image=True
    )
    gateway.register_template(
        "object_select", OBJECT_SELECT, {"query", "object_list"}, requires_image=True
    )
    gateway.register_template("tool_router", TOOL_ROUTER, {"query", "reasoning"})
    gateway.register_template(
        "decompose", DECOMPOSE, {"query", "reasoning", "visual_context", "history"}
    )
    gateway.register_template(
        "post_answer", POST_ANSWER, {"question", "evidence", "history"},
        requires_image=True,
    )
    gateway.register_template(
        "verifier", VERIFIER, {"question", "evidence", "answer"}, requires_image=True
    )
    gateway.register_template(
        "entity_verify", ENTITY_VERIFY, {"entity", "query"}, requires_image=True
    )
    gateway.register_template("domain_classify", DOMAIN_CLASSIFY, {"query", "taxonomy"})
