"""Per-turn pipeline execution under deadlines, and multi-turn sessions.

A turn flows pre-answer -> search router -> branch chain:

  direct_output : nothing else; the draft answer ships as-is.
  search_verify : text toolchain -> rerank -> dual verification of the draft.
  rag_augment   : tool router -> visual toolchain (if image search is on) ->
                  text toolchain -> rerank -> generation -> dual verification.

Every stage draws on one shared TimeBudget; a breach anywhere converts the
turn into an "I don't know" fallback without ever propagating the timeout.
Stage wall-time is read from the orchestrator clock, so tests run on
simulated time while production uses the monotonic clock.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field

from .config import PipelineConfig
from .errors import BackendTimeout, DeadlineExceeded
from .gateway import ModelGateway
from .image_agent import ImageSearchAgent
from .postanswer import (
    FALLBACK_ANSWER,
    PostAnswerModule,
    TokenStats,
    Verdict,
    VerifiedAnswer,
    finalize,
    white_box_verify,
)
from .preanswer import FeatureFlags, PreAnswerModule, ReasoningTrace
from .prompts import RERANK_INSTRUCTION
from .reranker import AssembledContext, rerank
from .routing import Branch, RouteDecision, ToolDecision, route_search, route_tools
from .search import SearchHit
from .encoders import MultiVectorQueryEncoder
from .text_agent import TextSearchAgent
from .timing import MonotonicClock, TimeBudget

logger = logging.getLogger(__name__)

# Markers a trace carries when a turn never ran its full chain.
STAGE_DEADLINE_FALLBACK = "deadline_fallback"
STAGE_BUDGET_FALLBACK = "budget_fallback"

_PRIOR_TURN_MARKERS = ("previous turn", "earlier turn", "previous answer",
                       "prior turn", "the conversation")


@dataclass(frozen=True)
class QueryTurn:
    session_id: str
    turn_index: int
    question: str
    image_ref: str | None
    deadline_s: float

    def __post_init__(self):
        if self.turn_index < 0:
            raise ValueError("turn_index must be non-negative")

    @property
    def fixture_key(self) -> str:
        return f"{self.session_id}:{self.turn_index}"


@dataclass
class SessionState:
    session_id: str
    total_budget_s: float
    elapsed_s: float = 0.0
    history: list[tuple[str, str]] = field(default_factory=list)
    last_entity: str | None = None

    def remaining(self) -> float:
        return self.total_budget_s - self.elapsed_s

    def record(self, question: str, final_answer: str, elapsed: float,
               entity: str | None) -> None:
        self.history.append((question, final_answer))
        self.elapsed_s = min(self.total_budget_s, self.elapsed_s + elapsed)
        if entity:
            self.last_entity = entity

    def history_text(self) -> str:
        return "\n".join(f"Q: {q}\nA: {a}" for q, a in self.history)


@dataclass
class PipelineTrace:
    route: RouteDecision
    tools: ToolDecision | None
    evidence: AssembledContext | None
    answer: VerifiedAnswer
    stage_timings: dict[str, float]
    entity_name: str | None = None
    elapsed_s: float = 0.0

    @property
    def stages(self) -> list[str]:
        return list(self.stage_timings)


def _fallback_answer(reason: str) -> VerifiedAnswer:
    return VerifiedAnswer(
        reason=reason,
        answer=FALLBACK_ANSWER,
        stats=TokenStats(1.0, 1.0, 1),
        white_box_pass=False,
        model_verdict=Verdict.INCORRECT,
        final_answer=FALLBACK_ANSWER,
        fallback=True,
    )


def _fallback_route(rationale: str) -> RouteDecision:
    return RouteDecision(Branch.DIRECT_OUTPUT, rationale, FeatureFlags())


class Orchestrator:
    """Wires the modules together and runs turns/sessions.

    One orchestrator serves one session at a time when running on a
    simulated clock; distinct sessions get their own instance (the harness
    does exactly that), while all heavy dependencies are shared read-only.
    """

    def __init__(
        self,
        gateway: ModelGateway,
        pre_answer: PreAnswerModule,
        image_agent: ImageSearchAgent,
        text_agent: TextSearchAgent,
        post_answer: PostAnswerModule,
        query_encoder: MultiVectorQueryEncoder,
        config: PipelineConfig,
        clock=None,
    ):
        self.gateway = gateway
        self.pre_answer = pre_answer
        self.image_agent = image_agent
        self.text_agent = text_agent
        self.post_answer = post_answer
        self.query_encoder = query_encoder
        self.config = config
        self.clock = clock if clock is not None else MonotonicClock()

    # -- single turn -----------------------------------------------------------

    def answer_turn(self, turn: QueryTurn, session: SessionState) -> tuple[str, PipelineTrace]:
        start = self.clock.now()
        if session.remaining() <= 0:
            trace = PipelineTrace(
                route=_fallback_route("session budget exhausted before the turn"),
                tools=None,
                evidence=None,
                answer=_fallback_answer("session budget exhausted"),
                stage_timings={STAGE_BUDGET_FALLBACK: 0.0},
            )
            return FALLBACK_ANSWER, trace

        deadline_s = min(turn.deadline_s, session.remaining())
        budget = TimeBudget(self.clock, deadline_at=start + deadline_s)
        timings: dict[str, float] = {}

        @contextmanager
        def stage(name: str):
            budget.check()
            t0 = self.clock.now()
            try:
                yield
            finally:
                timings[name] = self.clock.now() - t0

        history = session.history_text()
        key = turn.fixture_key
        route: RouteDecision | None = None
        tools: ToolDecision | None = None
        evidence: AssembledContext | None = None
        entity_name: str | None = None

        try:
            with stage("pre_answer"):
                domain = self.pre_answer.classify_domain(turn.question, turn.image_ref)
                trace = self.pre_answer.dcot_preanswer(
                    turn.question, turn.image_ref, domain, key, history, budget
                )
            with stage("route_search"):
                route = route_search(trace)

            if route.branch is Branch.DIRECT_OUTPUT:
                answer = self._direct_answer(trace)
            elif route.branch is Branch.SEARCH_VERIFY:
                answer, evidence = self._run_verify(turn, session, trace, stage, budget)
            else:
                answer, evidence, tools, entity_name = self._run_rag(
                    turn, session, trace, stage, budget
                )
        except (BackendTimeout, DeadlineExceeded) as exc:
            logger.info("turn %s fell back: %s", key, exc)
            answer = _fallback_answer(f"deadline exceeded: {exc}")
            timings[STAGE_DEADLINE_FALLBACK] = 0.0
            if route is None:
                route = _fallback_route("deadline exceeded before routing")

        trace_out = PipelineTrace(
            route=route,
            tools=tools,
            evidence=evidence,
            answer=answer,
            stage_timings=timings,
            entity_name=entity_name,
            elapsed_s=self.clock.now() - start,
        )
        return answer.final_answer, trace_out

    def _direct_answer(self, trace: ReasoningTrace) -> VerifiedAnswer:
        stats = TokenStats.from_probs(trace.token_probs or (1.0,))
        return VerifiedAnswer(
            reason=" ".join(trace.steps),
            answer=trace.draft_answer,
            stats=stats,
            white_box_pass=True,
            model_verdict=Verdict.CORRECT,
            final_answer=trace.draft_answer,
            fallback=False,
        )

    def _run_verify(self, turn, session, trace, stage, budget):
        cfg = self.config
        with stage("text_search"):
            visual_context = self._visual_context(None, trace, session)
            subqueries = self.text_agent.rephrase_and_split(
                turn.question, trace, visual_context,
                turn.fixture_key, session.history_text(), budget,
            )
            hits = self.text_agent.text_search(subqueries)
        evidence = self._rerank_stage(turn, hits, stage)
        with stage("verify"):
            stats = TokenStats.from_probs(trace.token_probs or (1.0,))
            passed = white_box_verify(stats, cfg.verifier)
            draft_blob = "\n".join(trace.steps + [trace.draft_answer])
            verdict = self.post_answer.model_verify(
                turn.question, turn.image_ref, evidence.text, draft_blob,
                turn.fixture_key, budget,
            )
            answer = finalize(
                " ".join(trace.steps), trace.draft_answer, stats, passed, verdict
            )
        return answer, evidence

    def _run_rag(self, turn, session, trace, stage, budget):
        cfg = self.config
        with stage("route_tools"):
            tools = route_tools(turn.question, trace, turn.image_ref, cfg.routing)
            tools = self._apply_session_image_rule(tools, trace, session)

        hits: list[SearchHit] = []
        entity = None
        if tools.need_image_search:
            with stage("image_search"):
                image_hits, entity = self.image_agent.ground(
                    turn.image_ref, turn.question,
                    cfg.agents.object_num, cfg.agents.k_per_query,
                    turn.fixture_key, budget,
                )
                hits.extend(image_hits)

        if tools.need_text_search:
            with stage("text_search"):
                visual_context = self._visual_context(entity, trace, session)
                subqueries = self.text_agent.rephrase_and_split(
                    turn.question, trace, visual_context,
                    turn.fixture_key, session.history_text(), budget,
                )
                if entity is not None:
                    subqueries.append(
                        self.text_agent.fuse_object(turn.question, entity)
                    )
                hits.extend(self.text_agent.text_search(subqueries))

        evidence = self._rerank_stage(turn, hits, stage)
        with stage("generate"):
            reason, answer_text, stats = self.post_answer.generate_answer(
                turn.question, turn.image_ref, evidence.text,
                turn.fixture_key, session.history_text(), budget,
            )
        with stage("verify"):
            answer = self.post_answer.verify_and_finalize(
                turn.question, turn.image_ref, evidence.text,
                reason, answer_text, stats, turn.fixture_key, budget,
            )
        return answer, evidence, tools, (entity.entity_name if entity else None)

    def _rerank_stage(self, turn, hits, stage) -> AssembledContext:
        with stage("rerank"):
            image_embedding = self.image_agent.image_store.embedding(turn.image_ref) \
                if turn.image_ref else None
            return rerank(
                turn.question,
                image_embedding,
                hits,
                self.config.rerank,
                self.query_encoder,
                self.image_agent.text_encoder,
                RERANK_INSTRUCTION,
            )

    @staticmethod
    def _visual_context(entity, trace: ReasoningTrace,
                        session: SessionState) -> str | None:
        """Best available referent for pronoun resolution: this turn's
        verified entity, a specific name from the trace, or the entity
        carried over from earlier turns."""
        if entity is not None:
            return entity.entity_name
        if trace.object_name and trace.flags.is_named_object:
            return trace.object_name
        return session.last_entity

    @staticmethod
    def _apply_session_image_rule(tools: ToolDecision, trace: ReasoningTrace,
                                  session: SessionState) -> ToolDecision:
        """Later turns skip image search when the trace points at the dialogue
        rather than at a (new) visual object."""
        if not session.history or not tools.need_image_search:
            return tools
        lowered = trace.raw_text.lower()
        refers_back = any(m in lowered for m in _PRIOR_TURN_MARKERS)
        if refers_back or trace.object_name is None:
            return ToolDecision(
                False, tools.need_text_search,
                tools.rationale + "; image search disabled because the turn "
                "refers back to the dialogue, not to a new object",
            )
        return tools

    # -- sessions ----------------------------------------------------------------

    def run_session(self, turns: list[QueryTurn]) -> list[tuple[str, PipelineTrace]]:
        if not turns:
            return []
        session_ids = {t.session_id for t in turns}
        if len(session_ids) != 1:
            raise ValueError("all turns must share one session_id")
        indices = [t.turn_index for t in turns]
        if indices != list(range(len(turns))):
            raise ValueError("turn indices must be contiguous from 0")

        session = SessionState(
            session_id=turns[0].session_id,
            total_budget_s=self.config.limits.session_budget_s,
        )
        results = []
        for turn in turns:
            final_answer, trace = self.answer_turn(turn, session)
            session.record(turn.question, final_answer, trace.elapsed_s,
                           trace.entity_name)
            results.append((final_answer, trace))
        return results


def trace_to_dict(trace: PipelineTrace) -> dict:
    """JSON-serializable view of a pipeline trace."""
    answer = trace.answer
    return {
        "route": {
            "branch": trace.route.branch.value,
            "rationale": trace.route.rationale,
            "features": dict(vars(trace.route.features)),
        },
        "tools": None if trace.tools is None else {
            "need_image_search": trace.tools.need_image_search,
            "need_text_search": trace.tools.need_text_search,
            "rationale": trace.tools.rationale,
        },
        "evidence": None if trace.evidence is None else {
            "text": trace.evidence.text,
            "chunks": [
                {
                    "chunk_id": chunk.chunk_id,
                    "coarse": score.coarse,
                    "fine": score.fine,
                    "cumulative": score.cumulative,
                }
                for chunk, score in trace.evidence.chunks
            ],
        },
        "answer": {
            "reason": answer.reason,
            "answer": answer.answer,
            "final_answer": answer.final_answer,
            "white_box_pass": answer.white_box_pass,
            "model_verdict": answer.model_verdict.value,
            "fallback": answer.fallback,
            "stats": {
                "s_min": answer.stats.s_min,
                "s_mean": answer.stats.s_mean,
                "count": answer.stats.count,
            },
        },
        "stage_timings": dict(trace.stage_timings),
        "stages": trace.stages,
        "entity_name": trace.entity_name,
        "elapsed_s": trace.elapsed_s,
    }


def expected_stages(trace: PipelineTrace) -> list[str] | None:
    """The stage chain the trace's branch should have executed, or None for
    fallback traces (they legitimately stop early)."""
    if STAGE_BUDGET_FALLBACK in trace.stage_timings or \
            STAGE_DEADLINE_FALLBACK in trace.stage_timings:
        return None
    branch = trace.route.branch
    if branch is Branch.DIRECT_OUTPUT:
        return ["pre_answer", "route_search"]
    if branch is Branch.SEARCH_VERIFY:
        return ["pre_answer", "route_search", "text_search", "rerank", "verify"]
    chain = ["pre_answer", "route_search", "route_tools"]
    if trace.tools and trace.tools.need_image_search:
        chain.append("image_search")
    if trace.tools and trace.tools.need_text_search:
        chain.append("text_search")
    return chain + ["rerank", "generate", "verify"]
