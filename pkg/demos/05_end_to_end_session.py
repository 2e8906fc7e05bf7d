"""Full pipeline runs: one turn per branch, a 3-turn dialogue, and a deadline
breach - all on simulated time against the scripted mock stack.
"""

from dynarag.fixtures import build_world_runtime
from dynarag.orchestrator import QueryTurn
from dynarag.timing import SimulatedClock

runtime = build_world_runtime()


def show(session_id, questions_images):
    orchestrator = runtime.orchestrator(clock=SimulatedClock())
    turns = [
        QueryTurn(session_id, i, q, img, deadline_s=10.0)
        for i, (q, img) in enumerate(questions_images)
    ]
    for turn, (answer, trace) in zip(turns, orchestrator.run_session(turns)):
        print(f"\n[{session_id}:{turn.turn_index}] {turn.question}")
        print(f"  branch:  {trace.route.branch.value}")
        print(f"  stages:  {' -> '.join(trace.stages)}")
        if trace.entity_name:
            print(f"  entity:  {trace.entity_name}")
        print(f"  answer:  {answer}"
              + ("   (fallback)" if trace.answer.fallback else ""))
        print(f"  elapsed: {trace.elapsed_s:.2f}s simulated")


print("==== direct output ====")
show("umbrella-q1", [("What is written on these umbrellas?", "img-umbrella")])

print("\n==== verify the draft against evidence ====")
show("car-q1", [("In which year did the car on the right begin production?",
                 "img-car-pair")])

print("\n==== full retrieval augmentation ====")
show("cafe-q1", [("Who founded this cafe?", "img-cafe")])

print("\n==== 3-turn dialogue with entity carry-over ====")
show("dialog-1", [
    ("What kind of car is this?", "img-car-street"),
    ("When did it begin production?", "img-car-street"),
    ("Who designed it?", "img-car-street"),
])

print("\n==== deadline breach (20s scripted stage, 10s budget) ====")
show("deadline-q1", [("Who founded this cafe?", "img-cafe")])
