"""Drive the whole engine through one visitor pass under virtual time.

Run from the repository root:  python3 demos/run_simulation.py
Equivalent CLI:
  towerloop simulate --scenario data/scenarios/full_workflow.json \
      --catalog data/scenario_catalog.json --seed 7
"""

from pathlib import Path

from towerloop import EngineConfig, load_catalog, load_scenario, run_scenario

ROOT = Path(__file__).resolve().parent.parent

catalog = load_catalog(ROOT / "data/scenario_catalog.json")
script = load_scenario(ROOT / "data/scenarios/full_workflow.json")
report = run_scenario(script, EngineConfig(), catalog, seed=7)

print("phase transitions:")
for phase, at in report.transitions:
    print(f"  {at:>6} ms  {phase}")

print("\nprotocol traffic (first visitor only):")
for msg in report.messages:
    if msg["at"] > 8000:
        break
    arrow = "->" if msg["dir"] == "c2s" else "<-"
    print(f"  {msg['at']:>6} ms  {msg['role']:<7} {arrow} {msg['type']}")

pushes = [t for t in report.tower_timeline if t.get("revealed_page_id")]
print(f"\ntower pushes: {len(pushes)}; final tower (bottom first): {report.final_tower}")
print(f"violations: {report.violations or 'none'}")
print("\nsame script + same seed = byte-identical report, every time:")
again = run_scenario(script, EngineConfig(), catalog, seed=7)
print(f"  reports identical: {report.to_json() == again.to_json()}")
