"""Shipped example models and their pinned expected outputs.

Three models, one per application style:

* ``uav.mcd``: a drone sizing loop. Route planning trades velocity
  against flight time, perception and actuation power add up, a battery
  catalogue (eight technologies, six capacities, two mission counts)
  closes the mass/cost feedback loop.  Battery data carries a plus/minus
  uncertainty, so answers come back as verdicts, not just fronts.
* ``energy_meter.mcd``: a metered power link whose reading is trusted
  only to a tolerance; demonstrates uid() snapping.
* ``power_split.mcd``: a demand split across two supplies via the
  sampled relaxation of addition.

`build_uav_model(percent)` rebuilds the UAV document at any battery
uncertainty level; the shipped file is the percent=10 rendering and
`test_examples` keeps the two in sync.
"""

import json
import math
from importlib import resources

from ..modellang import elaborate, parse
from ..uncertainty import solve_uncertain

EXAMPLE_NAMES = ("uav", "energy_meter", "power_split")

# battery technology: (name, energy density Wh/kg, specific cost Wh/$,
# cycles before replacement)
BATTERY_TABLE = (
    ("NiMH", 100.0, 3.41, 500),
    ("NiH2", 45.0, 10.50, 20000),
    ("LCO", 195.0, 2.84, 750),
    ("LMO", 150.0, 2.84, 500),
    ("NiCad", 30.0, 7.50, 500),
    ("SLA", 30.0, 7.00, 500),
    ("LiPo", 150.0, 2.50, 600),
    ("LFP", 90.0, 1.50, 1500),
)
BATTERY_CAPACITIES = (10.0, 20.0, 40.0, 80.0, 160.0, 320.0)
MISSION_LEVELS = (200, 1000)


def battery_entries():
    """Catalogue rows (capacity, missions) -> (mass g, cost $).

    Mass follows energy density; cost is purchase price times the
    number of packs needed to survive the mission count.
    """
    rows = []
    for name, density, wh_per_dollar, cycles in BATTERY_TABLE:
        for cap in BATTERY_CAPACITIES:
            for missions in MISSION_LEVELS:
                mass = round(cap / density * 1000.0, 3)
                cost = round(cap / wh_per_dollar * math.ceil(missions / cycles), 2)
                rows.append((name, cap, missions, mass, cost))
    return rows


def _battery_block():
    lines = []
    for name, cap, missions, mass, cost in battery_entries():
        lines.append(
            "    (%r, %d) -> (%r, %r),  # %s" % (cap, missions, mass, cost, name)
        )
    return "\n".join(lines)


_UAV_HEADER = '''\
# Drone sizing with an uncertain battery catalogue.
#
# Functionality: endurance [h], distance [km], payload [g], missions.
# Resources: total mass [g] and total cost [$], which feed back into
# the lift requirement, closing the co-design loop.
#
# Coefficients are desk-scale placeholders, not measurements:
#   perception power   0.4 W per km/h of speed, 2 W floor
#   actuation          0.05 W and 0.005 $ per gram of lift, 1 W / 5 $ floor
#   avionics           3 W always on
#   airframe           150 g and 20 $ on top of battery and actuation
# The battery table itself (density, price, cycle life) is the part
# worth trusting; its mass and cost carry the +-{percent}% uncertainty.
'''

_UAV_BODY = '''\
model uav "drone sizing loop, battery known to +-{percent}%"

poset missions = chain {{200, 1000}}

# reorder the loop inputs for the two branches below; the fed-back
# cost does not influence any requirement, so it is dropped here
dp requirements = map F(endurance[h], distance[km], payload[g], missions:missions, mass[g], cost[$])
                    R(distance[km], payload[g], mass[g], endurance[h], missions:missions) {{
    distance = distance; payload = payload; mass = mass;
    endurance = endurance; missions = missions }}

# velocity * flight time must cover the distance
dp route = invtimes_vdc(8, 0.2, 150.0, km, km/h, h)
dp perception = map F(velocity[km/h]) R(ppcpt[W]) {{ ppcpt = 0.4 * velocity + 2.0 }}
dp idtime = identity R(flight[h])

dp loading = map F(payload[g], mass[g], endurance[h], missions:missions)
               R(lift[g], endurance[h], missions:missions) {{
    lift = payload + mass; endurance = endurance; missions = missions }}
dp actuation = affine F(lift[g]) R(pact[W], cact[$]) gain (0.05, 0.005) offset (1.0, 5.0)
dp idreq = identity R(endurance[h], missions:missions)

# battery must hold power for the longer of loiter and transit
dp power_budget = map F(ppcpt[W], flight[h], pact[W], cact[$], endurance[h], missions:missions)
                    R(ptot[W], hours[h], cact[$], missions:missions) {{
    ptot = ppcpt + pact + 3.0; hours = max(flight, endurance);
    cact = cact; missions = missions }}
dp capacity = map F(ptot[W], hours[h], cact[$], missions:missions)
                R(cap[Wh], missions:missions, cact[$]) {{
    cap = ptot * hours; missions = missions; cact = cact }}

dp battery = catalogue F(cap[Wh], missions:missions) R(mb[g], cb[$]) {{
{battery_block}
}}
uncertain ubattery = pm(battery, {percent} %)

dp idcost = identity R(cact[$])
dp assembly = map F(mb[g], cb[$], cact[$]) R(mass[g], cost[$]) {{
    mass = mb + 150.0; cost = cb + cact + 20.0 }}

term loop(series(requirements,
          series(par(series(route, par(perception, idtime)),
                     series(loading, par(actuation, idreq))),
          series(power_budget,
          series(capacity,
          series(par(ubattery, idcost), assembly))))))
'''


def uav_model_text(percent=10):
    """Model source for the drone example at a battery uncertainty level."""
    if not 0 < percent < 100:
        raise ValueError("percent must be in (0, 100), got %r" % (percent,))
    return (_UAV_HEADER + _UAV_BODY).format(
        percent=percent, battery_block=_battery_block()
    )


def build_uav_model(percent=10):
    """Parse the drone model at the given battery uncertainty level."""
    result = parse(uav_model_text(percent))
    if not result.ok:
        raise AssertionError(
            "uav template failed to parse: %s"
            % "; ".join(d.format("uav.mcd") for d in result.diagnostics)
        )
    return result.document


def example_path(name):
    """Filesystem path of a shipped .mcd model."""
    if name not in EXAMPLE_NAMES:
        raise KeyError("unknown example %r, have %s" % (name, ", ".join(EXAMPLE_NAMES)))
    return resources.files(__package__) / (name + ".mcd")


def load_example(name):
    """Parse and elaborate a shipped model; raises on any diagnostic."""
    text = example_path(name).read_text(encoding="utf-8")
    result = parse(text)
    model, diags = (None, result.diagnostics)
    if result.ok:
        model, diags = elaborate(result.document)
    if model is None:
        raise AssertionError(
            "example %s has errors: %s"
            % (name, "; ".join(d.format(name + ".mcd") for d in diags))
        )
    return model


# queries pinned under expected/; one file per (example, label)
PINNED_QUERIES = {
    "uav": (
        ("hover_short", {"endurance": 1.0, "distance": 20.0, "payload": 300.0, "missions": 200}),
        ("hover_long", {"endurance": 2.5, "distance": 20.0, "payload": 300.0, "missions": 200}),
        ("at_limit", {"endurance": 8.0, "distance": 20.0, "payload": 300.0, "missions": 200}),
        ("fleet", {"endurance": 1.0, "distance": 20.0, "payload": 300.0, "missions": 1000}),
    ),
    "energy_meter": (
        ("nominal", {"power": 3.0}),
        ("edge", {"power": 8.1}),
    ),
    "power_split": (
        ("nominal", {"demand": 6.0}),
        ("zero", {"demand": 0.0}),
    ),
}


def solve_pinned(name, query):
    model = load_example(name)
    return solve_uncertain(model.term, model.uvaluation, model.build_query(query))


def expected_json(name, label, query):
    solution = solve_pinned(name, query)
    payload = {
        "model": name + ".mcd",
        "label": label,
        "query": query,
        "solution": solution.to_json(),
    }
    return json.dumps(payload, indent=2) + "\n"


def regenerate_expected(out_dir):
    """Rewrite every pinned output; returns the file names written."""
    written = []
    for name, queries in sorted(PINNED_QUERIES.items()):
        for label, query in queries:
            path = out_dir / ("%s_%s.json" % (name, label))
            path.write_text(expected_json(name, label, query), encoding="utf-8")
            written.append(path.name)
    return written
