"""Driving the live session service over its wire protocol.

The same newline-delimited JSON flows whether the client is this script, the
browser panel, or the simulator; here a scripted operator hovers long enough
to commit a selection and the service answers with selection, command and
panel-state messages.
"""

import asyncio
import json

from graspbench import PanelLayout, SuiteConfig, generate_suite
from graspbench.server import GraspService, ServiceConfig
from graspbench.session import SessionConfig

LAYOUT = PanelLayout()


async def scenario():
    # a single 24-slot set cannot hit the +/-10% balance integer-exactly;
    # loosen the tolerance for this one-set demo
    suite = generate_suite(SuiteConfig(n_sets=1, seed=3, balance_tolerance=0.5))
    service = GraspService(ServiceConfig(base=SessionConfig(), suite=suite))
    host, port = await service.start("127.0.0.1", 0)
    print(f"service listening on {host}:{port}")

    reader, writer = await asyncio.open_connection(host, port)

    async def send(msg):
        writer.write((json.dumps(msg) + "\n").encode())
        await writer.drain()
        print("->", msg)

    async def recv():
        msg = json.loads(await reader.readline())
        print("<-", msg)
        return msg

    await send({"type": "hello", "gsi": "i-gsi", "subject": "demo", "set_index": 1})
    await recv()  # hello ack with the effective config echo
    await recv()  # initial panel state
    await send({"type": "phase", "t": 0, "phase": "Operation"})
    trial = await recv()  # trial open names the target object
    await recv()
    target = trial["target"]["grasp"]
    print(f"\n   hovering on the {target} icon for 250 ms...\n")
    from graspbench.domain import parse_grasp

    cx, cy = LAYOUT.icon_center(parse_grasp(target))
    t, got_selection = 100, False
    while t <= 350:
        await send({"type": "gaze", "t": t, "x": cx, "y": cy, "valid": True})
        msg = await recv()  # selection / command / panel_state
        while msg["type"] != "panel_state":
            got_selection = got_selection or msg["type"] == "selection"
            msg = await recv()
        if got_selection:
            break
        t += 20
    await send({"type": "phase", "t": 600, "phase": "Standby"})
    await recv()  # trial close (the anchor slot is unscored)
    await recv()
    writer.close()
    await service.stop()
    print("\nselection committed and mirrored to the command sink" if got_selection else "no selection?!")


asyncio.run(scenario())
