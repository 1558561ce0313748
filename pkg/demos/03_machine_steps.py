"""
Driving the machine by hand
===========================

The explorer is a loop around four operations: enqueue accesses, ask which
queue positions may run, execute one, repeat. Doing it by hand shows where
store forwarding comes from.
"""

from wmlab import machine
from wmlab.relaxation import product_model

tso = product_model("TSO")

state = machine.new_machine({"v": 0})
state, write_id = machine.enqueue_write(state, 0, "v", 5)
state, read_id = machine.enqueue_read(state, 0, "v")
print("queue:", [str(a) for a in state.queue])

# Under TSO the read may overtake its own pending write...
print("allowed under TSO:", machine.allowed_positions(state, tso))
print("allowed under SC: ", machine.allowed_positions(state, product_model("SC")))

# ...and then returns the forwarded value, not the stale 0 in memory.
state = machine.execute_at(state, tso, 1)
print("read result:", state.read_results[read_id], "memory still:", dict(state.memory))

state = machine.execute_at(state, tso, 0)
print("after draining:", dict(state.memory), "quiescent:", machine.is_quiescent(state))
print("invariant violations:", machine.check_invariants(state))

# Asking for a position the model does not allow is an error, not a guess.
state = machine.new_machine({"v": 0})
state, _ = machine.enqueue_write(state, 0, "v", 1)
state, _ = machine.enqueue_read(state, 0, "v")
try:
    machine.execute_at(state, product_model("SC"), 1)
except machine.IllegalSchedule as exc:
    print("refused:", exc)
