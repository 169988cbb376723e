"""Event streams 101: build, serialize, slice.

An event camera reports per-pixel brightness changes as (x, y, t, p)
tuples instead of frames. This demo builds a tiny stream by hand, writes
it to the CSV interchange format, reads it back, and slices a time
window out of it.
"""
import numpy as np

from evanom.events import (EventStream, parse_event_csv, slice_time,
                           write_event_csv)

# --- build a stream ------------------------------------------------------
# Five events on a 4x3 sensor. Timestamps are integer microseconds and
# must be non-decreasing; polarity is +1 (brighter) or -1 (darker).
stream = EventStream.from_arrays(
    width=4, height=3,
    x=[0, 1, 3, 2, 1],
    y=[0, 2, 1, 1, 0],
    t=[100, 250, 250, 900, 1500],
    p=[1, -1, 1, 1, -1])

print("stream:", len(stream), "events on a",
      f"{stream.width}x{stream.height} sensor")
print("timestamps:", stream.t)
print("polarities:", stream.p)

# --- CSV round trip ------------------------------------------------------
csv_text = write_event_csv(stream)
print("\nCSV form:")
print(csv_text)

back = parse_event_csv(csv_text, stream.width, stream.height)
assert back == stream
print("parse(write(stream)) == stream:", back == stream)

# --- slicing -------------------------------------------------------------
# Windows are half-open [t0, t1): the event at t=250 is included, the
# one at t=900 is not.
window = slice_time(stream, 200, 900)
print("\nslice [200, 900) has", len(window), "events at t =", window.t)

# Simultaneous timestamps are legal and their file order is preserved.
assert np.all(np.diff(stream.t) >= 0)
print("timestamps are non-decreasing; ties keep file order")
