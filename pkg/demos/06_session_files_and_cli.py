"""
Session files and the command line driver
=========================================

Structures are saved as canonical JSON: sorted keys, rationals as p/q
strings, one trailing newline.  The same content always serializes to
the same bytes, so whole pipelines can be verified by comparing files.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from formalexp import Connection, GradedChart
from formalexp.session import load_session, save_session

work = Path(tempfile.mkdtemp())
ch = GradedChart([("z1", 0), ("z2", 0)], nres=6, nform=4)
A = Connection(ch, {("z1", "z2", "z2"): ch.gen("z1")})
symbols = work / "symbols.json"
data = save_session(symbols, ch, christoffel=A)
print("wrote %s (%d bytes)" % (symbols.name, len(data)))


def cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "formalexp.cli"] + list(argv),
                          capture_output=True, text=True)
    if proc.stderr.strip():
        print("  %s -> %s" % (argv[0], proc.stderr.strip()))
    return proc


# complete the symbols, invert the connection, extract the symbols back
cli("hpt", str(symbols), "--out", str(work / "conn.json"))
cli("f-from-g", str(work / "conn.json"), "--out", str(work / "fexp.json"))
cli("extract-connection", str(work / "fexp.json"), "--out", str(work / "back.json"))

# the pipeline reproduces its input file byte for byte
print("round trip byte-equal:", (work / "back.json").read_bytes() == data)

# the direct integrator writes the identical map session
cli("geodesic-oracle", str(symbols), "--out", str(work / "oracle.json"))
same = (work / "oracle.json").read_bytes() == (work / "fexp.json").read_bytes()
print("oracle file matches the homological route:", same)

# sessions load back through the ordinary constructors
sess = load_session(work / "fexp.json")
print("loaded pullback of z1:", sess["fexp"].pullbacks["z1"].to_str())
