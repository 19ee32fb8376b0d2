"""Test harness executed inside a scratch directory.

Loads a filled source file, calls the task function once per row of the CSV
test suite and writes one result line per row:

  student mode: checked:<value> | exception:<type>: <message> | timeout | error:<tag>
  teacher mode: <value>, or the student-mode failure forms on failure

If the source cannot be loaded, the only line written is
``load-error:<first diagnostic line>``. Values use the engine's canonical
rendering. Only the standard library is used.
"""

import argparse
import csv
import decimal
import json
import math
import os
import signal
import sys

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1


class TestTimeout(BaseException):
    pass


class Mismatch(Exception):
    pass


def first_line(text):
    lines = str(text).splitlines()
    return lines[0] if lines else ""


def describe(exc):
    if isinstance(exc, SyntaxError):
        where = " (line %s)" % exc.lineno if exc.lineno else ""
        return "%s: %s%s" % (type(exc).__name__, first_line(exc.msg), where)
    msg = first_line(exc)
    return "%s: %s" % (type(exc).__name__, msg) if msg else type(exc).__name__


def clean(text):
    # A result is a single line no matter what the learner raised.
    return "".join(" " if c in "\r\n" else c for c in text)


def render_float(x):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(decimal.Decimal(repr(x)), "f")
    if "." not in s:
        s += ".0"
    return s


def render_str(s):
    s.encode("utf-8")
    out = ['"']
    for c in s:
        if c == '"':
            out.append('\\"')
        elif c == "\\":
            out.append("\\\\")
        elif c == "\n":
            out.append("\\n")
        elif c == "\r":
            out.append("\\r")
        elif c == "\t":
            out.append("\\t")
        else:
            out.append(c)
    out.append('"')
    return "".join(out)


def render(value, ty):
    if ty == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise Mismatch("type-mismatch: expected int, got %s" % type(value).__name__)
        if not INT_MIN <= value <= INT_MAX:
            raise Mismatch("int-out-of-range")
        return str(value)
    if ty == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise Mismatch("type-mismatch: expected float, got %s" % type(value).__name__)
        try:
            return render_float(float(value))
        except OverflowError:
            raise Mismatch("float-out-of-range")
    if ty == "bool":
        if not isinstance(value, bool):
            raise Mismatch("type-mismatch: expected bool, got %s" % type(value).__name__)
        return "true" if value else "false"
    if ty == "str":
        if not isinstance(value, str):
            raise Mismatch("type-mismatch: expected str, got %s" % type(value).__name__)
        try:
            return render_str(value)
        except UnicodeError:
            raise Mismatch("invalid-unicode")
    raise ValueError("unknown type %r" % ty)


def parse_cell(text, ty):
    if ty == "int":
        return int(text)
    if ty == "float":
        return float(text)
    if ty == "bool":
        if text == "true":
            return True
        if text == "false":
            return False
        raise ValueError("bad bool %r" % text)
    if ty == "str":
        return text
    raise ValueError("unknown type %r" % ty)


def read_rows(path, types):
    csv.field_size_limit(1 << 24)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for raw in csv.reader(fh):
            if not raw and len(types) == 1:
                raw = [""]
            if len(raw) != len(types):
                raise ValueError("row %d has %d columns, expected %d" % (len(rows), len(raw), len(types)))
            rows.append([parse_cell(c, t) for c, t in zip(raw, types)])
    return rows


def on_alarm(signum, frame):
    raise TestTimeout()


def arm(seconds):
    # Keep firing until disarmed so a bare `except:` cannot swallow it for good.
    signal.setitimer(signal.ITIMER_REAL, seconds, 0.05)


def disarm():
    signal.setitimer(signal.ITIMER_REAL, 0)


def load(source_path, name, per_test_time):
    with open(source_path, encoding="utf-8") as fh:
        source = fh.read()
    namespace = {"__name__": "__submission__", "__builtins__": __builtins__}
    try:
        code = compile(source, os.path.basename(source_path), "exec")
        arm(per_test_time)
        try:
            exec(code, namespace)
        finally:
            disarm()
    except TestTimeout:
        return None, "timeout while loading"
    except BaseException as exc:
        return None, describe(exc)
    fn = namespace.get(name)
    if not callable(fn):
        return None, "NameError: function '%s' is not defined" % name
    return fn, None


def run_one(fn, args, return_type, per_test_time):
    try:
        arm(per_test_time)
        try:
            result = fn(*args)
        finally:
            disarm()
    except TestTimeout:
        return "timeout", None
    except RecursionError as exc:
        return "exception", describe(exc)
    except Exception as exc:
        return "exception", describe(exc)
    except BaseException as exc:
        return "error", describe(exc)
    try:
        return "checked", render(result, return_type)
    except Mismatch as exc:
        return "error", str(exc)


def main(argv=None):
    parser = argparse.ArgumentParser()
    parser.add_argument("--source", required=True)
    parser.add_argument("--spec", required=True)
    parser.add_argument("--csv", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--mode", choices=("student", "teacher"), required=True)
    parser.add_argument("--per-test-time", type=float, default=1.0)
    opts = parser.parse_args(argv)

    diag = os.fdopen(os.dup(2), "w")
    try:
        with open(opts.spec, encoding="utf-8") as fh:
            spec = json.load(fh)
        name = spec["name"]
        types = [a["type"] for a in spec["args"]]
        return_type = spec["return"]
        rows = read_rows(opts.csv, types)
    except Exception as exc:
        diag.write("harness: %s\n" % describe(exc))
        diag.flush()
        return 1

    # Learner output goes nowhere, at both the Python and the descriptor level.
    devnull = os.open(os.devnull, os.O_WRONLY)
    os.dup2(devnull, 1)
    os.dup2(devnull, 2)
    sys.stdout = open(os.devnull, "w")
    sys.stderr = open(os.devnull, "w")
    signal.signal(signal.SIGALRM, on_alarm)

    out = open(opts.out, "w", encoding="utf-8", newline="\n")
    fn, problem = load(opts.source, name, opts.per_test_time)
    if fn is None:
        out.write("load-error:%s\n" % clean(problem))
        out.close()
        return 0

    for args in rows:
        verdict, value = run_one(fn, args, return_type, opts.per_test_time)
        if verdict == "checked":
            line = value if opts.mode == "teacher" else "checked:" + value
        elif verdict == "timeout":
            line = "timeout"
        else:
            line = "%s:%s" % (verdict, clean(value))
        out.write(line + "\n")
        out.flush()
    out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
