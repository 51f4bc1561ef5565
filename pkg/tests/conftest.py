import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (title, [(passed, case, seconds, note)]); filled by
# test_acceptance.criterion() and printed once at the end of the run
ACCEPTANCE: dict[int, tuple[str, list]] = {}


def acceptance_lines() -> list[str]:
    out = []
    for k in sorted(ACCEPTANCE):
        title, cases = ACCEPTANCE[k]
        ok = all(c[0] for c in cases)
        total = sum(c[2] for c in cases)
        out.append(f"criterion {k} {'PASS' if ok else 'FAIL'}  {title}  "
                   f"[{len(cases)} case(s), {total:.2f} s]")
        for passed, case, secs, note in cases:
            if len(cases) > 1 or not passed:
                out.append(f"    {'ok  ' if passed else 'FAIL'} {case} {secs:.2f} s{note}")
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines():
            terminalreporter.write_line(line)
