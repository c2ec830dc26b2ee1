import pytest

from hill import parse_potential

FREE = {"kind": "constant", "value": 0}
CONST5 = {"kind": "constant", "value": 5}
KP = {"kind": "piecewise-constant", "breakpoints": [0, 0.5, 1], "values": [4, 0]}
MATHIEU = {"kind": "fourier-cosine", "coefficients": [0, 2]}
CORPUS = {"constant 5": CONST5, "kronig-penney": KP, "mathieu": MATHIEU}


@pytest.fixture(scope="session")
def free():
    return parse_potential(FREE)


@pytest.fixture(scope="session")
def const5():
    return parse_potential(CONST5)


@pytest.fixture(scope="session")
def kp():
    return parse_potential(KP)


@pytest.fixture(scope="session")
def mathieu():
    return parse_potential(MATHIEU)


@pytest.fixture(scope="session", params=list(CORPUS))
def corpus_potential(request):
    return parse_potential(CORPUS[request.param])


# acceptance verdicts: criterion -> list of (label, passed, detail); label "literal" decides the line
ACCEPTANCE: dict[int, list] = {}


@pytest.fixture
def record():
    def _record(criterion, label, passed, detail=""):
        ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        entries = ACCEPTANCE[n]
        literal = [e for e in entries if e[0] == "literal"]
        verdict = all(e[1] for e in literal) if literal else all(e[1] for e in entries)
        extras = "; ".join(f"{lab}: {'pass' if ok else 'fail'}{' (' + det + ')' if det else ''}"
                           for lab, ok, det in entries)
        tr.write_line(f"criterion {n}: {'PASS' if verdict else 'FAIL'}  [{extras}]")
