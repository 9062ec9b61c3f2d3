"""Collects acceptance outcomes so the session summary can print one line per criterion."""

RESULTS: dict[int, list[tuple[str, bool, str]]] = {}


def record(criterion: int, label: str, ok: bool, detail: str = "") -> bool:
    RESULTS.setdefault(criterion, []).append((label, bool(ok), detail))
    print(f"criterion {criterion} [{label}]: {'PASS' if ok else 'FAIL'} {detail}")
    return bool(ok)


def lines() -> list[str]:
    out = []
    for k in sorted(RESULTS):
        parts = RESULTS[k]
        ok = all(p[1] for p in parts)
        failed = [p[0] for p in parts if not p[1]]
        note = f" (failed: {', '.join(failed)})" if failed else ""
        out.append(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {len(parts)} checks{note}")
    return out
