import argparse
import math
import time

EXPECTED_TOTAL = 0.499562
TOLERANCE = 1e-5


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seconds", type=int, default=90)
    args = ap.parse_args(argv)

    # Import and recompute the two-place composite within the time budget.
    t0 = time.time()
    from engine.services.height_bounds import global_lower_bound
    from shared.schemas import PlaceSpec

    report = global_lower_bound([PlaceSpec.real(2.0), PlaceSpec.padic(p=2, n=-1)])
    dt = time.time() - t0
    print(f"[smoke] total {report.total:.6f} in {dt:.3f}s (budget {args.seconds}s)")

    if not math.isclose(report.total, EXPECTED_TOTAL, abs_tol=TOLERANCE):
        print(f"[smoke] FAIL: expected {EXPECTED_TOTAL} ± {TOLERANCE}")
        return 1
    if dt > args.seconds:
        print("[smoke] FAIL: over time budget")
        return 1
    print("[smoke] PASS")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
