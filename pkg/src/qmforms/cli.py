"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import random
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .altform import AltForm, format_fraction, vector
from .errors import QmFormsError, ResourceLimitError, ValidationError
from .extract import (
    DEFAULT_MAX_LETTERS,
    KSchedule,
    check_extendable,
    estimate_pair,
    extract_matrix,
    property_harness,
)
from .qm import QmSpec, estimate_defect
from .sympl import (
    Ic1Model,
    ManifoldSpec,
    commuting_obstruction,
    predicted_form,
    predicted_report,
    reznikov_trivial,
)
from .words import Word, parse_words

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE = 0, 2, 3


class Run:
    """Collects the manifest for one invocation."""

    def __init__(self, command: str):
        self.command = command
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.started = datetime.now(timezone.utc)
        self.t0 = time.perf_counter()

    def read(self, path: str) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
        self.inputs[path] = hashlib.sha256(data).hexdigest()
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ValidationError(f"{path} is not UTF-8") from exc

    def manifest(self) -> dict:
        return {
            "command": self.command,
            "input_digests": self.inputs,
            "tool_version": __version__,
            "started_at": self.started.isoformat(),
            "wall_clock_seconds": round(time.perf_counter() - self.t0, 6),
            "output_paths": self.outputs,
        }

    def emit(self, body: dict, out: str | None) -> None:
        if out:
            self.outputs.append(out)
        doc = dict(body)
        doc["manifest"] = self.manifest()
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)


def _load_json(run: Run, path: str):
    text = run.read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON: {exc}") from exc


def _schedule(args) -> KSchedule | None:
    if args.schedule:
        try:
            values = tuple(int(x) for x in args.schedule.replace(",", " ").split())
        except ValueError:
            raise ValidationError("--schedule must list integers") from None
        return KSchedule(values)
    if args.kmax is not None:
        return KSchedule.up_to(args.kmax)
    return None


def _parse_vectors(text: str) -> list[tuple]:
    text = text.strip()
    if not text:
        return []
    return [vector(part.replace(",", " ").split()) for part in text.split(";")]


def _load_form(run: Run, args) -> AltForm:
    if args.manifold:
        return predicted_form(ManifoldSpec.from_json(_load_json(run, args.manifold)))
    if not args.form:
        raise ValidationError("give --form or --manifold")
    doc = _load_json(run, args.form)
    rows = doc.get("form") if isinstance(doc, dict) else doc
    if any(x == "UNKNOWN" for r in rows or [] if isinstance(r, list) for x in r):
        raise ValidationError("form has undetermined (UNKNOWN) entries")
    return AltForm.from_json(rows)


# --- commands ----------------------------------------------------------------

def cmd_extract(args) -> int:
    run = Run("extract")
    spec = QmSpec.from_json(_load_json(run, args.spec))
    reps = parse_words(args.reps, spec.rank) if args.reps else None
    form, reports = extract_matrix(spec, reps, _schedule(args), args.max_letters, args.workers)
    body = {
        "rank": spec.rank,
        "form": form.to_json(),
        "defect_bound": format_fraction(spec.bound),
        "homog_depth": spec.homog_depth,
        "representatives": [str(w) for w in (reps or [Word.generator(i, spec.rank) for i in range(1, spec.rank + 1)])],
        "pairs": [dict(i=i + 1, j=j + 1, **r.to_json()) for (i, j), r in sorted(reports.items())],
    }
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "j", "k", "estimate", "envelope", "estimate_float", "envelope_float"])
        for (i, j), r in sorted(reports.items()):
            for (k, est), env in zip(r.estimates, r.envelope):
                writer.writerow([i + 1, j + 1, k, format_fraction(est), format_fraction(env), float(est), float(env)])
        Path(args.csv).write_text(buf.getvalue(), encoding="utf-8")
        run.outputs.append(args.csv)
    run.emit(body, args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    run = Run("predict")
    spec = ManifoldSpec.from_json(_load_json(run, args.manifold))
    run.emit(predicted_report(spec), args.out)
    return EXIT_OK


def cmd_decide(args) -> int:
    run = Run(f"decide {args.question}")
    form = _load_form(run, args)
    if args.question == "extendable":
        body = check_extendable(form, _parse_vectors(args.basis or "")).to_json()
    elif args.question == "reznikov":
        if args.ic1 not in ("zero", "nonzero"):
            raise ValidationError("reznikov needs --ic1 zero or --ic1 nonzero")
        body = reznikov_trivial(args.ic1 == "zero", form, _parse_vectors(args.basis or "")).to_json()
    else:
        if args.v is None or args.w is None:
            raise ValidationError("commute needs --v and --w")
        (v,), (w,) = _parse_vectors(args.v), _parse_vectors(args.w)
        body = commuting_obstruction(form, v, w, Ic1Model.parse(args.ic1 or "zero")).to_json()
    body["question"] = args.question
    run.emit(body, args.out)
    return EXIT_OK


def cmd_defect(args) -> int:
    run = Run("defect")
    spec = QmSpec.from_json(_load_json(run, args.spec))
    est = estimate_defect(spec, args.max_len, args.mode, args.samples, args.seed)
    body = {
        "lower_bound": format_fraction(est.lower_bound),
        "suggested_defect_bound": format_fraction(2 * est.lower_bound),
        "witness_pair": None if est.witness_pair is None else [str(w) for w in est.witness_pair],
        "search_radius": est.search_radius,
        "exhaustive": est.exhaustive,
        "pairs_examined": est.pairs_examined,
    }
    run.emit(body, args.out)
    return EXIT_OK


def cmd_harness(args) -> int:
    run = Run("harness")
    spec = QmSpec.from_json(_load_json(run, args.spec))
    report = property_harness(spec, args.trials, args.seed)
    run.emit({"passed": report.passed, "laws": report.to_json()}, args.out)
    return EXIT_OK if report.passed else 1


def cmd_selftest(args) -> int:
    """Cross-check fast paths against the brute-force oracles on random inputs."""
    from . import reference
    from .qm import BrooksTerm, eval_brooks, eval_core
    from .words import random_commutator_element, random_word

    rng = random.Random(args.seed)
    bad = 0
    for _ in range(args.trials):
        m = rng.randint(2, 3)
        core = AltForm.from_upper(m, {(i, j): rng.randint(-3, 3) for i in range(m) for j in range(i + 1, m)})
        pat = random_word(m, 3, rng, min_len=1)
        spec = QmSpec(m, core, (BrooksTerm(pat, rng.randint(-2, 2)),), rng.randint(1, 8), 0)
        w = random_commutator_element(m, 3, rng)
        g1, g2 = random_word(m, 3, rng), random_word(m, 3, rng)
        k = rng.randint(1, 4)
        areas = sum(core.entries[i][j] * reference.shoelace_area(w, i + 1, j + 1) for i in range(m) for j in range(i + 1, m))
        bad += eval_core(core, w) != areas
        bad += eval_brooks(pat, g1) != reference.naive_count(pat, g1)
        fast = estimate_pair(spec, g1, g2, KSchedule((k,))).final_estimate
        bad += fast != reference.bruteforce_pair(spec, g1, g2, k)
    print(f"selftest: {args.trials} trials, {bad} mismatches")
    return EXIT_OK if bad == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmforms",
        description="Alternating bilinear forms from invariant quasimorphisms on free groups.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("extract", help="estimate b_mu from a QmSpec via the limit formula")
    p.add_argument("--spec", required=True, help="QmSpec JSON document")
    p.add_argument("--reps", help='basis representatives, e.g. "a;b" (default: the generators)')
    p.add_argument("--kmax", type=int, help="largest k; schedule is powers of two up to it (default 1024)")
    p.add_argument("--schedule", help='explicit k values, e.g. "1,2,4,8"')
    p.add_argument("--max-letters", type=int, default=DEFAULT_MAX_LETTERS)
    p.add_argument("--workers", type=int, help="worker processes (default: $QMFORMS_WORKERS or 1)")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--csv", help="optional CSV sidecar of (i, j, k, estimate, envelope) rows")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("predict", help="closed-form b_mu_Sh for a ManifoldSpec")
    p.add_argument("--manifold", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("decide", help="extendability, Reznikov triviality or commuting obstruction")
    p.add_argument("question", choices=("extendable", "reznikov", "commute"))
    p.add_argument("--form", help="JSON matrix, or a report with a 'form' field")
    p.add_argument("--manifold", help="use the predicted form of this ManifoldSpec")
    p.add_argument("--basis", help='subspace basis, e.g. "1 0 0 0;0 0 1 0"')
    p.add_argument("--v", help="first flux vector")
    p.add_argument("--w", help="second flux vector")
    p.add_argument("--ic1", help="reznikov: zero|nonzero; commute: zero|cyclic:p/q|dense")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("defect", help="certified lower bound on the defect of a QmSpec")
    p.add_argument("--spec", required=True)
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_defect)

    p = sub.add_parser("harness", help="randomized property suite for a QmSpec")
    p.add_argument("--spec", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_harness)

    p = sub.add_parser("selftest")  # hidden: no help entry
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"qmforms: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValidationError, QmFormsError) as exc:
        print(f"qmforms: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
