"""Command-line front end: dimension tables, verification grids, element export.

Exit codes: 0 all checks pass, 1 usage error, 2 at least one falsification,
3 output I/O error.  Reports are byte-deterministic for a fixed configuration
(including the seed); wall-clock timings go to stderr only.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import spaces
from .conformity import Patch, build_patch, conformity_check, green_identity_check
from .elements import FAMILIES, build_element, check_unisolvence, element_to_json, trace_block_rank
from .poly import Polynomial, grad, koszul_dot_x, koszul_xxT, divdiv, div, multiply, monomials
from .report import CheckResult
from .simplex import SimplexFrame, random_frame, reference_simplex

DEFAULT_MAX_K = 6
ELEMENT_FAMILIES = tuple(FAMILIES)
PSEUDO_FAMILIES = ("decomp", "green", "ops")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; usage is 1 here
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    v = int(text)
    return v, v


def _max_k_cap() -> int:
    raw = os.environ.get("FEMFORGE_MAX_K")
    if raw is None:
        return DEFAULT_MAX_K
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_MAX_K


def _load_frame_file(path: str) -> SimplexFrame:
    """Simplex description: {"d": int, "vertices": [["num/den" | number, ...], ...]}."""
    with open(path) as fh:
        data = json.load(fh)
    verts = [[Fraction(str(x)) for x in v] for v in data["vertices"]]
    fr = SimplexFrame(verts)
    if fr.d != int(data["d"]):
        raise ValueError(f"simplex file declares d={data['d']} but has {fr.d}+1 coordinates")
    return fr


def _make_frame(d: int, mode: str, seed: int, key: str) -> tuple[SimplexFrame, dict]:
    if mode == "ref":
        return reference_simplex(d), {"simplex": "ref"}
    if mode != "random":  # a path to a JSON simplex description
        fr = _load_frame_file(mode)
        if fr.d != d:
            raise ValueError(f"simplex file has d={fr.d}, grid cell wants d={d}")
        return fr, {"simplex": mode}
    rng = random.Random(f"{seed}:{key}")
    fr = random_frame(d, rng)
    verts = [[f"{x.numerator}/{x.denominator}" for x in v] for v in fr.vertices]
    return fr, {"simplex": "random", "seed": seed, "vertices": verts}


def _reflected_patch(frame: SimplexFrame) -> Patch:
    """Glue the simplex to its apex reflection across the face opposite it."""
    d = frame.d
    apex = frame.vertices[d]
    g = frame.grad_lambda[d]
    gg = sum(a * a for a in g)
    lam = frame.lambdas[d].evaluate(apex)  # = 1
    mirrored = tuple(x - 2 * lam * gi / gg for x, gi in zip(apex, g))
    return build_patch(list(frame.vertices[:d]), apex, mirrored)


# -- check runners -----------------------------------------------------------------


def _cell_checks_element(family: str, d: int, k: int, mode: str, seed: int):
    out = []
    frame, sinfo = _make_frame(d, mode, seed, f"{family}:{d}:{k}")
    elem = build_element(frame, family, k)
    stability_floor = FAMILIES[family].stability_floor
    if stability_floor is not None:
        sinfo = dict(sinfo, stability_range=bool(k >= stability_floor(d)))
    for res in (check_unisolvence(elem), trace_block_rank(elem)):
        res.context.update(sinfo)
        res.check_id = f"{res.check_id}-{family}"
        out.append((family, d, k, res))
    res = conformity_check(_reflected_patch(frame), family, k)
    res.context.update(sinfo)
    out.append((family, d, k, res))
    return out


def _cell_checks_decomp(d: int, k: int, mode: str, seed: int):
    frame, sinfo = _make_frame(d, mode, seed, f"decomp:{d}:{k}")
    out = []
    for res in spaces.certify_decompositions(frame, k):
        res.context.update(sinfo)
        out.append(("decomp", d, k, res))
    return out


def _cell_checks_green(d: int, k: int, mode: str, seed: int):
    frame, sinfo = _make_frame(d, mode, seed, f"green:{d}:{k}")
    res = green_identity_check(frame, k, k, samples=20, seed=seed + 17 * d + k)
    res.context.update(sinfo)
    return [("green", d, k, res)]


def _random_homogeneous(rng, d: int, r: int) -> Polynomial:
    terms = {}
    for exps in monomials(d, r):
        if sum(exps) == r:
            c = rng.randint(-9, 9)
            if c:
                terms[(0, exps)] = Fraction(c)
    if not terms:
        terms[(0, (r,) + (0,) * (d - 1))] = Fraction(1)
    return Polynomial(d, "scalar", terms)


def _cell_checks_ops(d: int, r: int, seed: int):
    rng = random.Random(f"{seed}:ops:{d}:{r}")
    q = _random_homogeneous(rng, d, r)
    euler_grad = koszul_dot_x(grad(q)) == q.scale(r)
    xq = Polynomial.vector_from([multiply(Polynomial.coordinate(d, t), q) for t in range(d)])
    euler_div = div(xq) == q.scale(r + d)
    dd = divdiv(koszul_xxT(q)) == q.scale((r + 1 + d) * (r + d))
    ctx = {"d": d, "degree": r}
    return [
        ("ops", d, r, CheckResult("euler-position-gradient", euler_grad, context=dict(ctx))),
        ("ops", d, r, CheckResult("euler-divergence-position", euler_div, context=dict(ctx))),
        ("ops", d, r, CheckResult("divdiv-koszul-eigenvalue", dd, context=dict(ctx))),
    ]


def _dims_checks(d: int, k: int):
    frame = reference_simplex(d)
    out = []

    def add(check_id, got, expected):
        out.append(
            ("dims", d, k, CheckResult(check_id, got == expected, expected=expected, got=got,
                                       context={"d": d, "k": k}))
        )

    add("dim-bubble-vector", spaces.bubble_space(frame, "div_vector", k).dim,
        spaces.dim_bubble_vector(d, k))
    e0, e0perp = spaces.split_bubble(frame, "div_vector", k)
    add("dim-kernel-bubble-vector", e0.dim, spaces.dim_E0_vector(d, k))
    add("dim-complement-bubble-vector", e0perp.dim, spaces.dim_E0perp_vector(d, k))
    add("dim-trace-vector",
        spaces.trace_matrix(frame, spaces.build_standard(frame, "P_vector", k), "div_vector").rank(),
        spaces.dim_trace_vector(d, k))
    add("dim-bubble-enriched-vector", spaces.bubble_space(frame, "div_RT_minus", k).dim,
        spaces.dim_bubble_rt(d, k))
    add("dim-edge-space", spaces.build_standard(frame, "ND", k).dim, spaces.dim_ND(d, k))
    if k >= 2:
        add("dim-bubble-sym", spaces.bubble_space(frame, "div_sym", k).dim,
            spaces.dim_bubble_sym(d, k))
        add("dim-bubble-sym-generators", spaces.bubble_sym_generators(frame, k).dim,
            spaces.dim_bubble_sym(d, k))
        s0, s0perp = spaces.split_bubble(frame, "div_sym", k)
        add("dim-kernel-bubble-sym", s0.dim, spaces.dim_E0_sym(d, k))
        add("dim-complement-bubble-sym", s0perp.dim, spaces.dim_E0perp_sym(d, k))
        add("dim-trace-sym",
            spaces.trace_matrix(frame, spaces.build_standard(frame, "P_sym", k), "div_sym").rank(),
            spaces.dim_trace_sym(d, k))
        if d == 3:
            add("dim-boundary-total-3d", spaces.dim_trace_sym(3, k), 6 * (k + 1) ** 2)
    return out


# -- report assembly -----------------------------------------------------------------


def _entry(family, d, k, res: CheckResult) -> dict:
    data = res.as_dict()
    data["family"] = family
    data["d"] = d
    data["k"] = k
    return data


def _render_json(config: dict, entries: list[dict]) -> str:
    n_pass = sum(1 for e in entries if e["status"] == "pass")
    n_fail = sum(1 for e in entries if e["status"] == "fail")
    n_skip = sum(1 for e in entries if e["status"] == "skip")
    doc = {
        "schema": "femforge-report/1",
        "config": config,
        "checks": entries,
        "summary": {"pass": n_pass, "fail": n_fail, "skip": n_skip},
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _render_markdown(config: dict, entries: list[dict]) -> str:
    lines = ["# femforge verification report", ""]
    lines.append("config: `" + json.dumps(config, sort_keys=True) + "`")
    lines.append("")
    lines.append("| check | family | d | k | status | expected | got |")
    lines.append("|---|---|---|---|---|---|---|")
    for e in entries:
        exp = json.dumps(e.get("expected", "")) if "expected" in e else ""
        got = json.dumps(e.get("got", "")) if "got" in e else ""
        lines.append(
            f"| {e['id']} | {e['family']} | {e['d']} | {e['k']} | {e['status']} | {exp} | {got} |"
        )
    n_pass = sum(1 for e in entries if e["status"] == "pass")
    n_fail = sum(1 for e in entries if e["status"] == "fail")
    n_skip = sum(1 for e in entries if e["status"] == "skip")
    lines.append("")
    lines.append(f"summary: {n_pass} pass, {n_fail} fail, {n_skip} skip")
    lines.append("")
    return "\n".join(lines)


def _emit(text: str, out_path: str | None) -> int:
    if out_path is None:
        sys.stdout.write(text)
        return 0
    try:
        with open(out_path, "w") as fh:
            fh.write(text)
    except OSError as err:
        print(f"femforge: cannot write {out_path}: {err}", file=sys.stderr)
        return 3
    return 0


# -- subcommands ------------------------------------------------------------------------


def _cmd_dims(args) -> int:
    d_lo, d_hi = args.d
    k_lo, k_hi = args.k
    tasks = [(d, k) for d in range(d_lo, d_hi + 1) for k in range(k_lo, k_hi + 1)]
    results = []
    t0 = time.monotonic()
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            for chunk in pool.map(lambda dk: _dims_checks(*dk), tasks):
                results.extend(chunk)
    else:
        for d, k in tasks:
            results.extend(_dims_checks(d, k))
    print(f"dims grid of {len(tasks)} cells in {time.monotonic() - t0:.1f}s", file=sys.stderr)
    entries = [_entry(*r) for r in results]
    config = {"command": "dims", "d": list(args.d), "k": list(args.k)}
    text = _render_json(config, entries) if args.format == "json" else _render_markdown(config, entries)
    code = _emit(text, args.out)
    if code:
        return code
    return 0 if all(e["status"] == "pass" for e in entries) else 2


def _run_family_grid(args, families):
    d_lo, d_hi = args.d
    k_lo, k_hi = args.k
    entries = []
    tasks = []
    runnable = {fam: 0 for fam in families}
    for fam in families:
        for d in range(d_lo, d_hi + 1):
            for k in range(k_lo, k_hi + 1):
                if fam in FAMILIES:
                    floor = FAMILIES[fam].floor(d)
                    if k < floor:
                        entries.append(
                            {
                                "id": f"unisolvence-{fam}",
                                "family": fam,
                                "d": d,
                                "k": k,
                                "status": "skip",
                                "context": {"reason": f"below degree floor {floor}"},
                            }
                        )
                        continue
                    runnable[fam] += 1
                    tasks.append(("elem", fam, d, k))
                elif fam == "decomp":
                    if k < 1:
                        continue
                    runnable[fam] += 1
                    tasks.append(("decomp", fam, d, k))
                elif fam == "green":
                    runnable[fam] += 1
                    tasks.append(("green", fam, d, k))
                elif fam == "ops":
                    runnable[fam] += 1
                    tasks.append(("ops", fam, d, k))
    return entries, tasks, runnable


def _run_task(task, args):
    kind, fam, d, k = task
    if kind == "elem":
        return _cell_checks_element(fam, d, k, args.simplex, args.seed)
    if kind == "decomp":
        return _cell_checks_decomp(d, k, args.simplex, args.seed)
    if kind == "green":
        return _cell_checks_green(d, k, args.simplex, args.seed)
    return _cell_checks_ops(d, k, args.seed)


def _cmd_verify(args) -> int:
    families = args.family or list(ELEMENT_FAMILIES) + list(PSEUDO_FAMILIES)
    for fam in families:
        if fam not in ELEMENT_FAMILIES and fam not in PSEUDO_FAMILIES:
            print(f"femforge: unknown family {fam!r}", file=sys.stderr)
            return 1
    skip_entries, tasks, runnable = _run_family_grid(args, families)
    empty = [fam for fam, n in runnable.items() if n == 0]
    if empty:
        print(
            f"femforge: no runnable (d, k) cells for: {', '.join(empty)} "
            "(below the family degree floor?)",
            file=sys.stderr,
        )
        return 1
    t0 = time.monotonic()
    results = []
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            for chunk in pool.map(lambda t: _run_task(t, args), tasks):
                results.extend(chunk)
    else:
        for task in tasks:
            results.extend(_run_task(task, args))
    print(f"verify grid of {len(tasks)} cells in {time.monotonic() - t0:.1f}s", file=sys.stderr)
    entries = skip_entries + [_entry(*r) for r in results]
    entries.sort(key=lambda e: (e["family"], e["d"], e["k"], e["id"]))
    config = {
        "command": "verify",
        "families": sorted(families),
        "d": list(args.d),
        "k": list(args.k),
        "simplex": args.simplex,
        "seed": args.seed,
    }
    text = _render_json(config, entries) if args.format == "json" else _render_markdown(config, entries)
    code = _emit(text, args.out)
    if code:
        return code
    return 0 if not any(e["status"] == "fail" for e in entries) else 2


def _cmd_export(args) -> int:
    families = args.family or ["BDM"]
    d_lo, d_hi = args.d
    k_lo, k_hi = args.k
    outdir = args.out or "."
    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as err:
        print(f"femforge: cannot create {outdir}: {err}", file=sys.stderr)
        return 3
    for fam in families:
        if fam not in ELEMENT_FAMILIES:
            print(f"femforge: unknown element family {fam!r}", file=sys.stderr)
            return 1
    for fam in families:
        for d in range(d_lo, d_hi + 1):
            floor = FAMILIES[fam].floor(d)
            for k in range(k_lo, k_hi + 1):
                if k < floor:
                    print(f"femforge: skip {fam} d={d} k={k} (floor {floor})", file=sys.stderr)
                    continue
                frame, _ = _make_frame(d, args.simplex, args.seed, f"export:{fam}:{d}:{k}")
                elem = build_element(frame, fam, k)
                if not check_unisolvence(elem).passed:
                    print(f"femforge: {fam} d={d} k={k} failed unisolvence", file=sys.stderr)
                    return 2
                data = element_to_json(elem)
                path = os.path.join(outdir, f"{fam}_d{d}_k{k}.json")
                try:
                    with open(path, "w") as fh:
                        json.dump(data, fh, sort_keys=True, indent=1)
                        fh.write("\n")
                except OSError as err:
                    print(f"femforge: cannot write {path}: {err}", file=sys.stderr)
                    return 3
                print(f"wrote {path}", file=sys.stderr)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="femforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_d="2..3", default_k="1..4"):
        p.add_argument("--family", action="append", help="repeatable; defaults to all")
        p.add_argument("--d", type=_parse_range, default=_parse_range(default_d),
                       help="dimension or range a..b (supported: 2..4)")
        p.add_argument("--k", type=_parse_range, default=_parse_range(default_k),
                       help="degree or range a..b")
        p.add_argument(
            "--simplex", default="ref",
            help="'ref', 'random', or a path to a JSON simplex description",
        )
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "markdown"), default="json")
        p.add_argument("--jobs", type=int, default=1)

    p_dims = sub.add_parser("dims", help="dimension formulas vs computed ranks")
    common(p_dims)
    p_ver = sub.add_parser("verify", help="run the verification suites over a grid")
    common(p_ver)
    p_exp = sub.add_parser("export", help="export elements as JSON")
    common(p_exp, default_k="1..1")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    d_lo, d_hi = args.d
    k_lo, k_hi = args.k
    if not (2 <= d_lo <= d_hi <= 4):
        parser.error("dimension range must lie within 2..4")
    cap = _max_k_cap()
    if k_lo > k_hi or k_hi > cap:
        parser.error(f"degree range must be increasing and capped at {cap} (FEMFORGE_MAX_K)")
    if args.simplex not in ("ref", "random"):
        try:
            fr = _load_frame_file(args.simplex)
        except (OSError, ValueError, KeyError) as err:
            parser.error(f"cannot read simplex file {args.simplex}: {err}")
        if (d_lo, d_hi) != (fr.d, fr.d):
            parser.error(f"simplex file has d={fr.d}; pass --d {fr.d}..{fr.d}")
    if args.command == "dims":
        return _cmd_dims(args)
    if args.command == "verify":
        return _cmd_verify(args)
    return _cmd_export(args)


if __name__ == "__main__":
    sys.exit(main())
