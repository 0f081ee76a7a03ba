"""Render figures from symrec CSV output.

Every number plotted comes straight from CSV cells; nothing is recomputed.
Rendering is deterministic for a fixed matplotlib version: the Agg backend,
pinned rcParams, and fixed PNG metadata make repeated runs byte-identical.

Usage:  symrec-plot {alleviation|foggy|concentration} IN.csv OUT.png
"""

from __future__ import annotations

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SCHEMA_VERSION = "1"

RCPARAMS = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "symrec",
}

PNG_METADATA = {"Software": "symrec-plots"}


class SchemaError(RuntimeError):
    pass


def _read_rows(csv_path: str, required: list[str], suite_prefix: str) -> list[dict]:
    try:
        with open(csv_path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{csv_path}: empty file (no header)")
            missing = [c for c in ["schema_version", "suite", *required]
                       if c not in reader.fieldnames]
            if missing:
                raise SchemaError(f"{csv_path}: missing columns {missing}")
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {csv_path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{csv_path}: no data rows")
    bad_ver = {r["schema_version"] for r in rows} - {SCHEMA_VERSION}
    if bad_ver:
        raise SchemaError(
            f"{csv_path}: schema_version {sorted(bad_ver)} != {SCHEMA_VERSION}"
        )
    rows = [r for r in rows if r["suite"].startswith(suite_prefix)]
    if not rows:
        raise SchemaError(f"{csv_path}: no rows for suite {suite_prefix!r}")
    return rows


def _floats(rows, col):
    out = []
    for r in rows:
        if r[col] == "":
            raise SchemaError(f"empty value in required column {col!r}")
        out.append(float(r[col]))
    return out


def render_alleviation(rows: list[dict], ax) -> None:
    rows = sorted(rows, key=lambda r: float(r["m"]))
    m = _floats(rows, "m")
    err = _floats(rows, "error")
    bound = _floats(rows, "lhs")
    ax.plot(m, err, "o-", color="#1f4e79", label="analytic recovery error")
    ax.plot(m, bound, "s--", color="#b03a2e", label="SIQ1 lower bound")
    ax.set_xlabel("coherence budget M")
    ax.set_ylabel("purified distance")
    ax.set_yscale("log")
    ax.set_title("coherence alleviation: error vs SIQ1 bound")
    ax.legend()


def render_foggy(rows: list[dict], ax) -> None:
    rows = sorted(rows, key=lambda r: (float(r["l"]), r["seed"]))
    ls = sorted({float(r["l"]) for r in rows})
    bound_per_l = []
    for l in ls:
        sub = [r for r in rows if float(r["l"]) == l]
        bound_per_l.append(float(sub[0]["lhs"]))
    ax.plot(ls, bound_per_l, "-", color="#b03a2e", lw=2,
            label="HP13 lower bound (l-independent)")
    ax.plot(_floats(rows, "l"), _floats(rows, "delta_upper"), "o",
            color="#1f4e79", label="seesaw δ upper bound")
    ctrl = [(float(r["l"]), float(r["value"])) for r in rows if r["value"] != ""]
    if ctrl:
        ax.plot([c[0] for c in ctrl], [c[1] for c in ctrl], "^",
                color="#7d8a2e", label="no-symmetry control δ")
    ref = sorted({(float(r["l"]), float(r["error"])) for r in rows if r["error"] != ""})
    if ref:
        ax.plot([c[0] for c in ref], [c[1] for c in ref], ":", color="#555555",
                label="mirror reference 2^{-(l-k)}")
    ax.set_xlabel("collected radiation qubits l")
    ax.set_ylabel("recovery error δ")
    ax.set_title("foggy mirror: flat lower bound vs decreasing control")
    ax.legend()


def render_concentration(rows: list[dict], ax) -> None:
    rows = sorted(rows, key=lambda r: float(r["t"]))
    t = _floats(rows, "t")
    emp = _floats(rows, "empirical")
    bound = _floats(rows, "rhs")
    ax.plot(t, bound, "-", color="#b03a2e", lw=2, label="sector-concentration bound")
    ax.plot(t, emp, "o-", color="#1f4e79", label="empirical exceedance")
    ax.set_xlabel("deviation threshold t")
    ax.set_ylabel("Prob[|x_A' − mean| > t]")
    ax.set_title("charge equidistribution: tails vs bound")
    ax.legend()


FIGURES = {
    "alleviation": ("example", "m", render_alleviation),
    "foggy": ("hp-foggy", "l", render_foggy),
    "concentration": ("hp-tails", "t", render_concentration),
}


def render(csv_path: str, figure: str, out_path: str) -> None:
    """Render one figure type from a symrec CSV to an image file.

    Raises SchemaError (and writes nothing) when the CSV does not carry the
    published schema or holds no rows for the figure's suite.
    """
    if figure not in FIGURES:
        raise SchemaError(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    suite, key_col, fn = FIGURES[figure]
    rows = _read_rows(csv_path, [key_col], suite)
    with plt.rc_context(RCPARAMS):
        fig, ax = plt.subplots()
        fn(rows, ax)
        fig.tight_layout()
        fig.savefig(out_path, metadata=PNG_METADATA if out_path.endswith(".png") else None)
        plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="symrec-plot", description=__doc__)
    ap.add_argument("figure", choices=sorted(FIGURES))
    ap.add_argument("csv_path")
    ap.add_argument("out_path")
    args = ap.parse_args(argv)
    try:
        render(args.csv_path, args.figure, args.out_path)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
