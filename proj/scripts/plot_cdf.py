#!/usr/bin/env python3
"""Plot the CDF tables emitted by `steerdns simulate`."""
import argparse
import json

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("results", help="simulate output JSON")
    ap.add_argument("--metric", default="best_choice_ratio",
                    choices=["best_choice_ratio", "expected_gain_abs_ms", "expected_gain_rel"])
    ap.add_argument("-o", "--output", default="cdf.png")
    args = ap.parse_args()

    with open(args.results) as f:
        cdf = json.load(f)["cdf"]

    categories = sorted(cdf.keys())
    fig, axes = plt.subplots(1, max(len(categories), 1), figsize=(5 * len(categories), 4),
                             sharey=True, squeeze=False)
    for ax, category in zip(axes[0], categories):
        for method, metrics in sorted(cdf[category].items()):
            steps = metrics.get(args.metric, [])
            if not steps:
                continue
            xs = [v for v, _ in steps]
            ys = [c for _, c in steps]
            ax.step(xs, ys, where="post", label=method)
        ax.set_title(category)
        ax.set_xlabel(args.metric)
        ax.grid(alpha=0.3)
        ax.legend()
    axes[0][0].set_ylabel("cumulative fraction of pairs")
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
