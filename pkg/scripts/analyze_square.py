"""End-to-end analysis of the square model for an elliptic first-order
symbol, printed as a compact report.

Usage: python scripts/analyze_square.py [s_order]
"""

import sys

from symstrat.analysis import AnalysisConfig, run_analysis


def main():
    s_order = float(sys.argv[1]) if len(sys.argv) > 1 else 0.5
    cfg = AnalysisConfig(symbol_text="(1+abs2(k))^(1/2)", alpha=1.0,
                         model="square", s_order=s_order)
    manifest = run_analysis(cfg)
    ell = manifest.stages["ellipticity"]
    print(f"symbol   : {cfg.symbol_text}  (order {cfg.alpha})")
    print(f"elliptic : {ell['elliptic']}  c1={ell['c1']:.4f} c2={ell['c2']:.4f}")
    verdict = manifest.stages["fredholm"]
    print(f"s = {s_order}: fredholm = {verdict['fredholm']}")
    for stratum in verdict["per_stratum"]:
        lo, hi = stratum["ae_range"]
        print(f"  {stratum['stratum']:<10} k={stratum['k']} "
              f"index in [{lo:.3f}, {hi:.3f}] margin {stratum['margin']:+.3f} "
              f"{'ok' if stratum['condition_met'] else 'VIOLATED'}")
    return 0 if manifest.ok else 2


if __name__ == "__main__":
    sys.exit(main())
