"""
End to end on W-tricked primes
==============================

A greedy 3-AP-free set of prime positions, embedded in Z_M. Its
progression count is all trivial (d = 0), since M > 2N' rules out
wrap-around, and the majorant's delta is estimated by point sampling.
"""

from relsz.pipeline import run_pipeline

for N in (2000, 4000, 8000):
    rep = run_pipeline(N, 3, {"seed": 0})
    print(f"N'={N}  |B|={len(rep.B)}  alpha={rep.alpha:.4f}  delta~{rep.delta_report.delta:.4f}  "
          f"ap={rep.ap_value:.3e}  d=0 part={rep.trivial_part:.3e}  audit={rep.audit}")
    print("   bound sides:", {k: rep.bound_comparisons[k] for k in ("lhs", "dense_term", "error_term")})
