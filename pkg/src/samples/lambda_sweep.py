#!/bin/env python

import sys
from fractions import Fraction

import dpbound

n = int(sys.argv[1]) if len(sys.argv) > 1 else 8

# privacy gets weaker as the flip probability moves away from 1/2
for i in range(1, 10):
    lam = Fraction(i, 10)
    privacy, _ = dpbound.synthesize_privacy(dpbound.rr(n, lam))
    accuracy, _ = dpbound.synthesize_accuracy(dpbound.rrcount(n, lam), alpha=3)
    print(f"{float(lam):.1f}  e^eps={float(privacy.p):10.4f}  1-beta={float(accuracy.p):.6f}")
    sys.stdout.flush()
