#!/bin/env python

import dpbound

print(f"dpbound {dpbound.__version__}")

# tight e^epsilon of randomized response on 8 clients
report, model = dpbound.synthesize_privacy(dpbound.rr(8, '1/5'))
print("e^epsilon =", report.p, "epsilon =", report.epsilon)
print("witness:", report.witness)
print("decision diagram size:", model.conditioned_size())

# 1 - beta of counting the reported ones, within 3 of the true count
report, _ = dpbound.synthesize_accuracy(dpbound.rrcount(8, '1/5'), alpha=3)
print("1 - beta =", report.p, "=", float(report.p))
