"""Generate a synthetic testing campaign with known ground truth.

The generator follows the model's own story, so a fit to this data should
recover the quantities printed here (see 03_fit_and_diagnose.py).
"""

import numpy as np

from bugsize import ModelConfig, generate_campaign

config = ModelConfig(max_bugs=400, size_exponent=1.5)
rng = np.random.default_rng(8)
campaign, truth = generate_campaign(
    config, missions=30, phases=8, true_bugs=100, t_range=(0, 50), rng=rng
)

print("=== campaign ===")
print(f"missions x phases : {campaign.missions} x {campaign.phases}")
print(f"test cases        : min {campaign.test_cases.min()}, max {campaign.t_max}")
print(f"detected bugs     : {campaign.detected_total}")
print("detections per phase:", campaign.bugs_detected.sum(axis=0).tolist())

print()
print("=== ground truth (normally latent) ===")
print(f"real bugs         : {truth.true_bugs}")
print(f"missed bugs       : {truth.true_bugs - truth.detected_total}")
print(f"remaining size    : {truth.remaining_size}")
print(f"size range        : {truth.size.min()} .. {truth.size.max()}")
missed = truth.size[truth.cell < 0]
if missed.size:
    print(f"missed-bug sizes  : {sorted(missed.tolist())}")
else:
    print("missed-bug sizes  : none, the campaign caught everything")

print()
print("with sizes near 100 and nu=1.5, detection is near-certain, so the")
print("interesting regime for hidden bugs is heavy campaigns (large t_max)")
print("or smaller size priors; rerun with different settings to explore")
