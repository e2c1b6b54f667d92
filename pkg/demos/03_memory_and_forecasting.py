"""Temporal feature machinery: adaptive EMA buffer, dual-branch memory
selection, queue forecasting, and sigmoid-gated fusion.

Everything below is pure linear algebra over small seeded tensors; no
training is involved anywhere.
"""

import numpy as np

from motrack import (
    GateNetwork,
    MotionQueue,
    ProjectionPair,
    forecast,
    gated_fuse,
    memory_cache_select,
    spatial_pool,
    temporal_buffer_update,
)

rng = np.random.default_rng(7)

# --- adaptive EMA buffer ----------------------------------------------------
# the decay gamma = 1 - min(s_kf, tau_gamma): confident motion lets the new
# key in, uncertain motion preserves the old memory
print("adaptive EMA buffer")
buffer = np.array([1.0, 0.0, 0.0, 0.0])
for s_kf in (0.9, 0.9, 0.1):
    key = np.array([0.0, 1.0, 0.0, 0.0])
    buffer, gamma = temporal_buffer_update(buffer, key, s_kf, tau_gamma=0.9)
    print(f"  s_kf={s_kf:.1f} -> gamma={gamma:.2f} buffer={np.round(buffer, 3)}")
print()

# --- memory-cache frame selection --------------------------------------------
# score = relevance to the current frame + consistency inside the memory;
# with identity projections, the planted near-duplicate of the current frame
# (index 2) wins the relevance branch and ranks first
print("dual-branch memory selection (L=6 frames, keep k=3)")
d = 8
proj = ProjectionPair.identity(d)
current_tokens = rng.normal(size=(4, d))            # N spatial tokens
current = spatial_pool(current_tokens)
memory = rng.normal(size=(6, d))
memory[2] = current[0] + 0.05 * rng.normal(size=d)  # plant a relevant frame
for idx, score in memory_cache_select(current, memory, proj, k=3):
    print(f"  frame {idx}: importance {score:.3f}")
print()

# --- motion queue and forecasting --------------------------------------------
print("constant-velocity forecast from the FIFO motion queue")
queue = MotionQueue(capacity=8, dim=4)
for t in range(6):
    queue.push([100.0 + 4.0 * t, 50.0 + 1.0 * t, 30.0, 60.0])
latent, predicted = forecast(queue)
print(f"  queue length {len(queue)}, predicted next state {np.round(predicted, 1)}")
print()

# --- gated fusion -------------------------------------------------------------
print("gated fusion of a reconstruction feature and the predicted prior")
gate = GateNetwork.from_seed(4, seed=3)
z_h = rng.normal(size=4)          # current-frame reconstruction feature
z_hat = predicted / 100.0         # forecast, embedded crudely for the demo
fused, g = gated_fuse(z_h, z_hat, gate)
print(f"  gate values  {np.round(g, 3)}")
print(f"  fused output {np.round(fused, 3)} (component-wise between the inputs)")
print()
print("forcing the gate open or closed pins the output to one side:")
for bias, label in ((-40.0, "closed -> reconstruction"), (40.0, "open   -> prediction")):
    fused, _ = gated_fuse(z_h, z_hat, GateNetwork.constant(4, bias))
    source = z_h if bias < 0 else z_hat
    print(f"  bias {bias:+.0f}: {label}, max deviation {np.max(np.abs(fused - source)):.1e}")
