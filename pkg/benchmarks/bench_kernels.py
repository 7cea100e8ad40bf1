#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure numpy fallback.

Each workload runs in a fresh subprocess with QCHANLAB_BACKEND set, so both
paths go through the real import-time switch. Timings exclude JIT compilation
(one warmup call before the clock starts).

Usage: python benchmarks/bench_kernels.py [--samples 50000] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOADS = {
    "oracle-scan (moe, qubit)": """
import numpy as np
from qchanlab import _kernels
from qchanlab.channels import random_channel
phi = random_channel(2, 2, seed=0)
rng = np.random.default_rng(0)
pure = rng.standard_normal(({samples}, 2)) + 1j * rng.standard_normal(({samples}, 2))
pure = np.ascontiguousarray(pure / np.linalg.norm(pure, axis=1)[:, None])
def work():
    return _kernels.scan_entropy(phi.kraus, pure)[0]
""",
    "moe descent (dim-16 product)": """
import numpy as np
from qchanlab.channels import random_channel, identity_channel, tensor_channel
from qchanlab.extensions import bistochastic_extension
from qchanlab.solvers import OptimizerConfig, min_output_entropy
phi = tensor_channel(bistochastic_extension(random_channel(2, 2, seed=0)), identity_channel(2))
cfg = OptimizerConfig(restarts=8, max_iterations=400, seed=1)
def work():
    return min_output_entropy(phi, cfg).value
""",
    "convex roof (qubit pair)": """
import numpy as np
from qchanlab.channels import random_channel, identity_channel, tensor_channel
from qchanlab.linalg import maximally_mixed
from qchanlab.solvers import OptimizerConfig, convex_closure
phi = tensor_channel(random_channel(2, 2, seed=0), identity_channel(2))
cfg = OptimizerConfig(restarts=4, max_iterations=300, seed=1)
def work():
    return convex_closure(phi, maximally_mixed(4), cfg).value
""",
}

RUNNER = """
import time
{setup}
work()  # warmup (includes JIT compilation when enabled)
times = []
for _ in range({repeat}):
    t0 = time.perf_counter()
    value = work()
    times.append(time.perf_counter() - t0)
import json
print(json.dumps({{"best": min(times), "value": float(value)}}))
"""


def run_workload(name: str, setup: str, backend: str, repeat: int) -> dict:
    env = dict(os.environ, QCHANLAB_BACKEND=backend)
    code = RUNNER.format(setup=setup, repeat=repeat)
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    if out.returncode != 0:
        raise RuntimeError(f"{name} [{backend}] failed:\n{out.stderr}")
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=50_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    print(f"{'workload':<34} {'numba':>10} {'numpy':>10} {'speedup':>9}")
    print("-" * 67)
    for name, template in WORKLOADS.items():
        setup = template.format(samples=args.samples)
        compiled = run_workload(name, setup, "numba", args.repeat)
        fallback = run_workload(name, setup, "numpy", args.repeat)
        if abs(compiled["value"] - fallback["value"]) > 1e-9:
            raise RuntimeError(
                f"{name}: backends disagree "
                f"({compiled['value']} vs {fallback['value']})"
            )
        speedup = fallback["best"] / compiled["best"]
        print(
            f"{name:<34} {compiled['best']:>9.3f}s {fallback['best']:>9.3f}s "
            f"{speedup:>8.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
