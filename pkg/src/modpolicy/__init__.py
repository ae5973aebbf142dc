"""Diffusion-policy behavior cloning on 2-D control tasks.

Subpackages:
    autodiff   reverse-mode tensor engine with finite-difference checking
    diffusion  noise schedules, forward noising, DDPM/DDIM reverse steps
    nets       attention blocks and the transformer / UNet noise predictors
    envs       point-mass tasks, scripted experts, demonstration datasets
    harness    training, evaluation, ablation, sweep, CLI
"""

__version__ = "0.1.0"

# All tensors here are small; multithreaded BLAS only adds dispatch overhead
# and perturbs reduction determinism across machines.
try:
    import threadpoolctl as _threadpoolctl

    _threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except ImportError:  # slower, still correct
    pass
