"""Special functions, windows and Mellin transforms, and the AFE smoothing kernel."""
from .kernel import KernelBank, KernelCache, KernelError, build_kernel_cache, omega_kernel
from .special import digamma, gamma, loggamma, trigamma, zeta_complex, zeta_real, zeta_restricted
from .window import WindowSpec, default_window, mellin, mellin_derivative, window_from_tag

__all__ = [
    "KernelBank", "KernelCache", "KernelError", "build_kernel_cache", "omega_kernel",
    "digamma", "gamma", "loggamma", "trigamma", "zeta_complex", "zeta_real", "zeta_restricted",
    "WindowSpec", "default_window", "mellin", "mellin_derivative", "window_from_tag",
]
