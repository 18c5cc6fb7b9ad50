"""Static figure rendering over fedlowrank experiment outputs."""

from .figures import PlotSpec, plot_convergence, plot_kappa_scatter, plot_spectrum, render
from .io import InputError, read_bounds, read_summaries, read_trajectory

__version__ = "0.1.0"
